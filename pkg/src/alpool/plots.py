"""Learning-curve figures for the report path.

One PNG per dataset: mean test accuracy against labeled count for every
strategy, with a shaded standard-deviation tube across seeds.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

STRATEGY_COLORS = {
    "pe": "tab:blue",
    "bt": "tab:orange",
    "lc": "tab:green",
    "ca": "tab:red",
    "rs": "tab:gray",
}


def render_learning_curves(results: Sequence, out_dir: str | Path) -> list[Path]:
    """Write curves_<dataset>.png for every dataset present in the results."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    datasets = sorted({r.config.dataset_name for r in results})
    written = []
    for dataset in datasets:
        fig, ax = plt.subplots(figsize=(6, 4))
        strategies = sorted(
            {r.config.strategy for r in results if r.config.dataset_name == dataset}
        )
        for strategy in strategies:
            runs = [
                r
                for r in results
                if r.config.dataset_name == dataset and r.config.strategy == strategy
            ]
            lengths = {len(r.records) for r in runs}
            if len(lengths) != 1:
                continue  # mixed iteration counts cannot share an axis
            x = np.array([rec.num_labeled for rec in runs[0].records])
            curves = np.array([[rec.test_accuracy for rec in r.records] for r in runs])
            mean = curves.mean(axis=0)
            if np.isnan(mean).all():
                continue
            color = STRATEGY_COLORS.get(strategy)
            ax.plot(x, mean, label=strategy, color=color)
            if len(runs) > 1:
                sd = curves.std(axis=0, ddof=1)
                ax.fill_between(x, mean - sd, mean + sd, alpha=0.2, color=color)
        ax.set_xlabel("labeled instances")
        ax.set_ylabel("test accuracy")
        ax.set_title(dataset)
        ax.legend()
        ax.grid(True, alpha=0.3)
        path = out_dir / f"curves_{dataset}.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(path)
    return written
