"""Learning-curve metrics, cross-strategy rank tables, and report rendering.

AUC here is the trapezoidal integral of test accuracy over the labeled-count
axis, normalized by the axis span: a labeled-budget-weighted mean accuracy in
[0, 1], comparable across budgets. Rank tables use fractional (average) ranks
for ties, 1 = best.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .loop import ExperimentResult


@dataclass(frozen=True)
class LearningCurve:
    """(num_labeled, accuracy) points, strictly increasing in num_labeled."""

    points: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        points = tuple((int(n), float(a)) for n, a in self.points)
        object.__setattr__(self, "points", points)
        if not points:
            raise ValueError("a learning curve needs at least one point")
        for (n0, _), (n1, _) in zip(points, points[1:]):
            if n1 <= n0:
                raise ValueError("num_labeled must be strictly increasing")
        for _, accuracy in points:
            if not 0.0 <= accuracy <= 1.0:
                raise ValueError(f"accuracy {accuracy} outside [0, 1]")


def auc(curve: LearningCurve) -> float:
    """Span-normalized area under the curve; a single point returns itself."""
    if len(curve.points) == 1:
        return curve.points[0][1]
    first = curve.points[0][1]
    if all(a == first for _, a in curve.points):
        return first  # constant integrand, exactly
    x = np.array([n for n, _ in curve.points], dtype=float)
    y = np.array([a for _, a in curve.points], dtype=float)
    return float(np.trapezoid(y, x) / (x[-1] - x[0]))


def fractional_ranks(values: Mapping[str, float], higher_is_better: bool = True) -> dict[str, float]:
    """Rank 1 = best; exact ties share the average of their positions."""
    ordered = sorted(values, key=lambda k: (-values[k] if higher_is_better else values[k], k))
    ranks: dict[str, float] = {}
    position = 0
    while position < len(ordered):
        tied = [ordered[position]]
        while (
            position + len(tied) < len(ordered)
            and values[ordered[position + len(tied)]] == values[tied[0]]
        ):
            tied.append(ordered[position + len(tied)])
        mean_rank_value = (2 * position + len(tied) + 1) / 2  # positions are 1-based
        for key in tied:
            ranks[key] = mean_rank_value
        position += len(tied)
    return ranks


def mean_rank(
    per_dataset: Mapping[str, Mapping[str, float]], higher_is_better: bool = True
) -> dict[str, float]:
    """Average each strategy's per-dataset rank across datasets."""
    if not per_dataset:
        raise ValueError("no datasets to rank")
    strategy_sets = [frozenset(v) for v in per_dataset.values()]
    if len(set(strategy_sets)) != 1:
        raise ValueError("every dataset must have a value for every strategy")
    totals: dict[str, float] = {}
    for values in per_dataset.values():
        for strategy, rank in fractional_ranks(values, higher_is_better).items():
            totals[strategy] = totals.get(strategy, 0.0) + rank
    return {s: total / len(per_dataset) for s, total in totals.items()}


def mean_sd(values: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and sample (n-1) standard deviation; singleton sd is 0."""
    if not values:
        raise ValueError("empty group")
    if all(v == values[0] for v in values):
        return float(values[0]), 0.0
    return float(np.mean(values)), float(np.std(values, ddof=1))


@dataclass(frozen=True)
class GroupStats:
    mean_accuracy: float
    sd_accuracy: float
    mean_auc: float
    sd_auc: float
    runs: int


def aggregate(
    results: Sequence["ExperimentResult"],
) -> dict[tuple[str, str, str], GroupStats]:
    """Final-accuracy and AUC stats per (dataset, classifier, strategy)."""
    groups: dict[tuple[str, str, str], list["ExperimentResult"]] = {}
    for result in results:
        key = (result.config.dataset_name, result.config.classifier_kind, result.config.strategy)
        groups.setdefault(key, []).append(result)
    stats = {}
    for key, runs in groups.items():
        mean_acc, sd_acc = mean_sd([r.final_accuracy for r in runs])
        mean_auc_, sd_auc_ = mean_sd([r.auc for r in runs])
        stats[key] = GroupStats(mean_acc, sd_acc, mean_auc_, sd_auc_, len(runs))
    return stats


def format_cell(mean: float, sd: float, decimals: int = 3) -> str:
    if math.isnan(mean):
        return "n/a"
    return f"{mean:.{decimals}f}±{sd:.{decimals}f}"


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]], fmt: str) -> str:
    if fmt == "markdown":
        lines = [
            "| " + " | ".join(headers) + " |",
            "| " + " | ".join("---" for _ in headers) + " |",
        ]
        lines.extend("| " + " | ".join(row) + " |" for row in rows)
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        out = io.StringIO()
        out.write(",".join(headers) + "\n")
        for row in rows:
            out.write(",".join(row) + "\n")
        return out.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def render_report(results: Sequence["ExperimentResult"], fmt: str = "markdown") -> dict[str, str]:
    """Render the benchmark tables and plot-ready curve data.

    Returns named documents: 'summary' (mean rank / mean result per model and
    strategy), 'accuracy' and 'auc' (per-dataset mean±sd), 'query_time'
    (mean±sd seconds per query step), and 'curves_csv' (always CSV).
    """
    if not results:
        raise ValueError("no results to report")
    if fmt not in ("markdown", "csv"):
        raise ValueError(f"unknown format {fmt!r}")

    stats = aggregate(results)
    datasets = sorted({k[0] for k in stats})
    classifiers = sorted({k[1] for k in stats})
    strategies = sorted({k[2] for k in stats})

    # Summary: ranks are computed from per-dataset mean accuracy / mean AUC.
    summary_rows = []
    for classifier in classifiers:
        acc_by_dataset = {
            d: {s: stats[(d, classifier, s)].mean_accuracy for s in strategies}
            for d in datasets
            if all((d, classifier, s) in stats for s in strategies)
        }
        auc_by_dataset = {
            d: {s: stats[(d, classifier, s)].mean_auc for s in strategies}
            for d in datasets
            if all((d, classifier, s) in stats for s in strategies)
        }
        rank_acc = mean_rank(acc_by_dataset)
        rank_auc = mean_rank(auc_by_dataset)
        for strategy in strategies:
            mean_acc = np.mean([acc_by_dataset[d][strategy] for d in acc_by_dataset])
            mean_auc_ = np.mean([auc_by_dataset[d][strategy] for d in auc_by_dataset])
            summary_rows.append(
                [
                    classifier,
                    strategy,
                    f"{rank_acc[strategy]:.2f}",
                    f"{rank_auc[strategy]:.2f}",
                    f"{mean_acc:.3f}",
                    f"{mean_auc_:.3f}",
                ]
            )
    summary = _table(
        ["Model", "Strategy", "Mean Rank Acc.", "Mean Rank AUC", "Mean Result Acc.", "Mean Result AUC"],
        summary_rows,
        fmt,
    )

    def per_dataset_table(metric: str) -> str:
        rows = []
        for dataset in datasets:
            for classifier in classifiers:
                row = [dataset, classifier]
                for strategy in strategies:
                    group = stats.get((dataset, classifier, strategy))
                    if group is None:
                        row.append("n/a")
                    elif metric == "accuracy":
                        row.append(format_cell(group.mean_accuracy, group.sd_accuracy))
                    else:
                        row.append(format_cell(group.mean_auc, group.sd_auc))
                rows.append(row)
        return _table(["Dataset", "Model", *strategies], rows, fmt)

    # Query time: per-run mean seconds over the queried iterations.
    query_rows = []
    for dataset in datasets:
        for classifier in classifiers:
            row = [dataset, classifier]
            for strategy in strategies:
                per_run = [
                    float(np.mean([rec.query_seconds for rec in r.records if rec.iteration > 0]))
                    for r in results
                    if (
                        r.config.dataset_name == dataset
                        and r.config.classifier_kind == classifier
                        and r.config.strategy == strategy
                        and any(rec.iteration > 0 for rec in r.records)
                    )
                ]
                if per_run:
                    row.append(format_cell(*mean_sd(per_run)))
                else:
                    row.append("n/a")
            query_rows.append(row)
    query_time = _table(["Dataset", "Model", *strategies], query_rows, fmt)

    curves = io.StringIO()
    curves.write("run_id,iteration,num_labeled,accuracy\n")
    for result in results:
        for record in result.records:
            curves.write(
                f"{result.config.run_id},{record.iteration},"
                f"{record.num_labeled},{record.test_accuracy!r}\n"
            )

    return {
        "summary": summary,
        "accuracy": per_dataset_table("accuracy"),
        "auc": per_dataset_table("auc"),
        "query_time": query_time,
        "curves_csv": curves.getvalue(),
    }
