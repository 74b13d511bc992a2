"""Result persistence: per-run JSON, the flat results CSV, and the manifest.

Floats are written with repr so simulated reruns under the same seed produce
byte-identical files; no timestamps are embedded.
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Sequence

from .classifier import TrainConfig
from .features import VectorizerConfig
from .loop import ExperimentConfig, ExperimentResult, IterationRecord
from .strategies import CAConfig

CSV_HEADER = "run_id,dataset,strategy,classifier,seed,iteration,num_labeled,accuracy,val_loss,query_seconds"


def config_to_dict(config: ExperimentConfig) -> dict:
    raw = dataclasses.asdict(config)
    if raw.get("class_names") is not None:
        raw["class_names"] = list(raw["class_names"])
    return raw


def config_from_dict(raw: dict) -> ExperimentConfig:
    data = dict(raw)
    data["ca"] = CAConfig(**data.get("ca", {}))
    data["train"] = TrainConfig(**data.get("train", {}))
    data["features"] = VectorizerConfig(**data.get("features", {}))
    if data.get("class_names") is not None:
        data["class_names"] = tuple(data["class_names"])
    return ExperimentConfig(**data)


def _json_float(value: float) -> float | None:
    return None if value != value else value  # JSON has no NaN


def result_to_dict(result: ExperimentResult) -> dict:
    records = []
    for r in result.records:
        record = dataclasses.asdict(r)
        record["test_accuracy"] = _json_float(record["test_accuracy"])
        record["val_loss"] = _json_float(record["val_loss"])
        records.append(record)
    return {
        "run_id": result.config.run_id,
        "config": config_to_dict(result.config),
        "records": records,
        "final_accuracy": _json_float(result.final_accuracy),
        "auc": _json_float(result.auc),
    }


def result_from_dict(raw: dict) -> ExperimentResult:
    config = config_from_dict(raw["config"])
    records = []
    for r in raw["records"]:
        data = dict(r)
        data["test_accuracy"] = float("nan") if data.get("test_accuracy") is None else data["test_accuracy"]
        data["val_loss"] = float("nan") if data.get("val_loss") is None else data["val_loss"]
        records.append(IterationRecord(**data))
    return ExperimentResult(config=config, records=records)


def write_result(result: ExperimentResult, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(result_to_dict(result), indent=2) + "\n", encoding="utf-8")


def load_result(path: Path) -> ExperimentResult:
    return result_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def results_csv(results: Sequence[ExperimentResult]) -> str:
    lines = [CSV_HEADER]
    for result in results:
        c = result.config
        for r in result.records:
            lines.append(
                f"{c.run_id},{c.dataset_name},{c.strategy},{c.classifier_kind},"
                f"{c.run_seed},{r.iteration},{r.num_labeled},"
                f"{r.test_accuracy!r},{r.val_loss!r},{r.query_seconds!r}"
            )
    return "\n".join(lines) + "\n"


def write_run_outputs(results: Sequence[ExperimentResult], out_dir: Path) -> Path:
    """Write runs/<run_id>.json, results.csv, and manifest.json; returns the
    manifest path. Every file referenced by the manifest exists on return."""
    out_dir = Path(out_dir)
    runs_dir = out_dir / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for result in results:
        run_file = runs_dir / f"{result.config.run_id}.json"
        write_result(result, run_file)
        entries.append(
            {
                "run_id": result.config.run_id,
                "dataset": result.config.dataset_name,
                "strategy": result.config.strategy,
                "classifier": result.config.classifier_kind,
                "seed": result.config.run_seed,
                "result_file": str(run_file.relative_to(out_dir)),
            }
        )

    (out_dir / "results.csv").write_text(results_csv(results), encoding="utf-8")
    manifest = {"runs": entries, "results_csv": "results.csv"}
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path


def load_manifest_results(manifest_path: Path) -> list[ExperimentResult]:
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    runs = manifest.get("runs", [])
    if not runs:
        raise ValueError(f"{manifest_path}: manifest references no runs")
    results = []
    for entry in runs:
        result_file = manifest_path.parent / entry["result_file"]
        if not result_file.exists():
            raise FileNotFoundError(f"manifest references missing file {result_file}")
        results.append(load_result(result_file))
    return results
