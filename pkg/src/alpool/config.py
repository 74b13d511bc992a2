"""Declarative experiment configs: one JSON file describes dataset,
classifier, strategy, and loop; CLI flags override file values.

Example:

    {
      "dataset": {"name": "reviews", "path": "train.jsonl", "format": "jsonl",
                  "classes": ["neg", "pos"], "test_fraction": 0.1,
                  "stratified": false, "split_seed": 0},
      "features": {"lowercase": true, "max_tokens": 60, "min_df": 1},
      "classifier": {"kind": "builtin",
                     "train": {"max_epochs": 100, "learning_rate": 0.5}},
      "strategy": {"names": ["bt", "rs"], "num_neighbors": 10},
      "loop": {"seed_set_size": 25, "num_iterations": 20, "query_size": 25,
               "seeds": [0, 1, 2, 3, 4]}
    }

A dataset may alternatively carry inline "instances": [{"text", "label"}, ...]
(used by labeling sessions posted over HTTP), and "test_path" replaces
"test_fraction" when a predefined test set exists.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .classifier import TrainConfig
from .corpus import Dataset, Instance, LabelSchema, load_dataset, split_dataset
from .features import VectorizerConfig
from .loop import ExperimentConfig
from .strategies import CAConfig, STRATEGY_NAMES


class ConfigError(Exception):
    pass


@dataclass
class RunPlan:
    base: ExperimentConfig
    strategies: list[str]
    seeds: list[int]
    train: Dataset
    test: Dataset | None


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return raw


def _section(raw: dict, key: str) -> dict:
    value = raw.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"config key {key!r} must be an object")
    return value


def _build(cls, section: dict, context: str, **extra):
    known = {f for f in cls.__dataclass_fields__}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown config key {context}.{sorted(unknown)[0]}")
    try:
        return cls(**{**section, **extra})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {context} config: {exc}") from exc


def build_datasets(raw: dict, base_dir: Path) -> tuple[str, Dataset, Dataset | None]:
    section = _section(raw, "dataset")
    classes = section.get("classes")
    if not isinstance(classes, list) or not classes:
        raise ConfigError("config key dataset.classes must be a non-empty list")
    try:
        schema = LabelSchema(tuple(classes))
    except ValueError as exc:
        raise ConfigError(f"invalid dataset.classes: {exc}") from exc

    if "instances" in section:
        records = section["instances"]
        if not isinstance(records, list) or not records:
            raise ConfigError("config key dataset.instances must be a non-empty list")
        instances = []
        for position, record in enumerate(records):
            label = record.get("label")
            gold = None
            if label is not None:
                try:
                    gold = schema.index_of(str(label))
                except KeyError:
                    raise ConfigError(
                        f"dataset.instances[{position}]: unknown label {label!r}"
                    ) from None
            instances.append(Instance(id=position, text=str(record.get("text", "")), gold_label=gold))
        full = Dataset(schema, tuple(instances))
        name = section.get("name", "inline")
    elif "path" in section:
        path = Path(section["path"])
        if not path.is_absolute():
            path = base_dir / path
        fmt = section.get("format", path.suffix.lstrip("."))
        full = load_dataset(path, fmt, schema)
        name = section.get("name", path.stem)
    else:
        raise ConfigError("config key dataset needs either 'path' or 'instances'")

    if "test_path" in section and section["test_path"]:
        test_path = Path(section["test_path"])
        if not test_path.is_absolute():
            test_path = base_dir / test_path
        fmt = section.get("format", test_path.suffix.lstrip("."))
        return name, full, load_dataset(test_path, fmt, schema)
    if section.get("test_fraction"):
        train, test = split_dataset(
            full,
            float(section["test_fraction"]),
            int(section.get("split_seed", 0)),
            bool(section.get("stratified", False)),
        )
        return name, train, test
    return name, full, None


def build_plan(
    raw: dict,
    base_dir: Path,
    strategy_override: str | None = None,
    seed_override: int | None = None,
) -> RunPlan:
    name, train, test = build_datasets(raw, base_dir)

    strategy_section = dict(_section(raw, "strategy"))
    if strategy_override is not None:
        strategies = [strategy_override]
    elif "names" in strategy_section:
        strategies = list(strategy_section.pop("names"))
    elif "name" in strategy_section:
        strategies = [strategy_section.pop("name")]
    else:
        strategies = ["rs"]
    strategy_section.pop("names", None)
    strategy_section.pop("name", None)
    for s in strategies:
        if s not in STRATEGY_NAMES:
            raise ConfigError(
                f"unknown strategy.name {s!r} (choose from {', '.join(STRATEGY_NAMES)})"
            )
    ca = _build(CAConfig, strategy_section, "strategy")

    classifier_section = _section(raw, "classifier")
    kind = classifier_section.get("kind", "builtin")
    command = classifier_section.get("command")
    train_config = _build(TrainConfig, _section(classifier_section, "train"), "classifier.train")
    features = _build(VectorizerConfig, _section(raw, "features"), "features")

    loop_section = dict(_section(raw, "loop"))
    if seed_override is not None:
        seeds = [seed_override]
    else:
        seeds = list(loop_section.pop("seeds", [0]))
    loop_section.pop("seeds", None)
    if not seeds or not all(isinstance(s, int) for s in seeds):
        raise ConfigError("config key loop.seeds must be a non-empty list of integers")

    base = _build(
        ExperimentConfig,
        loop_section,
        "loop",
        strategy=strategies[0],
        ca=ca,
        classifier_kind=kind,
        external_command=command,
        train=train_config,
        features=features,
        run_seed=seeds[0],
        dataset_name=name,
        dataset_path=str(raw.get("dataset", {}).get("path")) if raw.get("dataset", {}).get("path") else None,
        class_names=train.schema.class_names,
    )
    return RunPlan(base=base, strategies=strategies, seeds=seeds, train=train, test=test)
