"""Dataset ingestion, label schemas, splitting, and labeled/unlabeled pools.

Datasets are loaded from JSONL ({"id"?: int, "text": str, "label": str}) or
CSV (header with at least ``text,label``). All randomized operations take an
explicit seed and are reproducible byte for byte.
"""
from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class DatasetError(Exception):
    """Raised for unreadable, malformed, or schema-violating dataset input."""


@dataclass(frozen=True)
class LabelSchema:
    """Ordered class names; class indices are positions in this list."""

    class_names: tuple[str, ...]

    def __post_init__(self) -> None:
        names = tuple(self.class_names)
        object.__setattr__(self, "class_names", names)
        if len(names) < 2:
            raise ValueError("schema needs at least two classes")
        if len(set(names)) != len(names):
            raise ValueError("class names must be unique")
        if any(not n for n in names):
            raise ValueError("class names must be non-empty")

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def index_of(self, name: str) -> int:
        try:
            return self.class_names.index(name)
        except ValueError:
            raise KeyError(name) from None


@dataclass(frozen=True)
class Instance:
    id: int
    text: str
    gold_label: int | None = None


@dataclass
class Dataset:
    """An ordered collection of instances under one label schema.

    Freshly loaded datasets have ids 0..n-1 in file order. Split views keep
    the parent's ids so that train/test partitions stay assertable on ids.
    """

    schema: LabelSchema
    instances: tuple[Instance, ...]
    _by_id: dict[int, Instance] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.instances = tuple(self.instances)
        if not self.instances:
            raise DatasetError("empty dataset")
        by_id: dict[int, Instance] = {}
        for inst in self.instances:
            if inst.id < 0:
                raise DatasetError(f"negative instance id {inst.id}")
            if inst.id in by_id:
                raise DatasetError(f"duplicate instance id {inst.id}")
            if inst.gold_label is not None and not (
                0 <= inst.gold_label < self.schema.num_classes
            ):
                raise DatasetError(
                    f"instance {inst.id}: gold label {inst.gold_label} out of range"
                )
            by_id[inst.id] = inst
        self._by_id = by_id

    def __len__(self) -> int:
        return len(self.instances)

    def __getitem__(self, instance_id: int) -> Instance:
        return self._by_id[instance_id]

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(inst.id for inst in self.instances)

    def subset(self, ids: Iterable[int]) -> "Dataset":
        return Dataset(self.schema, tuple(self._by_id[i] for i in ids))


def load_dataset(path: str | Path, format: str, schema: LabelSchema) -> Dataset:
    """Load a JSONL or CSV dataset; ids are assigned 0..n-1 in file order."""
    path = Path(path)
    if format not in ("jsonl", "csv"):
        raise ValueError(f"unsupported format {format!r}")
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc

    instances: list[Instance] = []
    if format == "jsonl":
        for lineno, line in enumerate(raw.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}: line {lineno}: malformed JSON: {exc}") from exc
            if not isinstance(record, dict) or "text" not in record or "label" not in record:
                raise DatasetError(f"{path}: line {lineno}: record needs 'text' and 'label'")
            instances.append(_make_instance(record, len(instances), schema, path, lineno))
            if "id" in record and record["id"] != instances[-1].id:
                raise DatasetError(
                    f"{path}: line {lineno}: id {record['id']} is not sequential"
                )
    else:
        reader = csv.DictReader(raw.splitlines())
        fields = reader.fieldnames or []
        if instances_missing := {"text", "label"} - set(fields):
            if raw.strip():
                raise DatasetError(
                    f"{path}: CSV header must contain columns text,label "
                    f"(missing {sorted(instances_missing)})"
                )
        for lineno, row in enumerate(reader, start=2):
            instances.append(_make_instance(row, len(instances), schema, path, lineno))

    if not instances:
        raise DatasetError("empty dataset")
    return Dataset(schema, tuple(instances))


def _make_instance(
    record: Mapping[str, object], position: int, schema: LabelSchema, path: Path, lineno: int
) -> Instance:
    text = record.get("text")
    label = record.get("label")
    if not isinstance(text, str):
        raise DatasetError(f"{path}: line {lineno}: 'text' must be a string")
    try:
        gold = schema.index_of(str(label))
    except KeyError:
        raise DatasetError(
            f"{path}: line {lineno}: unknown label {label!r} "
            f"(schema: {', '.join(schema.class_names)})"
        ) from None
    return Instance(id=position, text=text, gold_label=gold)


def split_dataset(
    dataset: Dataset, test_fraction: float, seed: int, stratified: bool = False
) -> tuple[Dataset, Dataset]:
    """Deterministic train/test split; ids are preserved from the parent.

    Stratified mode keeps per-class test counts within one instance of the
    exact proportion, spare slots going to the largest classes first.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    n = len(dataset)
    n_test = int(round(test_fraction * n))
    if n_test == 0 or n_test == n:
        raise DatasetError(
            f"test_fraction {test_fraction} yields an empty split for n={n}"
        )
    rng = np.random.default_rng(seed)

    if not stratified:
        order = rng.permutation(n)
        test_positions = set(order[:n_test].tolist())
    else:
        by_class: dict[int, list[int]] = {}
        for pos, inst in enumerate(dataset.instances):
            if inst.gold_label is None:
                raise DatasetError(f"instance {inst.id} lacks a gold label; cannot stratify")
            by_class.setdefault(inst.gold_label, []).append(pos)
        for cls, positions in sorted(by_class.items()):
            if len(positions) < 2:
                raise DatasetError(
                    f"class {dataset.schema.class_names[cls]!r} has fewer than 2 instances; "
                    "cannot stratify"
                )
        quotas = {cls: int(test_fraction * len(p)) for cls, p in by_class.items()}
        spare = n_test - sum(quotas.values())
        # Spare slots to the largest classes first, ties by class index.
        for cls in sorted(by_class, key=lambda c: (-len(by_class[c]), c)):
            if spare <= 0:
                break
            if quotas[cls] < len(by_class[cls]):
                quotas[cls] += 1
                spare -= 1
        test_positions = set()
        for cls, positions in sorted(by_class.items()):
            shuffled = list(positions)
            rng.shuffle(shuffled)
            test_positions.update(shuffled[: quotas[cls]])

    train_ids = [inst.id for pos, inst in enumerate(dataset.instances) if pos not in test_positions]
    test_ids = [inst.id for pos, inst in enumerate(dataset.instances) if pos in test_positions]
    if not train_ids or not test_ids:
        raise DatasetError("split produced an empty side")
    return dataset.subset(train_ids), dataset.subset(test_ids)


class Pool:
    """Disjoint labeled/unlabeled id sets over a fixed dataset.

    Only the active-learning driver mutates a pool; everything else reads it.
    """

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self._labeled: list[int] = []
        self._unlabeled: list[int] = list(dataset.ids)
        self._unlabeled_set: set[int] = set(self._unlabeled)
        self.labels: dict[int, int] = {}

    @property
    def labeled(self) -> tuple[int, ...]:
        return tuple(self._labeled)

    @property
    def unlabeled(self) -> tuple[int, ...]:
        return tuple(self._unlabeled)

    def mark_labeled(self, ids: Sequence[int], labels: Sequence[int]) -> None:
        if len(ids) != len(labels):
            raise ValueError("ids and labels must have equal length")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate ids in batch")
        c = self.dataset.schema.num_classes
        for i, y in zip(ids, labels):
            if i not in self._unlabeled_set:
                raise ValueError(f"instance {i} is not in the unlabeled pool")
            if not 0 <= y < c:
                raise ValueError(f"label {y} out of range for instance {i}")
        chosen = set(ids)
        self._labeled.extend(ids)
        self._unlabeled = [i for i in self._unlabeled if i not in chosen]
        self._unlabeled_set -= chosen
        for i, y in zip(ids, labels):
            self.labels[i] = y

    def labeled_examples(self) -> list[tuple[Instance, int]]:
        return [(self.dataset[i], self.labels[i]) for i in self._labeled]

    def snapshot(self) -> dict:
        return {
            "labeled": list(self._labeled),
            "unlabeled": list(self._unlabeled),
            "labels": dict(self.labels),
        }


def init_seed_set(pool: Pool, size: int, mode: str, seed: int) -> list[int]:
    """Pick the initial batch to label, either uniformly or class-balanced.

    Class-balanced mode takes floor(size/c) gold-labeled instances per class
    and fills the remainder uniformly from the rest of the unlabeled pool.
    Output is sorted ascending; the order carries no meaning downstream.
    """
    unlabeled = pool.unlabeled
    if size <= 0:
        raise ValueError("seed set size must be positive")
    if size > len(unlabeled):
        raise ValueError(f"seed set size {size} exceeds pool of {len(unlabeled)}")
    rng = np.random.default_rng(seed)

    if mode == "random":
        chosen = rng.choice(len(unlabeled), size=size, replace=False)
        return sorted(unlabeled[i] for i in chosen)
    if mode != "class_balanced":
        raise ValueError(f"unknown seed mode {mode!r}")

    schema = pool.dataset.schema
    per_class = size // schema.num_classes
    by_class: dict[int, list[int]] = {c: [] for c in range(schema.num_classes)}
    for i in unlabeled:
        gold = pool.dataset[i].gold_label
        if gold is None:
            raise ValueError(f"instance {i} lacks a gold label; cannot class-balance")
        by_class[gold].append(i)

    picked: list[int] = []
    for cls in range(schema.num_classes):
        candidates = by_class[cls]
        if len(candidates) < per_class:
            raise ValueError(
                f"class {schema.class_names[cls]!r} has only {len(candidates)} "
                f"unlabeled instances, need {per_class}"
            )
        shuffled = list(candidates)
        rng.shuffle(shuffled)
        picked.extend(shuffled[:per_class])

    remainder = size - len(picked)
    if remainder > 0:
        chosen = set(picked)
        rest = [i for i in unlabeled if i not in chosen]
        extra = rng.choice(len(rest), size=remainder, replace=False)
        picked.extend(rest[i] for i in extra)
    return sorted(picked)


def class_counts(dataset: Dataset) -> Counter:
    return Counter(
        inst.gold_label for inst in dataset.instances if inst.gold_label is not None
    )


def dataset_to_dict(dataset: Dataset) -> dict:
    return {
        "class_names": list(dataset.schema.class_names),
        "instances": [
            {"id": inst.id, "text": inst.text, "gold_label": inst.gold_label}
            for inst in dataset.instances
        ],
    }


def dataset_from_dict(raw: Mapping) -> Dataset:
    schema = LabelSchema(tuple(raw["class_names"]))
    instances = tuple(
        Instance(id=r["id"], text=r["text"], gold_label=r.get("gold_label"))
        for r in raw["instances"]
    )
    return Dataset(schema, instances)
