from __future__ import annotations

import json

import pytest

from alpool.corpus import Dataset, Instance, LabelSchema


class CountingClock:
    """Deterministic clock: every read advances by a fixed step."""

    def __init__(self, step: float = 1.0):
        self.now = 0.0
        self.step = step
        self.reads = 0

    def __call__(self) -> float:
        self.now += self.step
        self.reads += 1
        return self.now


@pytest.fixture
def counting_clock():
    return CountingClock()


@pytest.fixture
def sentiment_schema():
    return LabelSchema(("pos", "neg"))


@pytest.fixture
def tiny_jsonl(tmp_path, sentiment_schema):
    path = tmp_path / "tiny.jsonl"
    rows = [
        {"text": "great fun film", "label": "pos"},
        {"text": "dull and slow", "label": "neg"},
        {"text": "a delight", "label": "pos"},
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    return path


def make_dataset(texts_and_labels, class_names=("pos", "neg")) -> Dataset:
    schema = LabelSchema(tuple(class_names))
    instances = tuple(
        Instance(id=i, text=text, gold_label=label)
        for i, (text, label) in enumerate(texts_and_labels)
    )
    return Dataset(schema, instances)
