"""Deterministic synthetic text datasets for benchmarks and demos.

Each class owns a private vocabulary; documents mix class words with shared
noise words. `class_word_rate` controls difficulty: at 1.0 every content word
is class-specific and the task is separable, lower rates blur the classes so
learning curves rise gradually instead of saturating at once.
"""
from __future__ import annotations

import numpy as np

from .corpus import Dataset, Instance, LabelSchema


def make_synthetic_dataset(
    n: int,
    num_classes: int = 2,
    seed: int = 0,
    words_per_class: int = 150,
    noise_words: int = 80,
    doc_length: int = 10,
    class_word_rate: float = 0.7,
    class_names: tuple[str, ...] | None = None,
) -> Dataset:
    if class_names is None:
        class_names = tuple(f"c{k}" for k in range(num_classes))
    schema = LabelSchema(class_names)
    rng = np.random.default_rng(seed)

    class_vocab = [
        [f"w{cls}x{w}" for w in range(words_per_class)] for cls in range(num_classes)
    ]
    noise_vocab = [f"noise{w}" for w in range(noise_words)]

    instances = []
    for i in range(n):
        cls = int(rng.integers(num_classes))
        words = []
        for _ in range(doc_length):
            if rng.random() < class_word_rate:
                words.append(class_vocab[cls][int(rng.integers(words_per_class))])
            else:
                words.append(noise_vocab[int(rng.integers(noise_words))])
        instances.append(Instance(id=i, text=" ".join(words), gold_label=cls))
    return Dataset(schema, tuple(instances))
