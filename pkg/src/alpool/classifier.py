"""Built-in probabilistic text classifier: softmax regression over TF-IDF.

A deliberately small, fully deterministic stand-in for heavyweight backends.
Training is mini-batch gradient descent on cross-entropy plus an L2 penalty,
with a held-out validation split driving early stopping: stop once validation
accuracy clears the configured bar, or once validation loss has not improved
for `early_stop_patience` consecutive epochs; the returned parameters are the
ones from the best-validation-loss epoch.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from .corpus import Dataset, Instance, LabelSchema
from .features import SparseVector, Vectorizer, VectorizerConfig, fit_vectorizer, to_csr, vectorize

PROB_FLOOR = 1e-12


class TrainingError(Exception):
    pass


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 100
    learning_rate: float = 0.5
    l2_penalty: float = 1e-4
    batch_size: int = 32
    val_fraction: float = 0.10
    early_stop_patience: int = 5
    early_stop_accuracy: float = 0.98
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_epochs <= 0 or self.learning_rate <= 0 or self.batch_size <= 0:
            raise ValueError("max_epochs, learning_rate, and batch_size must be positive")
        if self.l2_penalty < 0:
            raise ValueError("l2_penalty must be nonnegative")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")
        if not 0.0 < self.early_stop_accuracy <= 1.0:
            raise ValueError("early_stop_accuracy must be in (0, 1]")
        if self.early_stop_patience <= 0:
            raise ValueError("early_stop_patience must be positive")


@dataclass
class Telemetry:
    epochs_run: int = 0
    best_epoch: int = 0
    val_loss: float = float("nan")
    val_accuracy: float = float("nan")
    val_loss_history: list[float] = field(default_factory=list)


@dataclass
class Model:
    """Trained softmax regression: weights (c x V), bias (c,), and features."""

    weights: np.ndarray
    bias: np.ndarray
    vectorizer: Vectorizer
    schema: LabelSchema
    telemetry: Telemetry

    def predict_proba(self, instances: Sequence[Instance]) -> np.ndarray:
        return predict_proba(self, instances)

    def embed(self, instance: Instance) -> SparseVector:
        return embed(self, instance)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _stratified_holdout(
    labels: np.ndarray, n_val: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded random validation split that preserves class proportions.

    A plain random draw of a handful of examples regularly lands on a single
    class once the labeled set skews, and the best-validation-loss model then
    degenerates to a majority-class predictor. Quotas use largest remainders;
    classes with one example stay in training.
    """
    n = len(labels)
    classes, counts = np.unique(labels, return_counts=True)
    exact = counts * (n_val / n)
    quotas = np.floor(exact).astype(int)
    remainders = exact - quotas
    for cls_pos in np.argsort(-remainders):
        if quotas.sum() >= n_val:
            break
        if quotas[cls_pos] < counts[cls_pos] - 1:
            quotas[cls_pos] += 1
    val_parts, train_parts = [], []
    for cls, quota in zip(classes, quotas):
        members = np.flatnonzero(labels == cls)
        rng.shuffle(members)
        val_parts.append(members[:quota])
        train_parts.append(members[quota:])
    val_idx = np.concatenate(val_parts)
    train_idx = np.concatenate(train_parts)
    if len(val_idx) == 0:  # every class too small for a quota; fall back
        order = rng.permutation(n)
        return order[:n_val], order[n_val:]
    return val_idx, train_idx


def loss_and_gradient(
    weights: np.ndarray,
    bias: np.ndarray,
    x: sparse.csr_matrix,
    labels: np.ndarray,
    l2_penalty: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy + 0.5*l2*||W||^2 and its analytic gradient.

    The bias is not regularized. Kept as a standalone function so finite
    differences can check the gradient without touching the training loop.
    """
    n = x.shape[0]
    probs = softmax(x @ weights.T + bias)
    picked = np.maximum(probs[np.arange(n), labels], PROB_FLOOR)
    data_loss = float(-np.log(picked).mean())
    penalty = 0.5 * l2_penalty * float(np.sum(weights * weights))

    delta = probs
    delta[np.arange(n), labels] -= 1.0
    delta /= n
    grad_w = np.asarray(delta.T @ x) + l2_penalty * weights
    grad_b = delta.sum(axis=0)
    return data_loss + penalty, grad_w, grad_b


def fit(
    examples: Sequence[tuple[Instance, int]],
    schema: LabelSchema,
    config: TrainConfig,
    vectorizer_config: VectorizerConfig | None = None,
) -> Model:
    """Train from scratch on the given labeled examples; fully seeded."""
    if not examples:
        raise TrainingError("no training examples")
    if len(examples) < schema.num_classes:
        raise TrainingError(
            f"need at least {schema.num_classes} examples, have {len(examples)}"
        )
    labels = np.array([y for _, y in examples], dtype=int)
    if len(set(labels.tolist())) < 2:
        raise TrainingError("training set contains a single class")
    if labels.min() < 0 or labels.max() >= schema.num_classes:
        raise TrainingError("label index out of range")

    texts = [inst.text for inst, _ in examples]
    vectorizer = fit_vectorizer(texts, vectorizer_config)
    x = to_csr([vectorize(vectorizer, t) for t in texts], num_dims=len(vectorizer.vocabulary))

    rng = np.random.default_rng(config.seed)
    n = len(examples)
    n_val = min(max(1, int(round(config.val_fraction * n))), n - 1)
    val_idx, train_idx = _stratified_holdout(labels, n_val, rng)
    x_val, y_val = x[val_idx], labels[val_idx]
    x_train, y_train = x[train_idx], labels[train_idx]

    c, v = schema.num_classes, x.shape[1]
    weights = np.zeros((c, v))
    bias = np.zeros(c)
    telemetry = Telemetry()
    best = (np.inf, weights.copy(), bias.copy(), 0)
    stale_epochs = 0

    for epoch in range(1, config.max_epochs + 1):
        perm = rng.permutation(len(train_idx))
        for start in range(0, len(perm), config.batch_size):
            batch = perm[start : start + config.batch_size]
            _, grad_w, grad_b = loss_and_gradient(
                weights, bias, x_train[batch], y_train[batch], config.l2_penalty
            )
            weights -= config.learning_rate * grad_w
            bias -= config.learning_rate * grad_b

        val_probs = softmax(x_val @ weights.T + bias)
        val_loss = float(
            -np.log(np.maximum(val_probs[np.arange(n_val), y_val], PROB_FLOOR)).mean()
        )
        val_accuracy = float((val_probs.argmax(axis=1) == y_val).mean())
        telemetry.epochs_run = epoch
        telemetry.val_loss_history.append(val_loss)

        if val_loss < best[0]:
            best = (val_loss, weights.copy(), bias.copy(), epoch)
            stale_epochs = 0
        else:
            stale_epochs += 1
        if val_accuracy > config.early_stop_accuracy or stale_epochs >= config.early_stop_patience:
            break

    best_loss, best_weights, best_bias, best_epoch = best
    telemetry.best_epoch = best_epoch
    telemetry.val_loss = best_loss
    best_probs = softmax(x_val @ best_weights.T + best_bias)
    telemetry.val_accuracy = float((best_probs.argmax(axis=1) == y_val).mean())
    return Model(
        weights=best_weights,
        bias=best_bias,
        vectorizer=vectorizer,
        schema=schema,
        telemetry=telemetry,
    )


def predict_proba(model: Model, instances: Sequence[Instance]) -> np.ndarray:
    """Row-per-instance class distributions, softmax(Wx + b)."""
    if not instances:
        return np.zeros((0, model.schema.num_classes))
    x = to_csr(
        [vectorize(model.vectorizer, inst.text) for inst in instances],
        num_dims=len(model.vectorizer.vocabulary),
    )
    return softmax(x @ model.weights.T + model.bias)


def embed(model: Model, instance: Instance) -> SparseVector:
    return vectorize(model.vectorizer, instance.text)


def evaluate(model, test: Dataset) -> tuple[float, float]:
    """Accuracy and mean clamped cross-entropy on a gold-labeled dataset.

    Works with anything exposing predict_proba, including external backends.
    """
    if len(test) == 0:
        raise ValueError("empty test set")
    gold = []
    for inst in test.instances:
        if inst.gold_label is None:
            raise ValueError(f"test instance {inst.id} lacks a gold label")
        gold.append(inst.gold_label)
    labels = np.array(gold, dtype=int)
    probs = np.asarray(model.predict_proba(list(test.instances)))
    accuracy = float((probs.argmax(axis=1) == labels).mean())
    picked = np.maximum(probs[np.arange(len(labels)), labels], PROB_FLOOR)
    mean_loss = float(-np.log(picked).mean())
    return accuracy, mean_loss
