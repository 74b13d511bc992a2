"""The pool-based active-learning driver.

Per run: label a seed set, train an initial model, then iterate
score-select-label-retrain. Each iteration retrains from scratch on all data
labeled so far, and the full unlabeled pool is scored every time; there is no
candidate subsampling. Only the score+select step is timed as query_seconds.

All randomness derives from the run seed through a fixed mixing function, so
per-iteration seeds never shift when the iteration count changes, and
strategies sharing a run seed start from the same seed set.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from . import metrics
from .classifier import Model, TrainConfig, evaluate, fit
from .corpus import Dataset, Pool, init_seed_set
from .external import ExternalClassifier
from .features import VectorizerConfig
from .strategies import (
    CAConfig,
    CONTEXT_NEEDS,
    QueryContext,
    compute_scores,
    random_batch,
    select_batch,
)

Oracle = Callable[[Sequence[int]], Sequence[int]]
Clock = Callable[[], float]


def derive_seed(base_seed: int, *parts) -> int:
    """Stable seed mixing: independent streams per purpose and iteration."""
    key = ":".join([str(base_seed), *map(str, parts)])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big")


@dataclass(frozen=True)
class ExperimentConfig:
    strategy: str = "rs"
    ca: CAConfig = field(default_factory=CAConfig)
    classifier_kind: str = "builtin"
    external_command: str | None = None
    train: TrainConfig = field(default_factory=TrainConfig)
    features: VectorizerConfig = field(default_factory=VectorizerConfig)
    seed_set_size: int = 25
    seed_mode: str = "random"
    num_iterations: int = 20
    query_size: int = 25
    run_seed: int = 0
    auc_include_seed: bool = True
    dataset_name: str = "dataset"
    dataset_path: str | None = None
    class_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.seed_set_size <= 0 or self.query_size <= 0:
            raise ValueError("seed_set_size and query_size must be positive")
        if self.num_iterations < 0:
            raise ValueError("num_iterations must be nonnegative")
        if self.classifier_kind not in ("builtin", "external"):
            raise ValueError(f"unknown classifier kind {self.classifier_kind!r}")
        if self.classifier_kind == "external" and not self.external_command:
            raise ValueError("external classifier requires a command")

    @property
    def run_id(self) -> str:
        return f"{self.dataset_name}-{self.strategy}-{self.classifier_kind}-s{self.run_seed}"


@dataclass
class IterationRecord:
    iteration: int
    num_labeled: int
    test_accuracy: float
    val_loss: float
    query_seconds: float
    queried_ids: list[int]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[IterationRecord]

    @property
    def final_accuracy(self) -> float:
        return self.records[-1].test_accuracy

    def curve(self, include_seed: bool | None = None) -> metrics.LearningCurve:
        if include_seed is None:
            include_seed = self.config.auc_include_seed
        records = self.records if include_seed else self.records[1:]
        if not records:
            records = self.records[-1:]
        return metrics.LearningCurve(
            tuple((r.num_labeled, r.test_accuracy) for r in records)
        )

    @property
    def auc(self) -> float:
        # Runs without a test set have no accuracies to integrate.
        if any(r.test_accuracy != r.test_accuracy for r in self.records):
            return float("nan")
        return metrics.auc(self.curve())


class BuiltinBackend:
    kind = "builtin"

    def __init__(self, train_config: TrainConfig, features: VectorizerConfig):
        self.train_config = train_config
        self.features = features

    def fit(self, examples, schema, seed: int) -> Model:
        config = replace(self.train_config, seed=seed)
        return fit(examples, schema, config, self.features)

    def val_loss(self, model: Model) -> float:
        return model.telemetry.val_loss

    def close(self) -> None:
        pass


class ExternalBackend:
    kind = "external"

    def __init__(self, command: str):
        self.classifier = ExternalClassifier(command)

    def fit(self, examples, schema, seed: int) -> ExternalClassifier:
        return self.classifier.fit(examples, schema, seed)

    def val_loss(self, model: ExternalClassifier) -> float:
        return model.telemetry_val_loss

    def close(self) -> None:
        self.classifier.close()


def make_backend(config: ExperimentConfig):
    if config.classifier_kind == "external":
        return ExternalBackend(config.external_command)
    return BuiltinBackend(config.train, config.features)


def choose_seed_set(config: ExperimentConfig, pool: Pool) -> list[int]:
    return init_seed_set(
        pool, config.seed_set_size, config.seed_mode, derive_seed(config.run_seed, "seed-set")
    )


def query_batch(config: ExperimentConfig, model, pool: Pool, iteration: int) -> list[int]:
    """Score the full unlabeled pool and pick the next batch to label."""
    unlabeled = pool.unlabeled
    if config.strategy == "rs":
        return random_batch(
            unlabeled, config.query_size, derive_seed(config.run_seed, "query", iteration)
        )
    needs = CONTEXT_NEEDS[config.strategy]
    instances = [pool.dataset[i] for i in unlabeled]
    distributions = None
    embeddings = None
    if "distributions" in needs:
        probs = model.predict_proba(instances)
        distributions = {i: probs[row] for row, i in enumerate(unlabeled)}
    if "embeddings" in needs:
        embeddings = {i: model.embed(inst) for i, inst in zip(unlabeled, instances)}
    ctx = QueryContext(
        unlabeled=unlabeled,
        distributions=distributions,
        embeddings=embeddings,
        rng_seed=derive_seed(config.run_seed, "query", iteration),
    )
    scores, direction = compute_scores(config.strategy, ctx, config.ca)
    return select_batch(scores, config.query_size, direction)


def run_experiment(
    config: ExperimentConfig,
    train: Dataset,
    test: Dataset | None,
    oracle: Oracle,
    *,
    clock: Clock = time.perf_counter,
    on_iteration: Callable[[IterationRecord, Pool], None] | None = None,
) -> ExperimentResult:
    """Execute one full active-learning run; see the module docstring."""
    budget = config.seed_set_size + config.num_iterations * config.query_size
    if budget > len(train):
        raise ValueError(
            f"label budget {budget} exceeds training pool of {len(train)} instances"
        )
    backend = make_backend(config)
    try:
        pool = Pool(train)
        records: list[IterationRecord] = []

        seed_ids = choose_seed_set(config, pool)
        pool.mark_labeled(seed_ids, oracle(seed_ids))
        model = backend.fit(
            pool.labeled_examples(), train.schema, derive_seed(config.run_seed, "train", 0)
        )
        records.append(
            _record(config, backend, model, test, 0, 0.0, list(seed_ids), pool, on_iteration)
        )

        for iteration in range(1, config.num_iterations + 1):
            started = clock()
            queried = query_batch(config, model, pool, iteration)
            query_seconds = clock() - started

            pool.mark_labeled(queried, oracle(queried))
            model = backend.fit(
                pool.labeled_examples(),
                train.schema,
                derive_seed(config.run_seed, "train", iteration),
            )
            records.append(
                _record(
                    config, backend, model, test, iteration, query_seconds, queried, pool,
                    on_iteration,
                )
            )
        return ExperimentResult(config=config, records=records)
    finally:
        backend.close()


def _record(config, backend, model, test, iteration, query_seconds, queried, pool, on_iteration):
    accuracy = float("nan")
    if test is not None:
        accuracy, _ = evaluate(model, test)
    record = IterationRecord(
        iteration=iteration,
        num_labeled=len(pool.labeled),
        test_accuracy=accuracy,
        val_loss=backend.val_loss(model),
        query_seconds=query_seconds,
        queried_ids=list(queried),
    )
    if on_iteration is not None:
        on_iteration(record, pool)
    return record


def run_suite(
    base: ExperimentConfig,
    strategies: Sequence[str],
    seeds: Sequence[int],
    train: Dataset,
    test: Dataset | None,
    oracle: Oracle,
    *,
    clock: Clock = time.perf_counter,
) -> list[ExperimentResult]:
    """The cross product strategies x seeds, in (strategy, seed) order.

    Seed-set selection depends only on the run seed, so every strategy under
    one seed starts from the identical initial labeled set.
    """
    if not strategies or not seeds:
        raise ValueError("need at least one strategy and one seed")
    results = []
    for strategy in strategies:
        for seed in seeds:
            config = replace(base, strategy=strategy, run_seed=seed)
            results.append(run_experiment(config, train, test, oracle, clock=clock))
    return results
