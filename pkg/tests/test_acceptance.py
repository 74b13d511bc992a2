"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete. Every tolerance and time budget is pinned here.
"""
from __future__ import annotations

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from alpool.classifier import TrainConfig, loss_and_gradient
from alpool.features import SparseVector
from alpool.loop import ExperimentConfig, run_experiment, run_suite
from alpool.metrics import LearningCurve, auc, fractional_ranks, mean_sd
from alpool.oracle import (
    FINISHED,
    create_session,
    load_session,
    make_simulated_oracle,
    submit_and_advance,
)
from alpool.results import results_csv
from alpool.strategies import (
    CAConfig,
    QueryContext,
    compute_scores,
    contrastive_scores,
    entropy_score,
    kl_divergence,
    least_confidence_score,
    margin_score,
    random_batch,
    select_batch,
)
from alpool.synthetic import make_synthetic_dataset
from conftest import CountingClock
from oracles import brute_contrastive, sparse_to_dict


@contextmanager
def criterion(number: int, description: str, budget_seconds: float):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[acceptance] criterion {number} ({description}): FAIL", flush=True)
        raise
    elapsed = time.perf_counter() - started
    assert elapsed < budget_seconds, (
        f"criterion {number} took {elapsed:.1f}s, budget {budget_seconds}s"
    )
    print(
        f"[acceptance] criterion {number} ({description}): PASS ({elapsed:.1f}s)",
        flush=True,
    )


def test_criterion_1_binary_pe_bt_lc_equivalence():
    with criterion(1, "binary PE/BT/LC equivalence", 10.0):
        rng = np.random.default_rng(101)
        for _ in range(1000):
            n = int(rng.integers(3, 80))
            ids = tuple(int(i) for i in rng.choice(5000, size=n, replace=False))
            ctx = QueryContext(
                unlabeled=ids,
                distributions={i: rng.dirichlet(np.ones(2)) for i in ids},
            )
            k = int(rng.integers(1, n + 1))
            batches = []
            for name in ("pe", "bt", "lc"):
                scores, direction = compute_scores(name, ctx)
                batches.append(select_batch(scores, k, direction))
            assert batches[0] == batches[1] == batches[2]

        # End to end: shared seeds on a binary dataset, identical queries
        # at every iteration.
        full = make_synthetic_dataset(440, seed=15, class_word_rate=0.55)
        train, test = full.subset(range(400)), full.subset(range(400, 440))
        config = ExperimentConfig(
            seed_set_size=25,
            num_iterations=6,
            query_size=15,
            run_seed=33,
            dataset_name="binary-e2e",
            train=TrainConfig(max_epochs=30),
        )
        results = run_suite(
            config, ["pe", "bt", "lc"], [33], train, test, make_simulated_oracle(train)
        )
        pe, bt, lc = results
        for iteration in range(len(pe.records)):
            assert (
                pe.records[iteration].queried_ids
                == bt.records[iteration].queried_ids
                == lc.records[iteration].queried_ids
            )


def test_criterion_2_scorer_unit_values():
    with criterion(2, "scorer closed-form values", 1.0):
        expected_entropy = -(0.7 * math.log(0.7) + 0.2 * math.log(0.2) + 0.1 * math.log(0.1))
        assert abs(entropy_score((0.7, 0.2, 0.1)) - expected_entropy) < 1e-9
        assert abs(entropy_score((1.0, 0.0, 0.0))) < 1e-9
        assert abs(entropy_score([0.25] * 4) - math.log(4)) < 1e-9

        assert abs(margin_score((0.5, 0.5))) < 1e-9
        assert abs(margin_score((1.0, 0.0)) - 1.0) < 1e-9
        assert abs(margin_score((0.7, 0.2, 0.1)) - 0.5) < 1e-9

        assert abs(least_confidence_score((1.0, 0.0))) < 1e-9
        assert abs(least_confidence_score([0.25] * 4) - 0.75) < 1e-9
        assert abs(least_confidence_score((0.7, 0.2, 0.1)) - 0.3) < 1e-9

        assert abs(kl_divergence((0.3, 0.7), (0.3, 0.7))) < 1e-8
        assert abs(kl_divergence((1.0, 0.0), (0.5, 0.5)) - math.log(2)) < 1e-8
        clamped = 0.5 * math.log(0.5 / 1.0) + 0.5 * math.log(0.5 / 1e-10)
        assert abs(kl_divergence((0.5, 0.5), (1.0, 0.0)) - clamped) < 1e-8


def test_criterion_3_contrastive_matches_brute_force():
    with criterion(3, "CA equals exhaustive oracle", 30.0):
        rng = np.random.default_rng(303)
        for pool_index in range(100):
            m = int(rng.choice([1, 5, 10]))
            n = int(rng.integers(m + 2, 201))
            c = int(rng.integers(2, 7))
            ids = tuple(int(i) for i in rng.choice(100_000, size=n, replace=False))
            distributions = {i: rng.dirichlet(np.ones(c)) for i in ids}
            embeddings = {}
            for i in ids:
                size = int(rng.integers(2, 8))
                dims = sorted(rng.choice(30, size=size, replace=False).tolist())
                weights = tuple((rng.random(size) + 0.05).tolist())
                embeddings[i] = SparseVector(tuple(dims), weights)
            ctx = QueryContext(unlabeled=ids, distributions=distributions, embeddings=embeddings)
            got = contrastive_scores(ctx, CAConfig(num_neighbors=m))
            dense = {i: sparse_to_dict(v) for i, v in embeddings.items()}
            want = brute_contrastive(list(ids), distributions, dense, m)
            for i in ids:
                assert abs(got[i] - want[i]) < 1e-9, f"pool {pool_index}, instance {i}"


def test_criterion_4_gradient_check():
    with criterion(4, "analytic gradient vs finite differences", 10.0):
        rng = np.random.default_rng(404)
        step = 1e-5
        for _ in range(20):
            n = int(rng.integers(4, 12))
            v = int(rng.integers(2, 21))
            c = int(rng.integers(2, 5))
            vectors = []
            for _ in range(n):
                size = int(rng.integers(1, min(v, 5) + 1))
                dims = sorted(rng.choice(v, size=size, replace=False).tolist())
                vectors.append(
                    SparseVector(tuple(dims), tuple((rng.random(size) + 0.1).tolist()))
                )
            from alpool.features import to_csr

            x = to_csr(vectors, num_dims=v)
            labels = rng.integers(c, size=n)
            weights = rng.normal(scale=0.5, size=(c, v))
            bias = rng.normal(scale=0.5, size=c)
            l2 = float(rng.choice([0.0, 1e-3, 1e-2]))

            _, grad_w, grad_b = loss_and_gradient(weights, bias, x, labels, l2)
            flat_params = [("w", j, k) for j in range(c) for k in range(v)] + [
                ("b", j, None) for j in range(c)
            ]
            for kind, j, k in flat_params:
                w_up, b_up = weights.copy(), bias.copy()
                w_dn, b_dn = weights.copy(), bias.copy()
                if kind == "w":
                    w_up[j, k] += step
                    w_dn[j, k] -= step
                else:
                    b_up[j] += step
                    b_dn[j] -= step
                loss_up, _, _ = loss_and_gradient(w_up, b_up, x, labels, l2)
                loss_dn, _, _ = loss_and_gradient(w_dn, b_dn, x, labels, l2)
                numeric = (loss_up - loss_dn) / (2 * step)
                analytic = grad_w[j, k] if kind == "w" else grad_b[j]
                scale = max(abs(numeric), abs(analytic), 1e-8)
                assert abs(analytic - numeric) / scale < 1e-4


def test_criterion_5_protocol_shape():
    with criterion(5, "default protocol shape on 2000 instances", 60.0):
        train = make_synthetic_dataset(2000, seed=55, class_word_rate=0.8)
        test = make_synthetic_dataset(300, seed=56, class_word_rate=0.8)
        config = ExperimentConfig(strategy="bt", run_seed=5, dataset_name="protocol")
        assert config.seed_set_size == 25
        assert config.num_iterations == 20
        assert config.query_size == 25

        conservation_ok = []

        def on_iteration(record, pool):
            conservation_ok.append(
                len(pool.labeled) + len(pool.unlabeled) == 2000
                and not (set(pool.labeled) & set(pool.unlabeled))
                and len(pool.labeled) == record.num_labeled
            )

        result = run_experiment(
            config, train, test, make_simulated_oracle(train), on_iteration=on_iteration
        )
        assert len(result.records) == 21
        assert [r.num_labeled for r in result.records] == list(range(25, 526, 25))
        queried = [i for r in result.records for i in r.queried_ids]
        assert len(queried) == 525
        assert len(queried) == len(set(queried))
        assert all(conservation_ok)


def test_criterion_6_determinism(tmp_path):
    with criterion(6, "byte-identical reruns and session replay", 120.0):
        full = make_synthetic_dataset(360, seed=66)
        train, test = full.subset(range(300)), full.subset(range(300, 360))
        config = ExperimentConfig(
            seed_set_size=20,
            num_iterations=3,
            query_size=10,
            dataset_name="determinism",
            train=TrainConfig(max_epochs=30),
        )
        oracle = make_simulated_oracle(train)
        csv_a = results_csv(
            run_suite(config, ["bt", "rs"], [1, 2], train, test, oracle, clock=CountingClock())
        )
        csv_b = results_csv(
            run_suite(config, ["bt", "rs"], [1, 2], train, test, oracle, clock=CountingClock())
        )
        assert csv_a == csv_b  # byte-identical, timing included via injected clock

        # Wall-clock runs agree on everything but the timing column.
        real_a = results_csv(run_suite(config, ["bt"], [3], train, test, oracle))
        real_b = results_csv(run_suite(config, ["bt"], [3], train, test, oracle))
        strip = lambda text: [",".join(r.split(",")[:-1]) for r in text.splitlines()]
        assert strip(real_a) == strip(real_b)

        # A replayed label log reproduces the pool state exactly.
        session_config = ExperimentConfig(
            seed_set_size=15,
            num_iterations=2,
            query_size=10,
            run_seed=9,
            dataset_name="replay",
            train=TrainConfig(max_epochs=30),
        )
        session = create_session(session_config, train, test, tmp_path, session_id="acc6")
        while session.status != FINISHED:
            labels = [(i, train[i].gold_label) for i in session.pending_ids]
            submit_and_advance(session, session.batch_id, labels)
        replayed = load_session(tmp_path, "acc6")
        assert replayed.pool.snapshot() == session.pool.snapshot()
        assert replayed.status == FINISHED


def test_criterion_7_rs_uniformity():
    with criterion(7, "random sampling uniformity", 5.0):
        pool = tuple(range(100))
        counts = np.zeros(100, dtype=int)
        for draw in range(100_000):
            [picked] = random_batch(pool, 1, seed=draw)
            counts[picked] += 1
        assert counts.sum() == 100_000
        assert counts.min() >= 700, f"min frequency {counts.min()}"
        assert counts.max() <= 1300, f"max frequency {counts.max()}"


def test_criterion_8_auc_and_ranks():
    with criterion(8, "AUC and rank correctness", 5.0):
        constant = LearningCurve(tuple((25 + 25 * i, 0.642) for i in range(21)))
        assert auc(constant) == 0.642  # exact

        ramp = LearningCurve(((25, 0.0), (525, 1.0)))
        assert abs(auc(ramp) - 0.5) < 1e-12

        rng = np.random.default_rng(808)
        for _ in range(200):
            k = int(rng.integers(1, 9))
            values = {f"s{i}": float(rng.integers(0, 4)) / 4 for i in range(k)}
            ranks = fractional_ranks(values)
            assert abs(sum(ranks.values()) - k * (k + 1) / 2) < 1e-9

        mean, sd = mean_sd([0.7, 0.9])
        assert abs(mean - 0.8) < 1e-12
        assert abs(sd - 0.1 * math.sqrt(2)) < 1e-12
        assert mean_sd([0.85]) == (0.85, 0.0)


def _redundant_plus_rare_dataset(n: int, seed: int):
    """Separable binary mixture: 85% of documents come from a tiny 'easy'
    vocabulary (learnable from the seed set alone, so extra labels there are
    redundant), 15% from a 400-word-per-class 'hard' vocabulary that needs
    coverage. Uncertainty sampling concentrates its budget on the hard
    region; random sampling mostly redraws easy documents."""
    from alpool.corpus import Dataset, Instance, LabelSchema

    rng = np.random.default_rng(seed)
    instances = []
    for i in range(n):
        cls = int(rng.integers(2))
        if rng.random() < 0.85:
            words = [f"easy{cls}w{rng.integers(10)}" for _ in range(8)]
        else:
            words = [f"hard{cls}w{rng.integers(400)}" for _ in range(6)]
            words += [f"shared{rng.integers(60)}" for _ in range(2)]
            rng.shuffle(words)
        instances.append(Instance(i, " ".join(words), cls))
    return Dataset(LabelSchema(("c0", "c1")), tuple(instances))


def _bt_vs_rs_gap(seeds) -> tuple[float, float]:
    train = _redundant_plus_rare_dataset(2000, seed=99)
    test = _redundant_plus_rare_dataset(600, seed=98)
    config = ExperimentConfig(
        seed_set_size=25,
        num_iterations=10,
        query_size=25,
        dataset_name="ordering",
        train=TrainConfig(max_epochs=60, learning_rate=1.0, early_stop_accuracy=1.0),
    )
    results = run_suite(config, ["bt", "rs"], list(seeds), train, test, make_simulated_oracle(train))
    bt = [r.auc for r in results if r.config.strategy == "bt"]
    rs = [r.auc for r in results if r.config.strategy == "rs"]
    return float(np.mean(bt)), float(np.mean(rs))


def test_criterion_9_strategy_ordering():
    with criterion(9, "BT at least matches RS on separable data", 300.0):
        bt_auc, rs_auc = _bt_vs_rs_gap([0, 1, 2, 3, 4])
        if bt_auc < rs_auc - 0.01:
            # Statistical criterion: one rerun with fresh seeds before failing.
            bt_auc, rs_auc = _bt_vs_rs_gap([10, 11, 12, 13, 14])
        assert bt_auc >= rs_auc - 0.01, f"bt {bt_auc:.4f} vs rs {rs_auc:.4f}"


def test_criterion_10_query_time_ordering():
    with criterion(10, "CA queries cost more than RS", 120.0):
        train = make_synthetic_dataset(5000, seed=77)
        config = ExperimentConfig(
            seed_set_size=25,
            num_iterations=2,
            query_size=25,
            run_seed=3,
            dataset_name="telemetry",
            train=TrainConfig(max_epochs=20),
        )
        oracle = make_simulated_oracle(train)
        results = run_suite(config, ["ca", "rs"], [3], train, None, oracle)
        ca_result, rs_result = results
        for result in results:
            assert all(r.query_seconds >= 0.0 for r in result.records)
        mean_ca = np.mean([r.query_seconds for r in ca_result.records if r.iteration > 0])
        mean_rs = np.mean([r.query_seconds for r in rs_result.records if r.iteration > 0])
        assert mean_ca > mean_rs, f"ca {mean_ca:.4f}s vs rs {mean_rs:.6f}s"
