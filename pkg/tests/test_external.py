from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

from alpool.classifier import TrainConfig
from alpool.corpus import Instance, LabelSchema
from alpool.external import ExternalClassifier, ExternalClassifierError
from alpool.loop import ExperimentConfig, run_experiment
from alpool.oracle import make_simulated_oracle
from alpool.synthetic import make_synthetic_dataset

STUB = str(Path(__file__).parent / "external_stub.py")


def stub_command(*flags: str) -> str:
    return " ".join([sys.executable, STUB, *flags])


@pytest.fixture
def schema():
    return LabelSchema(("a", "b"))


class TestAdapter:
    def test_fit_predict_roundtrip(self, schema):
        examples = [
            (Instance(0, "alpha alpha", 0), 0),
            (Instance(1, "beta beta", 1), 1),
        ]
        with ExternalClassifier(stub_command()) as model:
            model.fit(examples, schema, seed=0)
            probs = model.predict_proba([Instance(2, "alpha", None), Instance(3, "beta", None)])
            assert probs.shape == (2, 2)
            assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)
            assert probs[0, 0] > probs[0, 1]
            assert probs[1, 1] > probs[1, 0]
            assert model.telemetry_val_loss == 0.25

    def test_embed_drops_zeros(self, schema):
        with ExternalClassifier(stub_command()) as model:
            model.fit([(Instance(0, "x", 0), 0), (Instance(1, "y", 1), 1)], schema, seed=0)
            vector = model.embed(Instance(2, "x x y", None))
            assert len(vector) >= 1
            assert all(w != 0.0 for w in vector.weights)
            assert list(vector.dims) == sorted(vector.dims)

    def test_error_response_aborts(self, schema):
        with ExternalClassifier(stub_command("--fail-fit")) as model:
            with pytest.raises(ExternalClassifierError, match="asked to fail"):
                model.fit([(Instance(0, "x", 0), 0), (Instance(1, "y", 1), 1)], schema, seed=0)

    def test_missing_command(self, schema):
        model = ExternalClassifier("/does/not/exist-binary")
        with pytest.raises(ExternalClassifierError, match="cannot start"):
            model.fit([(Instance(0, "x", 0), 0)], schema, seed=0)

    def test_predict_before_fit(self):
        model = ExternalClassifier(stub_command())
        with pytest.raises(ExternalClassifierError, match="before fit"):
            model.predict_proba([Instance(0, "x", None)])


class TestExternalRun:
    def test_full_experiment_with_external_backend(self):
        full = make_synthetic_dataset(200, seed=3)
        train, test = full.subset(range(160)), full.subset(range(160, 200))
        config = ExperimentConfig(
            strategy="bt",
            classifier_kind="external",
            external_command=stub_command(),
            seed_set_size=10,
            num_iterations=2,
            query_size=5,
            run_seed=4,
            dataset_name="external-unit",
            train=TrainConfig(max_epochs=5),
        )
        result = run_experiment(config, train, test, make_simulated_oracle(train))
        assert len(result.records) == 3
        assert [r.num_labeled for r in result.records] == [10, 15, 20]
        assert all(r.val_loss == 0.25 for r in result.records)
        queried = [i for r in result.records for i in r.queried_ids]
        assert len(queried) == len(set(queried))

    def test_external_ca_strategy(self):
        full = make_synthetic_dataset(120, seed=6)
        train, test = full.subset(range(100)), full.subset(range(100, 120))
        config = ExperimentConfig(
            strategy="ca",
            classifier_kind="external",
            external_command=stub_command(),
            seed_set_size=10,
            num_iterations=1,
            query_size=5,
            run_seed=2,
            dataset_name="external-ca",
        )
        result = run_experiment(config, train, test, make_simulated_oracle(train))
        assert len(result.records) == 2
