"""Labeling oracles: gold-label simulation and durable human sessions.

Simulated runs answer queries from gold labels. Human sessions present one
pending batch at a time, persist every accepted label to an append-only
JSONL log, and can be rebuilt from that log alone: replaying it against the
same config reproduces the pool state and the pending batch exactly. Human
sessions label the seed set too; gold labels are never assumed.

A session directory holds config.json (a full snapshot including the
datasets), labels.jsonl, and results.csv.
"""
from __future__ import annotations

import json
import secrets
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .classifier import evaluate
from .corpus import Dataset, Pool, dataset_from_dict, dataset_to_dict
from .loop import (
    ExperimentConfig,
    ExperimentResult,
    IterationRecord,
    choose_seed_set,
    derive_seed,
    make_backend,
    query_batch,
)
from .results import config_from_dict, config_to_dict, results_csv


class SessionError(Exception):
    pass


class StaleBatchError(SessionError):
    """The submitted batch id is not the pending one (and not a clean retry)."""


def simulated_label(dataset: Dataset, ids: Sequence[int]) -> list[int]:
    """Gold labels in id order; every id must carry one."""
    labels = []
    for i in ids:
        gold = dataset[i].gold_label
        if gold is None:
            raise ValueError(f"instance {i} has no gold label")
        labels.append(gold)
    return labels


def make_simulated_oracle(dataset: Dataset) -> Callable[[Sequence[int]], list[int]]:
    return lambda ids: simulated_label(dataset, ids)


AWAITING = "awaiting_labels"
TRAINING = "training"
FINISHED = "finished"


@dataclass
class Session:
    """State of one human-labeling run; mutated only via the functions below.

    Batch k's selection cost is measured when it is queried (during the
    previous training round) and carried in pending_query_seconds until the
    batch is applied and its iteration record is written.
    """

    session_id: str
    config: ExperimentConfig
    dataset: Dataset
    test: Dataset | None
    pool: Pool
    directory: Path
    status: str = AWAITING
    batch_id: int = 0
    pending_ids: list[int] = field(default_factory=list)
    pending_query_seconds: float = 0.0
    applied_ids: list[int] = field(default_factory=list)
    applied_query_seconds: float = 0.0
    records: list[IterationRecord] = field(default_factory=list)
    last_applied: tuple[int, dict[int, int]] | None = None

    @property
    def batches_applied(self) -> int:
        return (self.last_applied[0] + 1) if self.last_applied else 0

    def pending_batch(self) -> dict:
        return {
            "batch_id": self.batch_id,
            "instances": [
                {"id": i, "text": self.dataset[i].text} for i in self.pending_ids
            ],
            "class_names": list(self.dataset.schema.class_names),
        }

    def progress(self) -> dict:
        curve = []
        for record in self.records:
            point: dict = {"num_labeled": record.num_labeled}
            if record.test_accuracy == record.test_accuracy:  # accuracy is NaN without a test set
                point["accuracy"] = record.test_accuracy
            curve.append(point)
        return {
            "session_id": self.session_id,
            "iteration": len(self.records) - 1,
            "num_labeled": len(self.pool.labeled),
            "status": self.status,
            "curve": curve,
        }

    def to_result(self) -> ExperimentResult:
        return ExperimentResult(config=self.config, records=list(self.records))


def create_session(
    config: ExperimentConfig,
    train: Dataset,
    test: Dataset | None,
    store_dir: str | Path,
    session_id: str | None = None,
) -> Session:
    """Seed a new human-labeling session; the seed set is the first batch."""
    budget = config.seed_set_size + config.num_iterations * config.query_size
    if budget > len(train):
        raise ValueError(
            f"label budget {budget} exceeds training pool of {len(train)} instances"
        )
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    while True:
        candidate = session_id or secrets.token_hex(8)
        directory = store_dir / candidate
        if not directory.exists():
            break
        if session_id is not None:
            raise SessionError(f"session {session_id} already exists")
    directory.mkdir()

    pool = Pool(train)
    session = Session(
        session_id=candidate,
        config=config,
        dataset=train,
        test=test,
        pool=pool,
        directory=directory,
        pending_ids=choose_seed_set(config, pool),
    )
    snapshot = {
        "session_id": candidate,
        "experiment": config_to_dict(config),
        "dataset": dataset_to_dict(train),
        "test": dataset_to_dict(test) if test is not None else None,
    }
    (directory / "config.json").write_text(
        json.dumps(snapshot, indent=2) + "\n", encoding="utf-8"
    )
    return session


def submit_labels(
    session: Session, batch_id: int, labels: Sequence[tuple[int, int]]
) -> Session:
    """Validate and durably record a complete batch of labels.

    Re-submitting the already-applied batch with identical labels is a no-op
    success. On return the session is in the training state; call advance()
    to train and expose the next batch.
    """
    provided = dict(labels)
    if len(provided) != len(labels):
        raise SessionError("duplicate instance ids in submission")
    if session.last_applied is not None and batch_id == session.last_applied[0]:
        if provided == session.last_applied[1]:
            return session
        raise StaleBatchError(f"batch {batch_id} was already applied with different labels")
    if session.status != AWAITING:
        raise SessionError(f"session is {session.status}, not awaiting labels")
    if batch_id != session.batch_id:
        raise StaleBatchError(f"batch {batch_id} is not the pending batch {session.batch_id}")

    pending = set(session.pending_ids)
    missing = sorted(pending - set(provided))
    extra = sorted(set(provided) - pending)
    if missing or extra:
        raise SessionError(
            f"submission must cover exactly the pending batch; "
            f"missing ids {missing}, unexpected ids {extra}"
        )
    num_classes = session.dataset.schema.num_classes
    for i, y in provided.items():
        if not isinstance(y, int) or not 0 <= y < num_classes:
            raise SessionError(f"invalid class index {y!r} for instance {i}")

    now = time.time()
    lines = "".join(
        json.dumps(
            {"batch_id": batch_id, "instance_id": i, "label": provided[i], "timestamp": now}
        )
        + "\n"
        for i in session.pending_ids
    )
    with open(session.directory / "labels.jsonl", "a", encoding="utf-8") as log:
        log.write(lines)
        log.flush()

    session.pool.mark_labeled(session.pending_ids, [provided[i] for i in session.pending_ids])
    session.last_applied = (batch_id, provided)
    session.applied_ids = list(session.pending_ids)
    session.applied_query_seconds = session.pending_query_seconds
    session.pending_ids = []
    session.pending_query_seconds = 0.0
    session.status = TRAINING
    return session


def advance(session: Session, *, clock: Callable[[], float] = time.perf_counter) -> Session:
    """Train on everything labeled so far, then queue the next batch."""
    if session.status != TRAINING:
        raise SessionError(f"session is {session.status}, cannot train")
    config = session.config
    iteration = session.batches_applied - 1
    backend = make_backend(config)
    try:
        model = backend.fit(
            session.pool.labeled_examples(),
            session.dataset.schema,
            derive_seed(config.run_seed, "train", iteration),
        )
        accuracy = float("nan")
        if session.test is not None:
            accuracy, _ = evaluate(model, session.test)

        session.records.append(
            IterationRecord(
                iteration=iteration,
                num_labeled=len(session.pool.labeled),
                test_accuracy=accuracy,
                val_loss=backend.val_loss(model),
                query_seconds=session.applied_query_seconds,
                queried_ids=list(session.applied_ids),
            )
        )

        if iteration < config.num_iterations:
            started = clock()
            next_ids = query_batch(config, model, session.pool, iteration + 1)
            session.pending_query_seconds = clock() - started
        else:
            next_ids = []
    finally:
        backend.close()

    if next_ids:
        session.batch_id += 1
        session.pending_ids = list(next_ids)
        session.status = AWAITING
    else:
        session.status = FINISHED
    (session.directory / "results.csv").write_text(
        results_csv([session.to_result()]), encoding="utf-8"
    )
    return session


def submit_and_advance(
    session: Session,
    batch_id: int,
    labels: Sequence[tuple[int, int]],
    *,
    clock: Callable[[], float] = time.perf_counter,
) -> Session:
    before = session.batches_applied
    submit_labels(session, batch_id, labels)
    if session.status == TRAINING and session.batches_applied != before:
        advance(session, clock=clock)
    return session


def read_label_log(directory: Path) -> list[dict]:
    log_path = Path(directory) / "labels.jsonl"
    if not log_path.exists():
        return []
    entries = []
    for line in log_path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            entries.append(json.loads(line))
    return entries


def load_session(store_dir: str | Path, session_id: str) -> Session:
    """Rebuild a session by replaying its label log against a fresh pool.

    Training is deterministic given the config, so replay reconstructs the
    exact pool state, records, and pending batch. A trailing incomplete batch
    (a crash mid-append) is discarded; it was never acknowledged.
    """
    directory = Path(store_dir) / session_id
    config_path = directory / "config.json"
    if not config_path.exists():
        raise SessionError(f"no session {session_id} under {store_dir}")
    try:
        snapshot = json.loads(config_path.read_text(encoding="utf-8"))
        config = config_from_dict(snapshot["experiment"])
        train = dataset_from_dict(snapshot["dataset"])
        test = dataset_from_dict(snapshot["test"]) if snapshot.get("test") else None
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise SessionError(f"corrupt session {session_id}: {exc}") from exc

    pool = Pool(train)
    session = Session(
        session_id=session_id,
        config=config,
        dataset=train,
        test=test,
        pool=pool,
        directory=directory,
        pending_ids=choose_seed_set(config, pool),
    )

    by_batch: dict[int, list[dict]] = {}
    for entry in read_label_log(directory):
        by_batch.setdefault(int(entry["batch_id"]), []).append(entry)

    batch_id = 0
    while batch_id in by_batch:
        entries = by_batch[batch_id]
        labels = [(int(e["instance_id"]), int(e["label"])) for e in entries]
        if {i for i, _ in labels} != set(session.pending_ids):
            break  # trailing incomplete batch
        # Apply without re-logging: mirror submit_labels on the in-memory state.
        provided = dict(labels)
        session.pool.mark_labeled(
            session.pending_ids, [provided[i] for i in session.pending_ids]
        )
        session.last_applied = (batch_id, provided)
        session.applied_ids = list(session.pending_ids)
        session.applied_query_seconds = session.pending_query_seconds
        session.pending_ids = []
        session.pending_query_seconds = 0.0
        session.status = TRAINING
        advance(session)
        batch_id += 1
    return session


def list_sessions(store_dir: str | Path) -> list[str]:
    store = Path(store_dir)
    if not store.exists():
        return []
    return sorted(p.name for p in store.iterdir() if (p / "config.json").exists())
