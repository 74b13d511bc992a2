"""Adapter for out-of-process classifiers speaking line-delimited JSON.

Any executable honoring the protocol can replace the built-in model, which
keeps heavyweight backends (fine-tuned transformers, GPU jobs) out of this
package. One request per line on stdin, one response per line on stdout:

  {"op": "fit", "examples": [{"text": ..., "label": int}, ...],
   "num_classes": c, "seed": s}                -> {"ok": true, ...}
  {"op": "predict_proba", "texts": [...]}      -> {"ok": true, "probs": [[...], ...]}
  {"op": "embed", "texts": [...]}              -> {"ok": true, "vectors": [[...], ...]}

Embed responses carry dense rows; zeros are dropped on conversion. Any
{"ok": false, "error": ...} response aborts the run with a diagnostic.
"""
from __future__ import annotations

import json
import shlex
import subprocess
from typing import Sequence

import numpy as np

from .corpus import Instance, LabelSchema
from .features import EMPTY_VECTOR, SparseVector

DISTRIBUTION_TOLERANCE = 1e-6


class ExternalClassifierError(Exception):
    pass


class ExternalClassifier:
    """Child-process classifier handle; also serves as the trained model."""

    def __init__(self, command: str | Sequence[str]):
        if isinstance(command, str):
            command = shlex.split(command)
        self.command = list(command)
        self._process: subprocess.Popen | None = None
        self.schema: LabelSchema | None = None
        self.telemetry_val_loss = float("nan")

    def _ensure_process(self) -> subprocess.Popen:
        if self._process is None or self._process.poll() is not None:
            try:
                self._process = subprocess.Popen(
                    self.command,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise ExternalClassifierError(
                    f"cannot start external classifier {self.command!r}: {exc}"
                ) from exc
        return self._process

    def _call(self, request: dict) -> dict:
        process = self._ensure_process()
        assert process.stdin is not None and process.stdout is not None
        try:
            process.stdin.write(json.dumps(request) + "\n")
            process.stdin.flush()
            line = process.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise ExternalClassifierError(f"external classifier pipe failed: {exc}") from exc
        if not line:
            raise ExternalClassifierError(
                f"external classifier {self.command!r} closed its output "
                f"(exit code {process.poll()})"
            )
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ExternalClassifierError(
                f"external classifier sent invalid JSON: {line!r}"
            ) from exc
        if not isinstance(response, dict) or not response.get("ok", False):
            detail = response.get("error", "no error detail") if isinstance(response, dict) else response
            raise ExternalClassifierError(f"external classifier error: {detail}")
        return response

    def fit(
        self, examples: Sequence[tuple[Instance, int]], schema: LabelSchema, seed: int
    ) -> "ExternalClassifier":
        self.schema = schema
        response = self._call(
            {
                "op": "fit",
                "examples": [{"text": inst.text, "label": label} for inst, label in examples],
                "num_classes": schema.num_classes,
                "seed": seed,
            }
        )
        self.telemetry_val_loss = float(response.get("val_loss", float("nan")))
        return self

    def predict_proba(self, instances: Sequence[Instance]) -> np.ndarray:
        if self.schema is None:
            raise ExternalClassifierError("predict_proba before fit")
        if not instances:
            return np.zeros((0, self.schema.num_classes))
        response = self._call(
            {"op": "predict_proba", "texts": [inst.text for inst in instances]}
        )
        probs = np.asarray(response.get("probs"), dtype=float)
        expected = (len(instances), self.schema.num_classes)
        if probs.shape != expected:
            raise ExternalClassifierError(
                f"probs shape {probs.shape} does not match {expected}"
            )
        if (probs < -DISTRIBUTION_TOLERANCE).any() or (
            np.abs(probs.sum(axis=1) - 1.0) > DISTRIBUTION_TOLERANCE
        ).any():
            raise ExternalClassifierError("probs rows are not valid class distributions")
        return np.clip(probs, 0.0, None)

    def embed(self, instance: Instance) -> SparseVector:
        response = self._call({"op": "embed", "texts": [instance.text]})
        vectors = response.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != 1:
            raise ExternalClassifierError("embed response must carry one vector")
        row = vectors[0]
        dims = [d for d, w in enumerate(row) if w != 0.0]
        if not dims:
            return EMPTY_VECTOR
        return SparseVector(tuple(dims), tuple(float(row[d]) for d in dims))

    def close(self) -> None:
        if self._process is not None and self._process.poll() is None:
            try:
                assert self._process.stdin is not None
                self._process.stdin.close()
                self._process.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                self._process.kill()
        self._process = None

    def __enter__(self) -> "ExternalClassifier":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
