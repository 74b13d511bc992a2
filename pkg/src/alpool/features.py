"""Sparse text featurization and cosine nearest-neighbor search.

A stand-in representation for neighborhood queries: lowercased alphanumeric
tokens, TF-IDF weighting with smoothed IDF, L2-normalized vectors. Any model
can supply its own vectors instead; this module only fixes the geometry.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_TOKEN_RE_CASED = re.compile(r"[A-Za-z0-9]+")


@dataclass(frozen=True)
class VectorizerConfig:
    lowercase: bool = True
    max_tokens: int = 60
    min_df: int = 1


@dataclass(frozen=True)
class SparseVector:
    """Sorted (dimension, weight) pairs; no explicit zeros."""

    dims: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.dims) != len(self.weights):
            raise ValueError("dims and weights length mismatch")
        if any(b <= a for a, b in zip(self.dims, self.dims[1:])):
            raise ValueError("dims must be strictly increasing")
        if any(not np.isfinite(w) or w == 0.0 for w in self.weights):
            raise ValueError("weights must be finite and nonzero")

    def __len__(self) -> int:
        return len(self.dims)

    def norm(self) -> float:
        return float(np.sqrt(sum(w * w for w in self.weights)))

    def dot(self, other: "SparseVector") -> float:
        # Merge join over sorted dims; accumulation in ascending-dim order.
        total = 0.0
        i = j = 0
        a_dims, a_w = self.dims, self.weights
        b_dims, b_w = other.dims, other.weights
        while i < len(a_dims) and j < len(b_dims):
            da, db = a_dims[i], b_dims[j]
            if da == db:
                total += a_w[i] * b_w[j]
                i += 1
                j += 1
            elif da < db:
                i += 1
            else:
                j += 1
        return total


EMPTY_VECTOR = SparseVector((), ())


def tokenize(text: str, config: VectorizerConfig) -> list[str]:
    if config.lowercase:
        tokens = _TOKEN_RE.findall(text.lower())
    else:
        tokens = _TOKEN_RE_CASED.findall(text)
    return tokens[: config.max_tokens]


@dataclass(frozen=True)
class Vectorizer:
    vocabulary: dict[str, int]
    idf: np.ndarray
    config: VectorizerConfig


def fit_vectorizer(texts: Sequence[str], config: VectorizerConfig | None = None) -> Vectorizer:
    """Build a vocabulary and smoothed IDF weights: idf = ln((1+N)/(1+df)) + 1."""
    config = config or VectorizerConfig()
    doc_freq: dict[str, int] = {}
    n_docs = 0
    any_tokens = False
    for text in texts:
        tokens = tokenize(text, config)
        n_docs += 1
        if tokens:
            any_tokens = True
        for token in set(tokens):
            doc_freq[token] = doc_freq.get(token, 0) + 1
    if not any_tokens:
        raise ValueError("all texts are empty after tokenization")

    kept = sorted(t for t, df in doc_freq.items() if df >= config.min_df)
    vocabulary = {token: dim for dim, token in enumerate(kept)}
    idf = np.array(
        [np.log((1.0 + n_docs) / (1.0 + doc_freq[t])) + 1.0 for t in kept], dtype=float
    )
    return Vectorizer(vocabulary=vocabulary, idf=idf, config=config)


def vectorize(vectorizer: Vectorizer, text: str) -> SparseVector:
    """TF-IDF weights, L2-normalized; out-of-vocabulary tokens are ignored."""
    counts: dict[int, int] = {}
    for token in tokenize(text, vectorizer.config):
        dim = vectorizer.vocabulary.get(token)
        if dim is not None:
            counts[dim] = counts.get(dim, 0) + 1
    if not counts:
        return EMPTY_VECTOR
    dims = sorted(counts)
    weights = np.array([counts[d] * vectorizer.idf[d] for d in dims], dtype=float)
    weights /= np.sqrt(np.sum(weights * weights))
    return SparseVector(tuple(dims), tuple(float(w) for w in weights))


def cosine_similarity(a: SparseVector, b: SparseVector) -> float:
    if len(a) == 0 or len(b) == 0:
        return 0.0
    return a.dot(b) / (a.norm() * b.norm())


def knn(
    query_index: int,
    vectors: Sequence[SparseVector],
    candidate_indices: Iterable[int],
    m: int,
) -> list[int]:
    """The m candidates most cosine-similar to the query, best first.

    The query itself is excluded; ties break by ascending index.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    candidates = [i for i in candidate_indices if i != query_index]
    if len(candidates) < m:
        raise ValueError(f"need at least {m} candidates, have {len(candidates)}")
    query = vectors[query_index]
    scored = [(-cosine_similarity(query, vectors[i]), i) for i in candidates]
    scored.sort()
    return [i for _, i in scored[:m]]


def to_csr(vectors: Sequence[SparseVector], num_dims: int | None = None) -> sparse.csr_matrix:
    if num_dims is None:
        num_dims = max((v.dims[-1] + 1 for v in vectors if len(v)), default=0)
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for v in vectors:
        indices.extend(v.dims)
        data.extend(v.weights)
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.array(data, dtype=float), np.array(indices, dtype=np.int32), np.array(indptr)),
        shape=(len(vectors), num_dims),
    )


def nearest_neighbors(
    vectors: Sequence[SparseVector], m: int, chunk: int = 256
) -> list[list[int]]:
    """All-pairs top-m cosine neighbors within one set; bulk variant of knn.

    Equivalent to knn(i, vectors, range(n), m) for every i, computed with
    chunked sparse matrix products so 5000-instance pools stay fast.
    """
    n = len(vectors)
    if n < m + 1:
        raise ValueError(f"need at least {m + 1} vectors, have {n}")
    matrix = to_csr(vectors)
    norms = np.asarray(np.sqrt(matrix.multiply(matrix).sum(axis=1))).ravel()
    inverse = np.where(norms > 0, 1.0 / np.where(norms > 0, norms, 1.0), 0.0)
    normalized = sparse.diags(inverse) @ matrix

    result: list[list[int]] = []
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        sims = (normalized @ normalized[start:stop].T).toarray()  # (n, stop-start)
        sims[np.arange(start, stop), np.arange(stop - start)] = -np.inf
        for col in range(stop - start):
            column = sims[:, col]
            # The m-th best similarity bounds the candidate set; everything at
            # or above it competes, so boundary ties still break by index.
            threshold = np.partition(column, n - m)[n - m]
            top = np.flatnonzero(column >= threshold)
            order = np.lexsort((top, -column[top]))
            result.append([int(i) for i in top[order][:m]])
    return result
