from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alpool.features import (
    EMPTY_VECTOR,
    SparseVector,
    VectorizerConfig,
    cosine_similarity,
    fit_vectorizer,
    knn,
    nearest_neighbors,
    tokenize,
    vectorize,
)
from oracles import brute_knn, sparse_to_dict


def vec(*pairs) -> SparseVector:
    dims = tuple(d for d, _ in pairs)
    weights = tuple(float(w) for _, w in pairs)
    return SparseVector(dims, weights)


class TestVectorizer:
    def test_fit_hand_count(self):
        v = fit_vectorizer(["a b", "a"])
        assert set(v.vocabulary) == {"a", "b"}
        # df(a)=2, df(b)=1, N=2
        assert v.idf[v.vocabulary["a"]] == pytest.approx(math.log(3 / 3) + 1, abs=1e-12)
        assert v.idf[v.vocabulary["b"]] == pytest.approx(math.log(3 / 2) + 1, abs=1e-12)

    def test_idf_is_one_when_token_everywhere(self):
        v = fit_vectorizer(["tok x", "tok y", "tok z"])
        assert v.idf[v.vocabulary["tok"]] == pytest.approx(1.0, abs=1e-12)

    def test_all_empty_error(self):
        with pytest.raises(ValueError, match="empty"):
            fit_vectorizer(["", "   ", "!!!"])

    def test_min_df_filters(self):
        v = fit_vectorizer(["a b", "a c", "a d"], VectorizerConfig(min_df=2))
        assert set(v.vocabulary) == {"a"}

    def test_max_tokens_truncation(self):
        config = VectorizerConfig(max_tokens=2)
        assert tokenize("one two three", config) == ["one", "two"]
        v = fit_vectorizer(["one two three"], config)
        assert "three" not in v.vocabulary

    def test_vectorize_hand_weights(self):
        v = fit_vectorizer(["a a b", "a b"])  # idf == 1 for both tokens
        out = vectorize(v, "a a b")
        assert out.dims == (v.vocabulary["a"], v.vocabulary["b"])
        assert out.weights[0] == pytest.approx(2 / math.sqrt(5), abs=1e-9)
        assert out.weights[1] == pytest.approx(1 / math.sqrt(5), abs=1e-9)

    def test_oov_only_empty(self):
        v = fit_vectorizer(["a b"])
        assert vectorize(v, "zzz qqq") == EMPTY_VECTOR

    @given(st.lists(st.text(alphabet="abcdef ", min_size=1, max_size=30), min_size=1, max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_unit_norm(self, texts):
        try:
            v = fit_vectorizer(texts)
        except ValueError:
            return
        for text in texts:
            out = vectorize(v, text)
            if len(out):
                assert out.norm() == pytest.approx(1.0, abs=1e-9)

    def test_deterministic(self):
        v1 = fit_vectorizer(["x y", "y z"])
        v2 = fit_vectorizer(["x y", "y z"])
        assert v1.vocabulary == v2.vocabulary
        assert vectorize(v1, "x z") == vectorize(v2, "x z")


class TestCosine:
    def test_self_similarity(self):
        v = vec((0, 0.3), (4, 0.9))
        assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint_supports(self):
        assert cosine_similarity(vec((0, 1.0)), vec((1, 1.0))) == 0.0

    def test_hand_value(self):
        a = vec((0, 1.0))
        b = vec((0, 0.6), (1, 0.8))
        assert cosine_similarity(a, b) == pytest.approx(0.6, abs=1e-12)

    def test_empty_vector(self):
        assert cosine_similarity(EMPTY_VECTOR, vec((0, 1.0))) == 0.0


class TestKnn:
    def test_tie_break_smallest_indices(self):
        same = vec((0, 1.0))
        vectors = [same, same, same, same]
        assert knn(0, vectors, range(4), 2) == [1, 2]

    def test_orthogonal_except_one(self):
        vectors = [vec((0, 1.0)), vec((1, 1.0)), vec((2, 1.0)), vec((0, 0.5), (3, 0.5))]
        assert knn(0, vectors, range(4), 1) == [3]

    def test_too_few_candidates(self):
        vectors = [vec((0, 1.0)), vec((1, 1.0))]
        with pytest.raises(ValueError, match="candidates"):
            knn(0, vectors, range(2), 2)

    def test_excludes_query_no_duplicates(self):
        vectors = [vec((0, 1.0)) for _ in range(6)]
        out = knn(2, vectors, range(6), 4)
        assert 2 not in out
        assert len(set(out)) == 4

    @given(
        n=st.integers(min_value=3, max_value=40),
        m=st.integers(min_value=1, max_value=5),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force(self, n, m, seed):
        if m >= n:
            return
        rng = np.random.default_rng(seed)
        vectors = []
        for _ in range(n):
            dims = sorted(rng.choice(12, size=rng.integers(1, 5), replace=False).tolist())
            vectors.append(SparseVector(tuple(dims), tuple(rng.random(len(dims)).tolist())))
        dense = [sparse_to_dict(v) for v in vectors]
        query = int(rng.integers(n))
        assert knn(query, vectors, range(n), m) == brute_knn(query, dense, range(n), m)

    def test_brute_force_500(self):
        rng = np.random.default_rng(11)
        vectors = []
        for _ in range(500):
            dims = sorted(rng.choice(40, size=rng.integers(1, 8), replace=False).tolist())
            vectors.append(SparseVector(tuple(dims), tuple(rng.random(len(dims)).tolist())))
        dense = [sparse_to_dict(v) for v in vectors]
        for query in (0, 137, 499):
            assert knn(query, vectors, range(500), 7) == brute_knn(query, dense, range(500), 7)


class TestBulkNeighbors:
    @given(
        n=st.integers(min_value=4, max_value=60),
        m=st.integers(min_value=1, max_value=6),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    @settings(max_examples=40, deadline=None)
    def test_matches_per_query_knn(self, n, m, seed):
        # Supports of >= 2 dims with continuous weights: single-dim vectors
        # are parallel to each other, which creates mathematically tied
        # cosines that the two float paths may break differently by one ulp.
        if m >= n:
            return
        rng = np.random.default_rng(seed)
        vectors = []
        for _ in range(n):
            dims = sorted(rng.choice(15, size=rng.integers(2, 6), replace=False).tolist())
            vectors.append(SparseVector(tuple(dims), tuple(rng.random(len(dims)).tolist())))
        bulk = nearest_neighbors(vectors, m)
        for i in range(n):
            assert bulk[i] == knn(i, vectors, range(n), m)

    def test_identical_vectors_tie_break(self):
        same = vec((0, 1.0), (3, 2.0))
        bulk = nearest_neighbors([same] * 5, 2)
        assert bulk[0] == [1, 2]
        assert bulk[4] == [0, 1]

    def test_with_empty_vectors(self):
        vectors = [vec((0, 1.0)), EMPTY_VECTOR, vec((0, 2.0)), vec((1, 1.0))]
        bulk = nearest_neighbors(vectors, 2)
        for i in range(4):
            assert bulk[i] == knn(i, vectors, range(4), 2)
