import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from fragile_interp.embeddings import EmbeddingTable, cosine, load_embeddings, sentence_embedding
from fragile_interp.errors import AllWordsOOV, DimensionMismatch, ParseError, UnknownWord
from fragile_interp.text import make_sentence

finite = st.floats(-100, 100, allow_nan=False)


def write(tmp_path, text):
    p = tmp_path / "emb.txt"
    p.write_text(text, encoding="utf-8")
    return p


class TestLoad:
    def test_basic(self, tmp_path):
        t = load_embeddings(write(tmp_path, "cat 1.0 0.0\ndog 0.0 1.0\n"))
        assert t.dim == 2 and len(t) == 2
        np.testing.assert_array_equal(t["dog"], [0.0, 1.0])

    def test_header_and_lowercase(self, tmp_path):
        t = load_embeddings(write(tmp_path, "2 3\nCat 1 2 3\ndog 4 5 6\n"))
        assert t.dim == 3 and "cat" in t and "Cat" not in t

    @pytest.mark.parametrize("text", [
        "cat 1.0 0.0\ndog 1.0\n",          # dimension mismatch
        "",                                # no entries
        "cat 1.0 0.0\ncat 0.0 1.0\n",      # duplicate
        "Cat 1.0 0.0\ncat 0.0 1.0\n",      # duplicate after lowercasing
        "cat x 0.0\n",                     # non numeric
        "3 2\ncat 1 0\ndog 0 1\n",         # header count disagrees
        "cat\n",                           # token only
    ])
    def test_parse_errors(self, tmp_path, text):
        with pytest.raises(ParseError):
            load_embeddings(write(tmp_path, text))

    def test_roundtrip(self, tmp_path):
        t = EmbeddingTable(["a", "b"], [[0.5, -1.25], [2.0, 0.0]])
        p = tmp_path / "out.txt"
        t.save(p, header=True)
        u = load_embeddings(p)
        assert u.tokens == t.tokens
        np.testing.assert_array_equal(u.matrix, t.matrix)


class TestCosine:
    @pytest.mark.parametrize("a,b,expected", [
        ((1, 0), (1, 0), 1.0), ((1, 0), (0, 1), 0.0), ((1, 0), (-1, 0), -1.0)])
    def test_examples(self, a, b, expected):
        assert cosine(a, b) == pytest.approx(expected)

    def test_zero_norm(self):
        assert cosine((0, 0), (1, 0)) == 0.0
        assert cosine((1e-13, 0), (1, 0)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine((1, 0), (1, 0, 0))

    @given(arrays(float, 5, elements=finite).filter(lambda v: np.linalg.norm(v) > 1e-6))
    def test_self_similarity(self, v):
        assert abs(cosine(v, v) - 1.0) <= 1e-9

    @given(arrays(float, 4, elements=finite), arrays(float, 4, elements=finite))
    def test_bounded_and_symmetric(self, a, b):
        c = cosine(a, b)
        assert -1.0 <= c <= 1.0
        assert c == pytest.approx(cosine(b, a), abs=1e-12)


def brute_force_neighbors(table, word, k):
    """Exhaustive cosine against every other entry, sorted (-sim, token)."""
    scored = [(t, cosine(table[word], table[t])) for t in table.tokens if t != word]
    scored.sort(key=lambda x: (-x[1], x[0]))
    return scored[:k]


class TestNeighbors:
    @pytest.fixture
    def small(self):
        return EmbeddingTable(["cat", "dog", "fish"], [[1.0, 0.2], [0.9, 0.5], [0.1, 1.0]])

    def test_three_words(self, small):
        got = small.nearest_neighbors("cat", 2)
        assert [t for t, _ in got] == [t for t, _ in brute_force_neighbors(small, "cat", 2)]
        assert [t for t, _ in got] == ["dog", "fish"]

    def test_k_clamped(self, small):
        assert len(small.nearest_neighbors("cat", 10)) == 2

    def test_unknown(self, small):
        with pytest.raises(UnknownWord):
            small.nearest_neighbors("cow", 2)

    def test_ties_lexicographic(self):
        t = EmbeddingTable(["q", "zeta", "alpha", "mid"], [[1, 0], [2, 0], [3, 0], [0, 1]])
        assert [w for w, _ in t.nearest_neighbors("q", 3)] == ["alpha", "zeta", "mid"]

    def test_matches_brute_force_on_fixture(self, bundle):
        table = bundle["table"]
        for word in table.tokens[::97]:
            got = table.nearest_neighbors(word, 50)
            want = brute_force_neighbors(table, word, 50)
            assert [w for w, _ in got] == [w for w, _ in want]
            np.testing.assert_allclose([s for _, s in got], [s for _, s in want], atol=1e-12)

    @given(st.integers(0, 10_000), st.integers(1, 12))
    def test_properties(self, seed, k):
        rng = np.random.default_rng(seed)
        t = EmbeddingTable([f"t{i}" for i in range(10)], rng.normal(size=(10, 3)))
        got = t.nearest_neighbors("t3", k)
        assert "t3" not in [w for w, _ in got]
        sims = [s for _, s in got]
        assert all(a >= b for a, b in itertools.pairwise(sims))
        assert len(got) == min(k, 9)


class TestSentenceEmbedding:
    @pytest.fixture
    def table(self):
        return EmbeddingTable(["cat", "dog"], [[1.0, 0.0], [0.0, 1.0]])

    def test_single(self, table):
        np.testing.assert_allclose(sentence_embedding(["cat"], table), [1, 0])

    def test_mean(self, table):
        np.testing.assert_allclose(sentence_embedding(["cat", "dog"], table), [0.5, 0.5])

    def test_oov_skipped(self, table):
        s = make_sentence(["cat", "zebra"])
        np.testing.assert_allclose(sentence_embedding(s, table), [1, 0])

    def test_all_oov(self, table):
        with pytest.raises(AllWordsOOV):
            sentence_embedding(["zebra"], table)

    @given(st.permutations(["cat", "dog", "cat", "dog", "dog"]))
    def test_order_invariant(self, perm):
        table = EmbeddingTable(["cat", "dog"], [[1.0, 0.3], [-0.2, 1.0]])
        np.testing.assert_allclose(sentence_embedding(perm, table),
                                   sentence_embedding(["cat", "dog", "cat", "dog", "dog"], table),
                                   atol=1e-12)


def test_table_invariants():
    with pytest.raises(ParseError):
        EmbeddingTable(["a", "a"], [[1.0], [2.0]])
    with pytest.raises(DimensionMismatch):
        EmbeddingTable(["a"], [[1.0], [2.0]])
    t = EmbeddingTable(["a"], [[1.0, 2.0]])
    with pytest.raises(ValueError):
        t.matrix[0, 0] = 3.0
    assert math.isclose(float(t["a"][1]), 2.0)
