import numpy as np
import pytest

from fragile_interp.constraints import (
    ConstraintConfig,
    Constraints,
    check_label_preserved,
    check_pos,
    check_repeat,
    check_sentence_similarity,
    check_stopword,
    check_word_similarity,
)
from fragile_interp.embeddings import EmbeddingTable, cosine, sentence_embedding
from fragile_interp.errors import ConfigError, UnknownWord
from fragile_interp.model import ToyClassifier
from fragile_interp.text import POS, Word, make_sentence


def test_repeat():
    assert check_repeat(set(), 3)
    assert not check_repeat({3}, 3)
    assert check_repeat({1, 2}, 0)


def test_stopword():
    stop = {"the", "a"}
    assert not check_stopword(Word("the"), stop)
    assert check_stopword("excellent", stop)


class TestWordSimilarity:
    @pytest.fixture
    def table(self):
        c = 0.5
        return EmbeddingTable(["x", "y", "z"], [[1, 0], [0, 1], [c, np.sqrt(1 - c * c)]])

    def test_identical(self, table):
        assert check_word_similarity("x", "x", table, 0.5)

    def test_orthogonal(self, table):
        assert not check_word_similarity("x", "y", table, 0.5)

    def test_inclusive_floor(self, table):
        floor = cosine(table["x"], table["z"])
        assert abs(floor - 0.5) < 1e-12
        assert check_word_similarity("x", "z", table, floor)

    def test_unknown(self, table):
        with pytest.raises(UnknownWord):
            check_word_similarity("x", "nope", table, 0.5)


@pytest.mark.parametrize("a,b,ok", [
    (POS.NOUN, POS.NOUN, True), (POS.NOUN, POS.VERB, False), (POS.OTHER, POS.NOUN, False),
    (POS.OTHER, POS.OTHER, True)])
def test_pos(a, b, ok):
    assert check_pos(Word("w", a), b) is ok


class TestSentenceSimilarity:
    @pytest.fixture
    def setup(self):
        # u and v sit at cosine 0.99
        theta = np.arccos(0.99)
        table = EmbeddingTable(["u", "v", "w", "q"], [
            [1, 0, 0], [np.cos(theta), np.sin(theta), 0], [0, 0, 1], [0.2, 0.3, 0.4]])
        enc = lambda s: sentence_embedding(s, table)
        return table, enc

    def test_same(self, setup):
        _, enc = setup
        s = make_sentence(["u", "w", "q"])
        assert check_sentence_similarity(s, s, enc, 0.5)

    def test_near_identical_swap(self, setup):
        table, enc = setup
        assert cosine(table["u"], table["v"]) == pytest.approx(0.99)
        s = make_sentence(["u", "w", "q"])
        t = make_sentence(["v", "w", "q"])
        assert cosine(enc(s), enc(t)) > 0.99
        assert check_sentence_similarity(s, t, enc, 0.5)

    def test_strict_threshold(self, setup):
        _, enc = setup
        s = make_sentence(["u", "w", "q"])
        t = make_sentence(["v", "w", "q"])
        assert check_sentence_similarity(s, s, enc, 1.0 - 1e-12)
        assert not check_sentence_similarity(s, t, enc, 1.0 - 1e-12)


class TestLabel:
    def test_same_sentence(self, bundle):
        s = bundle["corpus"][0]
        model = bundle["model"]
        assert check_label_preserved(model, model.predict(s), s)

    def test_constant_model(self, bundle):
        m = bundle["model"]
        flat = ToyClassifier(m.table, np.zeros_like(m.W), np.zeros(2), m.pad_vector)
        s = bundle["corpus"][0]
        other = make_sentence(m.table.tokens[100:105])
        assert check_label_preserved(flat, flat.predict(s), other)

    def test_found_label_flip(self, bundle):
        """Brute-force the vocabulary for a swap that flips the fixture model's label."""
        model, table = bundle["model"], bundle["table"]
        seed = min(bundle["corpus"], key=lambda s: len(s))
        pred = model.predict(seed)
        flip = None
        for i in range(len(seed)):
            for tok in table.tokens:
                cand = seed.substitute(i, Word(tok))
                if model.predict(cand).label != pred.label:
                    flip = cand
                    break
            if flip:
                break
        assert flip is not None
        assert not check_label_preserved(model, pred, flip)


class TestConjunction:
    def test_config_ranges(self):
        with pytest.raises(ConfigError):
            ConstraintConfig(min_word_cos=1.5)
        with pytest.raises(ConfigError):
            ConstraintConfig(max_ratio=0.0)

    def test_seed_itself_passes_all_but_repeat(self, bundle):
        cons, model = bundle["constraints"], bundle["model"]
        seed = next(s for s in bundle["corpus"] if any(not w.is_stopword for w in s.words))
        i = next(i for i, w in enumerate(seed.words) if not w.is_stopword)
        same = seed.substitute(i, seed.words[i])
        pred = model.predict(seed)
        assert cons.admissible(model, seed, pred, frozenset(), i, seed.words[i], same)
        assert cons.violations(model, seed, pred, frozenset({i}), i, seed.words[i], same) == ["repeat"]

    def test_short_circuit_order(self, bundle, monkeypatch):
        cons, model = bundle["constraints"], bundle["model"]
        seed = bundle["corpus"][0]
        i = next(i for i, w in enumerate(seed.words) if w.is_stopword)
        calls = []
        import fragile_interp.constraints as mod
        monkeypatch.setattr(mod, "check_label_preserved",
                            lambda *a: calls.append("label") or True)
        assert not cons.admissible(model, seed, model.predict(seed), frozenset(), i,
                                   seed.words[i], seed)
        assert calls == []

    def test_from_files(self, bundle, paths):
        c = Constraints.from_files(bundle["table"], paths["stopwords"], paths["pos"])
        assert "the" in c.config.stopwords
        assert c.pos_of("the") is POS.OTHER
        assert c.make_word("the").is_stopword
