"""Admissibility checks for a single word swap."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

from .embeddings import EmbeddingTable, cosine, sentence_embedding
from .errors import ConfigError, UnknownWord
from .model import Prediction, ToyClassifier
from .text import POS, Sentence, Word, load_pos_lexicon, load_stopwords

Encoder = Callable[[Sentence], object]


@dataclass(frozen=True)
class ConstraintConfig:
    min_word_cos: float = 0.5
    min_sentence_cos: float = 0.5
    stopwords: frozenset = field(default_factory=frozenset)
    enforce_pos: bool = True
    max_ratio: float = 0.5

    def __post_init__(self):
        for name in ("min_word_cos", "min_sentence_cos"):
            v = getattr(self, name)
            if not -1.0 <= v <= 1.0:
                raise ConfigError(f"{name}={v} outside [-1, 1]")
        if not 0.0 < self.max_ratio <= 1.0:
            raise ConfigError(f"max_ratio={self.max_ratio} outside (0, 1]")

    @classmethod
    def from_files(cls, stopword_path: str | Path, **kwargs) -> "ConstraintConfig":
        return cls(stopwords=load_stopwords(stopword_path), **kwargs)


def check_repeat(state, index: int) -> bool:
    return index not in state


def check_stopword(word: Word | str, stopwords) -> bool:
    surface = getattr(word, "surface", word)
    return surface not in stopwords


def check_word_similarity(orig: str, cand: str, table: EmbeddingTable,
                          min_word_cos: float) -> bool:
    if orig not in table:
        raise UnknownWord(orig)
    if cand not in table:
        raise UnknownWord(cand)
    return cosine(table[orig], table[cand]) >= min_word_cos


def check_pos(orig: Word | POS, cand_pos: POS) -> bool:
    return POS(getattr(orig, "pos", orig)) == POS(cand_pos)


def check_sentence_similarity(seed: Sentence, cand: Sentence, encoder: Encoder,
                              min_sentence_cos: float) -> bool:
    return cosine(encoder(seed), encoder(cand)) >= min_sentence_cos


def check_label_preserved(model: ToyClassifier, seed_pred: Prediction, cand: Sentence) -> bool:
    return model.predict(cand).label == seed_pred.label


CHECK_ORDER = ("repeat", "stopword", "pos", "word_similarity",
               "sentence_similarity", "label")


class Constraints:
    """The full conjunction, bound to a table, lexicon and config.

    ``encoder`` defaults to mean-of-word-vectors over ``table``; any callable
    mapping a Sentence to a vector can replace it.
    """

    def __init__(self, config: ConstraintConfig, table: EmbeddingTable,
                 lexicon: Mapping[str, POS] | None = None, encoder: Encoder | None = None):
        self.config = config
        self.table = table
        self.lexicon = dict(lexicon or {})
        self.encoder = encoder or (lambda s: sentence_embedding(s, table))

    @classmethod
    def from_files(cls, table, stopword_path, pos_path, **config_kwargs) -> "Constraints":
        return cls(ConstraintConfig.from_files(stopword_path, **config_kwargs), table,
                   load_pos_lexicon(pos_path))

    def pos_of(self, token: str) -> POS:
        return self.lexicon.get(token, POS.OTHER)

    def make_word(self, token: str) -> Word:
        return Word(token, self.pos_of(token), token in self.config.stopwords)

    def _checks(self, model, seed, seed_pred, state, index, orig, cand_sentence):
        cfg = self.config
        cand = cand_sentence.words[index]
        yield "repeat", lambda: check_repeat(state, index)
        yield "stopword", lambda: check_stopword(orig, cfg.stopwords)
        yield "pos", lambda: not cfg.enforce_pos or check_pos(orig, cand.pos)
        yield "word_similarity", lambda: (
            orig.surface in self.table and cand.surface in self.table
            and check_word_similarity(orig.surface, cand.surface, self.table, cfg.min_word_cos))
        yield "sentence_similarity", lambda: check_sentence_similarity(
            seed, cand_sentence, self.encoder, cfg.min_sentence_cos)
        yield "label", lambda: check_label_preserved(model, seed_pred, cand_sentence)

    def admissible(self, model, seed, seed_pred, state, index, orig, cand_sentence) -> bool:
        """Short-circuit conjunction in ``CHECK_ORDER``.

        ``orig`` is the word being replaced at ``index``; ``cand_sentence``
        is the working sentence with the swap applied.
        """
        return all(check() for _, check in
                   self._checks(model, seed, seed_pred, state, index, orig, cand_sentence))

    def violations(self, model, seed, seed_pred, state, index, orig, cand_sentence) -> list[str]:
        """Names of every failing check (no short-circuit), for post-hoc audits."""
        return [name for name, check in
                self._checks(model, seed, seed_pred, state, index, orig, cand_sentence)
                if not check()]
