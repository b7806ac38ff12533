"""Tokenization, sentence containers and subword score merging."""
from __future__ import annotations

import enum
import string
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EmptyGroup, EmptyInput, ParseError

CONTINUATION_MARKER = "##"
_EDGE_PUNCT = string.punctuation


class POS(str, enum.Enum):
    NOUN = "NOUN"
    VERB = "VERB"
    ADJ = "ADJ"
    ADV = "ADV"
    OTHER = "OTHER"


@dataclass(frozen=True)
class Word:
    surface: str
    pos: POS = POS.OTHER
    is_stopword: bool = False
    perturbed: bool = False

    def __post_init__(self):
        if not self.surface or any(c.isspace() for c in self.surface):
            raise ValueError(f"invalid word surface {self.surface!r}")


@dataclass(frozen=True)
class Sentence:
    words: tuple[Word, ...]
    label: int = 0

    def __post_init__(self):
        if self.label < 0:
            raise ValueError("label must be >= 0")

    def __len__(self):
        return len(self.words)

    @property
    def tokens(self) -> list[str]:
        return [w.surface for w in self.words]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def substitute(self, index: int, word: Word) -> "Sentence":
        """Return a copy with ``words[index]`` replaced and flagged as perturbed."""
        words = list(self.words)
        words[index] = replace(word, perturbed=True)
        return Sentence(tuple(words), self.label)


@dataclass(frozen=True)
class SubwordPiece:
    text: str
    is_continuation: bool = False
    score: float = 0.0

    @property
    def stem(self) -> str:
        if self.is_continuation and self.text.startswith(CONTINUATION_MARKER):
            return self.text[len(CONTINUATION_MARKER):]
        return self.text


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace and strip edge punctuation.

    Internal apostrophes and hyphens survive (``"don't"`` stays one token).
    """
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(_EDGE_PUNCT)
        if tok:
            tokens.append(tok)
    if not tokens:
        raise EmptyInput(f"no words in {text!r}")
    return tokens


def make_sentence(
    tokens: Sequence[str],
    label: int = 0,
    lexicon: Mapping[str, POS] | None = None,
    stopwords: Iterable[str] = (),
) -> Sentence:
    lexicon = lexicon or {}
    stop = set(stopwords)
    words = tuple(
        Word(t, lexicon.get(t, POS.OTHER), t in stop) for t in tokens
    )
    return Sentence(words, label)


def split_subwords(word: str, vocab: set[str] | frozenset[str]) -> list[SubwordPiece]:
    """Greedy longest-prefix segmentation of ``word`` against ``vocab``.

    Positions no vocab entry can start fall back to a single character.
    """
    if not vocab:
        raise ValueError("vocab must be non-empty")
    if word in vocab:
        return [SubwordPiece(word)]
    pieces: list[SubwordPiece] = []
    i = 0
    while i < len(word):
        end = i + 1
        for j in range(len(word), i, -1):
            if word[i:j] in vocab:
                end = j
                break
        chunk = word[i:end]
        if pieces:
            pieces.append(SubwordPiece(CONTINUATION_MARKER + chunk, True))
        else:
            pieces.append(SubwordPiece(chunk, False))
        i = end
    return pieces


def join_pieces(pieces: Sequence[SubwordPiece]) -> str:
    return "".join(p.stem for p in pieces)


def group_pieces(pieces: Sequence[SubwordPiece]) -> list[list[SubwordPiece]]:
    if not pieces:
        raise EmptyGroup("no pieces to group")
    if pieces[0].is_continuation:
        raise EmptyGroup("continuation piece cannot start a word group")
    groups: list[list[SubwordPiece]] = []
    for p in pieces:
        if p.is_continuation:
            groups[-1].append(p)
        else:
            groups.append([p])
    return groups


def merge_group(scores: Sequence[float], mode: str = "abs_max") -> float:
    if len(scores) == 0:
        raise EmptyGroup("group has zero pieces")
    if mode == "abs_max":
        # first occurrence wins on |x| ties
        best = scores[0]
        for s in scores[1:]:
            if abs(s) > abs(best):
                best = s
        return float(best)
    if mode == "average":
        return float(sum(scores) / len(scores))
    raise ValueError(f"unknown merge mode {mode!r}")


def merge_scores(pieces: Sequence[SubwordPiece], mode: str = "abs_max") -> list[float]:
    """Collapse per-piece attributions into one score per word group."""
    return [merge_group([p.score for p in g], mode) for g in group_pieces(pieces)]


def _read_lines(path):
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if line and not line.startswith("#"):
                    yield lineno, line
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8") from exc


def load_stopwords(path: str | Path) -> frozenset[str]:
    return frozenset(line.lower() for _, line in _read_lines(path))


def load_pos_lexicon(path: str | Path) -> dict[str, POS]:
    lexicon: dict[str, POS] = {}
    for lineno, line in _read_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected '<token> <TAG>'")
        try:
            lexicon[parts[0].lower()] = POS(parts[1].upper())
        except ValueError:
            raise ParseError(f"{path}:{lineno}: unknown tag {parts[1]!r}") from None
    return lexicon
