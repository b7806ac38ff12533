"""Word-embedding table with brute-force cosine neighbours."""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import AllWordsOOV, DimensionMismatch, ParseError, UnknownWord

_NORM_EPS = 1e-12


def cosine(a, b) -> float:
    """Cosine similarity, 0.0 when either vector has (near) zero norm."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < _NORM_EPS or nb < _NORM_EPS:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


class EmbeddingTable:
    """Immutable token -> vector map.

    Vectors are stored row-wise in ``matrix``; ``tokens[i]`` names row ``i``.
    """

    def __init__(self, tokens: Sequence[str], matrix):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != len(tokens):
            raise DimensionMismatch("matrix must be (len(tokens), dim)")
        if matrix.shape[1] < 1:
            raise DimensionMismatch("dim must be positive")
        self.tokens = list(tokens)
        self.index = {}
        for i, tok in enumerate(self.tokens):
            if tok in self.index:
                raise ParseError(f"duplicate token {tok!r}")
            self.index[tok] = i
        matrix.setflags(write=False)
        self.matrix = matrix
        norms = np.linalg.norm(matrix, axis=1)
        safe = np.where(norms < _NORM_EPS, 1.0, norms)
        unit = matrix / safe[:, None]
        unit[norms < _NORM_EPS] = 0.0
        unit.setflags(write=False)
        self._unit = unit
        self._lex_rank = np.argsort(np.argsort(np.array(self.tokens, dtype=object)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, word):
        return word in self.index

    def __getitem__(self, word: str) -> np.ndarray:
        try:
            return self.matrix[self.index[word]]
        except KeyError:
            raise UnknownWord(word) from None

    def get(self, word, default=None):
        i = self.index.get(word)
        return default if i is None else self.matrix[i]

    def nearest_neighbors(self, word: str, k: int) -> list[tuple[str, float]]:
        """The ``k`` most cosine-similar tokens, excluding ``word`` itself.

        Ordered by similarity descending, ties by token ascending.
        """
        if k < 1:
            raise ValueError("k must be positive")
        if word not in self.index:
            raise UnknownWord(word)
        q = self.index[word]
        qn = np.linalg.norm(self.matrix[q])
        if qn < _NORM_EPS:
            sims = np.zeros(len(self.tokens))
        else:
            sims = self._unit @ (self.matrix[q] / qn)
        # full sort before truncation keeps ties deterministic
        order = np.lexsort((self._lex_rank, -sims))
        order = order[order != q][:k]
        return [(self.tokens[i], float(sims[i])) for i in order]

    def save(self, path: str | Path, header: bool = False):
        with open(path, "w", encoding="utf-8") as fh:
            if header:
                fh.write(f"{len(self)} {self.dim}\n")
            for tok, row in zip(self.tokens, self.matrix):
                fh.write(tok + " " + " ".join(f"{v:.6f}" for v in row) + "\n")


def _is_int(s: str) -> bool:
    try:
        int(s)
    except ValueError:
        return False
    return True


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Parse ``<token> <f1> ... <fD>`` lines, with an optional ``<count> <dim>`` header."""
    tokens: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    dim = None
    declared = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and _is_int(parts[0]) and _is_int(parts[1]):
                declared, dim = int(parts[0]), int(parts[1])
                if dim < 1:
                    raise ParseError(f"{path}:1: bad dimension {dim}")
                continue
            if len(parts) < 2:
                raise ParseError(f"{path}:{lineno}: no vector components")
            tok = parts[0].lower()
            try:
                vec = [float(x) for x in parts[1:]]
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-numeric component") from None
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ParseError(f"{path}:{lineno}: expected {dim} components, got {len(vec)}")
            if tok in seen:
                raise ParseError(f"{path}:{lineno}: duplicate token {tok!r}")
            seen.add(tok)
            tokens.append(tok)
            rows.append(vec)
    if not tokens:
        raise ParseError(f"{path}: no embedding entries")
    if declared is not None and declared != len(tokens):
        raise ParseError(f"{path}: header declares {declared} entries, found {len(tokens)}")
    return EmbeddingTable(tokens, np.array(rows))


def sentence_embedding(words, table: EmbeddingTable) -> np.ndarray:
    """Mean of in-vocabulary word vectors; OOV words are skipped.

    ``words`` may be a Sentence or any iterable of tokens.
    """
    tokens: Iterable[str] = getattr(words, "tokens", words)
    idx = [table.index[t] for t in tokens if t in table.index]
    if not idx:
        raise AllWordsOOV("no word of the sentence is in the embedding table")
    return table.matrix[idx].mean(axis=0)
