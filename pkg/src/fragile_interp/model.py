"""Frozen-embedding, mean-pooled linear softmax classifier.

Stands in for a transformer victim: it exposes a forward pass over a list of
word vectors and the exact gradient of any logit with respect to them.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingTable, load_embeddings
from .errors import ClassOutOfRange, EmptyCorpus, EmptySentence, ParseError
from .text import Sentence


@dataclass(frozen=True)
class Prediction:
    probs: np.ndarray
    label: int
    logits: np.ndarray

    @property
    def confidence(self) -> float:
        return float(self.probs[self.label])


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class ToyClassifier:
    table: EmbeddingTable
    W: np.ndarray
    b: np.ndarray
    pad_vector: np.ndarray
    table_path: str | None = None

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        b = np.asarray(self.b, dtype=float)
        pad = np.asarray(self.pad_vector, dtype=float)
        if W.ndim != 2 or W.shape[0] < 2:
            raise ValueError("W must be (num_classes >= 2, dim)")
        if W.shape[1] != self.table.dim or pad.shape != (self.table.dim,):
            raise ValueError("W and pad_vector must match the embedding dimension")
        if b.shape != (W.shape[0],):
            raise ValueError("b must have one entry per class")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "pad_vector", pad)

    @property
    def num_classes(self) -> int:
        return self.W.shape[0]

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    def predict(self, sentence: Sentence) -> Prediction:
        return forward(self, embed_sentence(self, sentence))


def init_classifier(table: EmbeddingTable, num_classes: int, seed: int = 0,
                    pad_vector=None, scale: float = 0.01, table_path=None) -> ToyClassifier:
    if num_classes < 2:
        raise ValueError("num_classes must be >= 2")
    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, scale, size=(num_classes, table.dim))
    pad = np.zeros(table.dim) if pad_vector is None else pad_vector
    return ToyClassifier(table, W, np.zeros(num_classes), pad, table_path)


def _prediction_from_logits(logits) -> Prediction:
    logits = np.asarray(logits, dtype=float)
    probs = softmax(logits)
    return Prediction(probs, int(np.argmax(probs)), logits)


def forward(model: ToyClassifier, embeddings) -> Prediction:
    E = np.asarray(embeddings, dtype=float)
    if E.size == 0:
        raise EmptySentence("cannot classify an empty sentence")
    if E.ndim != 2 or E.shape[1] != model.dim:
        raise ValueError(f"expected (n, {model.dim}) embeddings, got {E.shape}")
    return _prediction_from_logits(model.W @ E.mean(axis=0) + model.b)


def embed_sentence(model: ToyClassifier, sentence) -> np.ndarray:
    """Stack per-word vectors; OOV words take the pad vector."""
    tokens = [getattr(t, "surface", t) for t in getattr(sentence, "tokens", sentence)]
    if len(tokens) == 0:
        return np.zeros((0, model.dim))
    return np.stack([model.table.get(t, model.pad_vector) for t in tokens])


def grad_logit_wrt_embeddings(model: ToyClassifier, embeddings, cls: int) -> np.ndarray:
    """d logit_cls / d e_t for every position t; equals W[cls] / n everywhere."""
    if not 0 <= cls < model.num_classes:
        raise ClassOutOfRange(cls)
    E = np.asarray(embeddings, dtype=float)
    n = E.shape[0]
    if n == 0:
        raise EmptySentence("cannot differentiate an empty sentence")
    return np.tile(model.W[cls] / n, (n, 1))


def masked_logits(model: ToyClassifier, embeddings, masks) -> np.ndarray:
    """Logits for many word-deletion masks at once.

    Rows of ``masks`` select kept words; an all-zero row falls back to the
    pad vector alone.
    """
    E = np.asarray(embeddings, dtype=float)
    M = np.asarray(masks, dtype=float)
    proj = E @ model.W.T                      # (n, C)
    counts = M.sum(axis=1)
    pooled = M @ proj
    pad_logit = model.W @ model.pad_vector
    safe = np.where(counts > 0, counts, 1.0)
    out = pooled / safe[:, None]
    out[counts == 0] = pad_logit
    return out + model.b


def _features(model, corpus) -> tuple[np.ndarray, np.ndarray]:
    X = np.stack([embed_sentence(model, s).mean(axis=0) for s in corpus])
    y = np.array([s.label for s in corpus])
    return X, y


def cross_entropy(model: ToyClassifier, corpus: Sequence[Sentence]) -> float:
    X, y = _features(model, corpus)
    P = softmax(X @ model.W.T + model.b)
    return float(-np.mean(np.log(P[np.arange(len(y)), y] + 1e-300)))


def train(model: ToyClassifier, corpus: Sequence[Sentence], epochs: int,
          learning_rate: float, history: list | None = None) -> ToyClassifier:
    """Full-batch gradient descent on cross-entropy over W and b.

    Embeddings stay frozen. Appends the pre-step loss of every epoch to
    ``history`` when given.
    """
    if not corpus:
        raise EmptyCorpus("training corpus is empty")
    X, y = _features(model, corpus)
    if y.max() >= model.num_classes:
        raise ClassOutOfRange(int(y.max()))
    W = model.W.copy()
    b = model.b.copy()
    Y = np.eye(model.num_classes)[y]
    n = len(y)
    for _ in range(epochs):
        P = softmax(X @ W.T + b)
        if history is not None:
            history.append(float(-np.mean(np.log(P[np.arange(n), y] + 1e-300))))
        G = (P - Y) / n
        W -= learning_rate * (G.T @ X)
        b -= learning_rate * G.sum(axis=0)
    return replace(model, W=W, b=b)


def fit_classifier(table, corpus, num_classes, epochs, learning_rate, seed=0,
                   table_path=None) -> ToyClassifier:
    model = init_classifier(table, num_classes, seed, table_path=table_path)
    return train(model, corpus, epochs, learning_rate)


def accuracy(model: ToyClassifier, corpus: Sequence[Sentence]) -> float:
    return float(np.mean([model.predict(s).label == s.label for s in corpus]))


def save_checkpoint(model: ToyClassifier, path: str | Path, table_path: str | None = None):
    path = Path(path)
    table_path = table_path or model.table_path
    if table_path is not None:
        # store relative to the checkpoint so fixture bundles stay relocatable
        try:
            table_path = os.path.relpath(Path(table_path).resolve(), path.resolve().parent)
        except ValueError:
            table_path = str(table_path)
    payload = {
        "dim": model.dim,
        "num_classes": model.num_classes,
        "W": model.W.ravel().tolist(),
        "b": model.b.tolist(),
        "pad_vector": model.pad_vector.tolist(),
        "embeddings_path": table_path,
    }
    path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def load_checkpoint(path: str | Path, table: EmbeddingTable | None = None) -> ToyClassifier:
    """Load a JSON checkpoint, resolving its embedding table unless one is given."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        dim, C = int(data["dim"]), int(data["num_classes"])
        W = np.asarray(data["W"], dtype=float)
        b = np.asarray(data["b"], dtype=float)
        pad = np.asarray(data["pad_vector"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed checkpoint ({exc})") from exc
    if W.size != C * dim or b.shape != (C,) or pad.shape != (dim,):
        raise ParseError(f"{path}: checkpoint shapes disagree with dim={dim}, num_classes={C}")
    table_path = data.get("embeddings_path")
    if table_path is not None:
        table_path = str((path.parent / table_path))
    if table is None:
        if table_path is None:
            raise ParseError(f"{path}: checkpoint names no embedding table")
        table = load_embeddings(table_path)
    if table.dim != dim:
        raise ParseError(f"{path}: table dim {table.dim} != checkpoint dim {dim}")
    return ToyClassifier(table, W.reshape(C, dim), b, pad, table_path)
