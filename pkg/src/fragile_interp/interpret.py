"""Word attributions: Integrated Gradients, LIME and leave-one-out ranking."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ClassOutOfRange, DegenerateFit, EmptySentence
from .model import (
    ToyClassifier,
    embed_sentence,
    forward,
    grad_logit_wrt_embeddings,
    masked_logits,
    softmax,
)

IG, LIME, LOO = "IG", "LIME", "LOO"


@dataclass(frozen=True)
class Interpretation:
    scores: np.ndarray
    method: str
    target_class: int
    # LIME only: raw surrogate coefficients were all zero, so no normalization happened
    zero_raw: bool = field(default=False, compare=False)

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        if not np.all(np.isfinite(scores)):
            raise ValueError("attribution scores must be finite")
        object.__setattr__(self, "scores", scores)

    def __len__(self):
        return len(self.scores)

    def to_dict(self) -> dict:
        return {"method": self.method, "target_class": self.target_class,
                "scores": self.scores.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, line: str) -> "Interpretation":
        d = json.loads(line)
        return cls(np.asarray(d["scores"], dtype=float), d["method"], int(d["target_class"]))


def _check_target(model: ToyClassifier, target_class: int):
    if not 0 <= target_class < model.num_classes:
        raise ClassOutOfRange(target_class)


def integrated_gradients(model: ToyClassifier, sentence, steps: int = 50,
                         target_class: int | None = None) -> Interpretation:
    """Integrated Gradients of the target logit w.r.t. word embeddings.

    Path from the all-pad baseline to the input, right-endpoint Riemann sum
    with ``steps`` points; per-dimension attributions are summed per word.
    The target defaults to the predicted class.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    x = embed_sentence(model, sentence)
    if len(x) == 0:
        raise EmptySentence("cannot explain an empty sentence")
    if target_class is None:
        target_class = forward(model, x).label
    _check_target(model, target_class)
    r = np.broadcast_to(model.pad_vector, x.shape)
    delta = x - r
    total = np.zeros_like(x)
    for s in range(1, steps + 1):
        total += grad_logit_wrt_embeddings(model, r + (s / steps) * delta, target_class)
    attributions = delta * (total / steps)
    return Interpretation(attributions.sum(axis=1), IG, target_class)


def _kernel(masks: np.ndarray, width: float) -> np.ndarray:
    # cosine to the all-ones mask; empty masks get 0
    norms = np.linalg.norm(masks, axis=1)
    cos = np.divide(masks.sum(axis=1), norms * np.sqrt(masks.shape[1]),
                    out=np.zeros(len(masks)), where=norms > 1e-12)
    return np.exp(-((1.0 - cos) ** 2) / width ** 2)


def _weighted_ridge(X, y, w, lam):
    """Ridge coefficients with an unpenalized intercept under sample weights ``w``."""
    wsum = w.sum()
    xm = (w[:, None] * X).sum(axis=0) / wsum
    ym = (w * y).sum() / wsum
    Xc = X - xm
    yc = y - ym
    if not np.any(Xc):
        raise DegenerateFit("mask design matrix has rank 0")
    A = Xc.T @ (w[:, None] * Xc) + lam * np.eye(X.shape[1])
    return np.linalg.solve(A, Xc.T @ (w * yc))


def lime(model: ToyClassifier, sentence, n_samples: int = 500, seed: int = 0,
         kernel_width: float = 0.25, ridge_lambda: float = 1.0) -> Interpretation:
    """LIME word attributions with word-deletion masks, L2-normalized.

    Sample 0 is always the unmasked sentence; others keep each word with
    probability 1/2. An empty mask is classified from the pad vector alone.
    """
    x = embed_sentence(model, sentence)
    n = len(x)
    if n == 0:
        raise EmptySentence("cannot explain an empty sentence")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    target = forward(model, x).label
    rng = np.random.default_rng(seed)
    masks = (rng.random((n_samples, n)) < 0.5).astype(float)
    masks[0] = 1.0
    probs = softmax(masked_logits(model, x, masks))[:, target]
    coef = _weighted_ridge(masks, probs, _kernel(masks, kernel_width), ridge_lambda)
    norm = np.linalg.norm(coef)
    if norm < 1e-12:
        return Interpretation(np.zeros(n), LIME, target, zero_raw=True)
    return Interpretation(coef / norm, LIME, target)


def loo_importance(model: ToyClassifier, sentence) -> list[int]:
    """Word indices ordered by leave-one-out drop in predicted-class probability.

    Ties keep the lower index first.
    """
    x = embed_sentence(model, sentence)
    n = len(x)
    if n == 0:
        raise EmptySentence("cannot rank words of an empty sentence")
    full = forward(model, x)
    if n == 1:
        return [0]
    masks = 1.0 - np.eye(n)
    p_without = softmax(masked_logits(model, x, masks))[:, full.label]
    importance = full.probs[full.label] - p_without
    return sorted(range(n), key=lambda t: (-importance[t], t))
