"""Divergence objectives and agreement metrics between two interpretations.

``lom``/``delta_lom``/``l2_diff`` are the attack objectives (larger means more
different); ``rank_correlation``/``topk_intersection`` are the evaluation
metrics (larger means more similar).
"""
from __future__ import annotations

import enum
import math

import numpy as np

from .errors import LengthMismatch, TooShort, ZeroMass

MASS_EPS = 1e-9


class DivergenceKind(str, enum.Enum):
    DELTA_LOM = "delta_lom"
    L2 = "l2"
    RANDOM = "random"


def _scores(x) -> np.ndarray:
    return np.asarray(getattr(x, "scores", x), dtype=float)


def _pair(a, b):
    a, b = _scores(a), _scores(b)
    if a.shape != b.shape:
        raise LengthMismatch(f"{a.shape} vs {b.shape}")
    return a, b


def lom(interp) -> float:
    """Location of mass: the attribution-weighted mean word index."""
    s = _scores(interp)
    mass = s.sum()
    if abs(mass) < MASS_EPS:
        raise ZeroMass(f"total attribution {mass!r} too close to zero")
    return float(np.dot(s, np.arange(len(s))) / mass)


def delta_lom(a, b) -> float:
    return abs(lom(a) - lom(b))


def l2_diff(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.linalg.norm(a - b))


def average_ranks(x) -> np.ndarray:
    """1-based ranks with tied values sharing the mean of their positions."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    sx = x[order]
    ranks = np.empty(len(x))
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(a, b) -> float:
    """Spearman's rho via Pearson on average ranks; 0.0 if either side is constant."""
    a, b = _pair(a, b)
    if len(a) < 2:
        raise TooShort("need at least two scores")
    ra = average_ranks(a) - (len(a) + 1) / 2.0
    rb = average_ranks(b) - (len(b) + 1) / 2.0
    denom = math.sqrt(float(np.dot(ra, ra)) * float(np.dot(rb, rb)))
    if denom == 0.0:
        return 0.0
    return float(np.clip(np.dot(ra, rb) / denom, -1.0, 1.0))


def rank_correlation(a, b) -> float:
    """Spearman correlation with negative values clipped to zero."""
    return max(0.0, spearman(a, b))


def top_indices(scores, k: int) -> list[int]:
    """Indices of the ``k`` largest |scores|, lower index first on ties."""
    s = np.abs(_scores(scores))
    return sorted(range(len(s)), key=lambda i: (-s[i], i))[:k]


def topk_intersection(a, b, fraction: float = 0.5) -> float:
    a, b = _pair(a, b)
    if len(a) < 1:
        raise TooShort("need at least one score")
    k = max(1, math.floor(fraction * len(a)))
    return len(set(top_indices(a, k)) & set(top_indices(b, k))) / k


def divergence(kind, a, b) -> float:
    kind = DivergenceKind(kind)
    if kind is DivergenceKind.DELTA_LOM:
        return delta_lom(a, b)
    if kind is DivergenceKind.L2:
        return l2_diff(a, b)
    raise ValueError("random selection has no divergence score")
