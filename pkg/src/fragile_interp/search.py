"""Greedy prediction-preserving synonym search that maximizes explanation drift."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .constraints import Constraints
from .embeddings import EmbeddingTable, cosine
from .errors import EmptyInput, TooShort, ZeroMass
from .interpret import Interpretation, loo_importance
from .metrics import DivergenceKind, divergence, rank_correlation, topk_intersection
from .model import Prediction, ToyClassifier
from .text import Sentence

Interpreter = Callable[[ToyClassifier, Sentence], Interpretation]

OK = "ok"
NO_CANDIDATES = "no_candidates"
ZERO_MASS = "zero_mass"


@dataclass(frozen=True)
class Candidate:
    sentence: Sentence
    perturbed_indices: frozenset
    interpretation: Interpretation
    divergence: float | None
    prediction: Prediction
    word_similarity: float = 1.0

    @property
    def level(self) -> int:
        return len(self.perturbed_indices)


@dataclass
class AttackResult:
    seed: Sentence
    seed_interpretation: Interpretation | None
    seed_prediction: Prediction | None
    objective: DivergenceKind
    per_level: list[Candidate] = field(default_factory=list)
    status: str = OK
    interpreter_calls: int = 0

    def levels(self):
        n = len(self.seed)
        for c in self.per_level:
            yield {
                "level": c.level,
                "ratio": c.level / n,
                "text": c.sentence.text,
                "perturbed_indices": sorted(c.perturbed_indices),
                "divergence": c.divergence,
                "rank_correlation": rank_correlation(self.seed_interpretation, c.interpretation),
                "topk_intersection": topk_intersection(self.seed_interpretation, c.interpretation),
            }

    def to_dict(self) -> dict:
        return {
            "seed_text": self.seed.text,
            "n_words": len(self.seed),
            "seed_label": self.seed.label,
            "predicted_label": None if self.seed_prediction is None else self.seed_prediction.label,
            "objective": self.objective.value,
            "status": self.status,
            "levels": list(self.levels()),
        }


def max_levels(n_words: int, max_ratio: float) -> int:
    # round before flooring so 0.3 * 10 does not land on 2.9999...
    return math.floor(round(max_ratio * n_words, 9))


def explain_fooler(
    seed: Sentence,
    model: ToyClassifier,
    interpreter: Interpreter,
    table: EmbeddingTable,
    constraints: Constraints,
    objective: DivergenceKind | str = DivergenceKind.L2,
    k_neighbors: int = 50,
    seed_rng: np.random.Generator | int | None = None,
) -> AttackResult:
    """Greedy attack on one seed sentence.

    Words are visited once each in seed leave-one-out order (stop words
    dropped). At each position every admissible neighbour swap is
    interpreted, and the one with the largest divergence from the seed
    interpretation is committed (ties: higher word cosine, then token).
    Under the random objective a uniformly drawn survivor is committed
    instead. Every commit adds one level; the run stops at
    ``floor(max_ratio * n)`` levels. Positions without survivors are skipped.
    """
    objective = DivergenceKind(objective)
    n = len(seed)
    if n == 0:
        raise EmptyInput("empty seed sentence")
    if n < 2:
        raise TooShort("seed needs at least two words")
    rng = np.random.default_rng(seed_rng)
    cfg = constraints.config

    seed_pred = model.predict(seed)
    seed_interp = interpreter(model, seed)
    result = AttackResult(seed, seed_interp, seed_pred, objective, interpreter_calls=1)

    def score(interp):
        return divergence(objective, seed_interp, interp)

    if objective is DivergenceKind.DELTA_LOM:
        try:
            score(seed_interp)
        except ZeroMass:
            result.status = ZERO_MASS
            return result

    order = [t for t in loo_importance(model, seed) if seed.words[t].surface not in cfg.stopwords]
    budget = max_levels(n, cfg.max_ratio)
    working = seed
    state: frozenset = frozenset()

    for pos in order:
        if len(state) >= budget:
            break
        orig = working.words[pos]
        if orig.surface not in table:
            continue
        survivors = []
        for token, _ in table.nearest_neighbors(orig.surface, k_neighbors):
            cand_sentence = working.substitute(pos, constraints.make_word(token))
            if not constraints.admissible(model, seed, seed_pred, state, pos, orig, cand_sentence):
                continue
            survivors.append((token, cand_sentence))
        if not survivors:
            continue

        if objective is DivergenceKind.RANDOM:
            survivors.sort(key=lambda s: s[0])
            token, cand_sentence = survivors[int(rng.integers(len(survivors)))]
            interp = interpreter(model, cand_sentence)
            result.interpreter_calls += 1
            best = (None, token, cand_sentence, interp)
        else:
            best = None
            best_key = None
            for token, cand_sentence in survivors:
                interp = interpreter(model, cand_sentence)
                result.interpreter_calls += 1
                try:
                    div = score(interp)
                except ZeroMass:
                    continue
                sim = cosine(table[orig.surface], table[token])
                key = (-div, -sim, token)
                if best_key is None or key < best_key:
                    best_key = key
                    best = (div, token, cand_sentence, interp)
            if best is None:
                continue

        div, token, cand_sentence, interp = best
        state = state | {pos}
        working = cand_sentence
        result.per_level.append(Candidate(
            sentence=cand_sentence,
            perturbed_indices=state,
            interpretation=interp,
            divergence=div,
            prediction=model.predict(cand_sentence),
            word_similarity=cosine(table[orig.surface], table[token]),
        ))

    if not result.per_level:
        result.status = NO_CANDIDATES
    return result


def enumerate_single_swaps(seed, model, interpreter, table, constraints, objective,
                           k_neighbors=50):
    """Every admissible one-word swap of ``seed`` with its divergence.

    Brute-force reference for checking the greedy level-1 choice; returns
    ``(divergence, word_similarity, token, index, sentence)`` tuples.
    """
    objective = DivergenceKind(objective)
    cfg = constraints.config
    seed_pred = model.predict(seed)
    seed_interp = interpreter(model, seed)
    out = []
    for pos, orig in enumerate(seed.words):
        if orig.surface in cfg.stopwords or orig.surface not in table:
            continue
        for token, _ in table.nearest_neighbors(orig.surface, k_neighbors):
            cand = seed.substitute(pos, constraints.make_word(token))
            if not constraints.admissible(model, seed, seed_pred, frozenset(), pos, orig, cand):
                continue
            try:
                div = divergence(objective, seed_interp, interpreter(model, cand))
            except ZeroMass:
                continue
            out.append((div, cosine(table[orig.surface], table[token]), token, pos, cand))
    return out


def verify_candidate(result: AttackResult, cand: Candidate, model, constraints: Constraints,
                     stopwords=None) -> list[str]:
    """Re-check a committed candidate against the seed; returns violated constraint names."""
    seed = result.seed
    stopwords = constraints.config.stopwords if stopwords is None else stopwords
    problems = []
    diff = [i for i, (a, b) in enumerate(zip(seed.words, cand.sentence.words))
            if a.surface != b.surface or b.perturbed]
    if sorted(diff) != sorted(cand.perturbed_indices):
        problems.append("repeat")
    seed_pred = model.predict(seed)
    for i in cand.perturbed_indices:
        orig = seed.words[i]
        for name in constraints.violations(model, seed, seed_pred, frozenset(), i, orig,
                                           cand.sentence):
            if name not in problems:
                problems.append(name)
        if orig.surface in stopwords and "stopword" not in problems:
            problems.append("stopword")
    return problems


@dataclass
class BucketRow:
    label: str
    count: int
    rank_mean: float | None
    rank_std: float | None
    topk_mean: float | None
    topk_std: float | None

    def to_dict(self):
        return dict(self.__dict__)


def bucket_labels(n_buckets: int = 5, width: float = 0.1) -> list[str]:
    return [f"{round(j * width, 10):g}-{round((j + 1) * width, 10):g}" for j in range(n_buckets)]


def bucket_index(level: int, n_words: int, n_buckets: int = 5) -> int:
    """Half-open tenths of the ratio ``level / n_words``; the top value folds into the last bucket."""
    return min((10 * level) // n_words, n_buckets - 1)


def bucketize_records(records: Iterable[dict], n_buckets: int = 5) -> list[BucketRow]:
    """Mean and population std of rank correlation and top-k overlap per ratio bucket.

    Works on serialized per-seed records (``AttackResult.to_dict`` output).
    """
    rank = [[] for _ in range(n_buckets)]
    topk = [[] for _ in range(n_buckets)]
    for rec in records:
        for lv in rec["levels"]:
            j = bucket_index(lv["level"], rec["n_words"], n_buckets)
            rank[j].append(lv["rank_correlation"])
            topk[j].append(lv["topk_intersection"])
    rows = []
    for label, r, t in zip(bucket_labels(n_buckets), rank, topk):
        if r:
            rows.append(BucketRow(label, len(r), float(np.mean(r)), float(np.std(r)),
                                  float(np.mean(t)), float(np.std(t))))
        else:
            rows.append(BucketRow(label, 0, None, None, None, None))
    return rows


def bucketize(results: Sequence[AttackResult], n_buckets: int = 5) -> list[BucketRow]:
    return bucketize_records((r.to_dict() for r in results), n_buckets)
