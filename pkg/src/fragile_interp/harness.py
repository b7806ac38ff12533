"""Corpus ingestion, experiment runs and bucketed reports."""
from __future__ import annotations

import csv
import functools
import hashlib
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .constraints import ConstraintConfig, Constraints
from .embeddings import load_embeddings
from .errors import ConfigError, EmptyCorpus, EmptyInput, ParseError, SchemeMismatch
from .interpret import integrated_gradients, lime
from .metrics import DivergenceKind
from .model import load_checkpoint
from .search import AttackResult, BucketRow, bucketize_records, explain_fooler
from .text import Sentence, load_pos_lexicon, load_stopwords, make_sentence, tokenize

log = logging.getLogger(__name__)

INTERPRETERS = ("ig", "lime")


class QualityScorer(Protocol):
    """External fluency/grammar scorer hook; none ships with the package."""

    def __call__(self, text: str) -> float: ...


@dataclass
class ExperimentConfig:
    dataset_path: str
    embeddings_path: str
    pos_lexicon_path: str
    stopword_path: str
    model_checkpoint_path: str
    output_dir: str
    interpreter: str = "ig"
    objective: str = "l2"
    k_neighbors: int = 50
    ig_steps: int = 50
    lime_samples: int = 500
    min_word_cos: float = 0.5
    min_sentence_cos: float = 0.5
    max_ratio: float = 0.5
    rng_seed: int = 0
    max_sentences: int = 500
    workers: int = 1
    skip_misclassified: bool = False

    def validate(self):
        if self.interpreter not in INTERPRETERS:
            raise ConfigError(f"interpreter must be one of {INTERPRETERS}")
        try:
            DivergenceKind(self.objective)
        except ValueError:
            raise ConfigError(f"unknown objective {self.objective!r}") from None
        for name in ("k_neighbors", "ig_steps", "lime_samples", "max_sentences", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        # threshold and ratio ranges are checked by ConstraintConfig
        self.constraint_config()
        for name in ("dataset_path", "embeddings_path", "pos_lexicon_path",
                     "stopword_path", "model_checkpoint_path"):
            path = Path(getattr(self, name))
            if not path.is_file():
                raise FileNotFoundError(f"{name}: no such file {path}")
        return self

    def constraint_config(self, stopwords=frozenset()) -> ConstraintConfig:
        return ConstraintConfig(self.min_word_cos, self.min_sentence_cos, frozenset(stopwords),
                                True, self.max_ratio)


def ingest(path, max_sentences: int | None = None, lexicon=None, stopwords=()) -> list[Sentence]:
    """Read ``{"text", "label"}`` JSONL, dropping sentences of two words or fewer."""
    out: list[Sentence] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                text, label = rec["text"], int(rec["label"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: bad record ({exc})") from None
            if not isinstance(text, str) or label < 0:
                raise ParseError(f"{path}:{lineno}: bad record")
            try:
                tokens = tokenize(text)
            except EmptyInput:
                continue
            if len(tokens) <= 2:
                continue
            out.append(make_sentence(tokens, label, lexicon, stopwords))
            if max_sentences is not None and len(out) >= max_sentences:
                break
    if not out:
        raise EmptyCorpus(f"{path}: no usable sentences")
    return out


def corpus_digest(sentences: Iterable[Sentence]) -> str:
    h = hashlib.sha256()
    for s in sentences:
        h.update(f"{s.label}\t{s.text}\n".encode())
    return h.hexdigest()


def seed_streams(rng_seed: int, index: int) -> tuple[np.random.Generator, int]:
    """Per-sentence RNG and LIME seed, independent of scheduling order."""
    ss = np.random.SeedSequence([rng_seed, index])
    rng_ss, lime_ss = ss.spawn(2)
    return np.random.default_rng(rng_ss), int(lime_ss.generate_state(1)[0])


class Resources:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.table = load_embeddings(config.embeddings_path)
        self.model = load_checkpoint(config.model_checkpoint_path, table=self.table)
        self.lexicon = load_pos_lexicon(config.pos_lexicon_path)
        self.stopwords = load_stopwords(config.stopword_path)
        self.constraints = Constraints(config.constraint_config(self.stopwords),
                                       self.table, self.lexicon)

    def interpreter(self, lime_seed: int):
        cfg = self.config
        if cfg.interpreter == "ig":
            return functools.partial(integrated_gradients, steps=cfg.ig_steps)
        return functools.partial(lime, n_samples=cfg.lime_samples, seed=lime_seed)

    def attack(self, index: int, seed: Sentence) -> AttackResult:
        rng, lime_seed = seed_streams(self.config.rng_seed, index)
        return explain_fooler(seed, self.model, self.interpreter(lime_seed), self.table,
                              self.constraints, self.config.objective,
                              self.config.k_neighbors, rng)


_WORKER: Resources | None = None


def _init_worker(config):
    global _WORKER
    _WORKER = Resources(config)


def _attack_in_worker(job):
    index, seed = job
    return _WORKER.attack(index, seed)


@dataclass
class Report:
    config: dict
    records: list[dict]
    buckets: list[BucketRow]
    corpus_digest: str
    timing: dict = field(default_factory=dict)
    results: list[AttackResult] = field(default_factory=list, repr=False)

    @property
    def objective(self) -> str:
        return self.config["objective"]

    def to_dict(self) -> dict:
        statuses: dict[str, int] = {}
        for rec in self.records:
            statuses[rec["status"]] = statuses.get(rec["status"], 0) + 1
        return {
            "config": self.config,
            "corpus_digest": self.corpus_digest,
            "n_seeds": len(self.records),
            "n_candidates": sum(len(r["levels"]) for r in self.records),
            "status_counts": dict(sorted(statuses.items())),
            "buckets": [b.to_dict() for b in self.buckets],
            "timing": self.timing,
            "candidates_file": "candidates.jsonl",
        }


def _fmt(x):
    return "" if x is None else f"{x:.6f}"


def buckets_csv(rows: Sequence[BucketRow], objective: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ratio", "count", f"{objective}_rank_mean", f"{objective}_rank_std",
                f"{objective}_topk_mean", f"{objective}_topk_std"])
    for r in rows:
        w.writerow([r.label, r.count, _fmt(r.rank_mean), _fmt(r.rank_std),
                    _fmt(r.topk_mean), _fmt(r.topk_std)])
    return buf.getvalue()


def write_report(report: Report, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"report": out / "report.json", "buckets": out / "buckets.csv",
             "candidates": out / "candidates.jsonl"}
    with open(paths["candidates"], "w", encoding="utf-8") as fh:
        for rec in report.records:
            fh.write(json.dumps(rec) + "\n")
    paths["buckets"].write_text(buckets_csv(report.buckets, report.objective), encoding="utf-8")
    paths["report"].write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return paths


def run_experiment(config: ExperimentConfig, write: bool = True) -> Report:
    """Attack every seed of the corpus and bucket the candidates by perturbation ratio.

    Output files depend only on the config (worker count included): each
    seed gets its own RNG stream derived from ``(rng_seed, index)``.
    """
    config.validate()
    t0 = time.perf_counter()
    res = Resources(config)
    seeds = ingest(config.dataset_path, config.max_sentences, res.lexicon, res.stopwords)
    jobs = list(enumerate(seeds))
    if config.skip_misclassified:
        jobs = [(i, s) for i, s in jobs if res.model.predict(s).label == s.label]
    t_load = time.perf_counter()

    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(config.workers, initializer=_init_worker,
                                 initargs=(config,)) as pool:
            results = list(pool.map(_attack_in_worker, jobs, chunksize=4))
    else:
        results = [res.attack(i, s) for i, s in jobs]
    t_attack = time.perf_counter()

    records = []
    for (index, _), result in zip(jobs, results):
        records.append({"seed_index": index, **result.to_dict()})
    report = Report(
        config=asdict(config),
        records=records,
        buckets=bucketize_records(records),
        corpus_digest=corpus_digest(seeds),
        timing={"load_s": round(t_load - t0, 3), "attack_s": round(t_attack - t_load, 3),
                "interpreter_calls": sum(r.interpreter_calls for r in results)},
        results=results,
    )
    log.info("attacked %d seeds, %d candidates", len(records),
             sum(len(r["levels"]) for r in records))
    if write:
        write_report(report, config.output_dir)
    return report


def load_report(path) -> dict:
    """Load a report.json, or the report.json inside a run directory."""
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    return json.loads(path.read_text(encoding="utf-8"))


def _as_dict(report) -> dict:
    return report.to_dict() if isinstance(report, Report) else report


def compare_arms(report_a, report_b) -> list[dict]:
    """Per-bucket ``mean_rank(a) - mean_rank(b)``; ``None`` unless both buckets are populated."""
    a, b = _as_dict(report_a), _as_dict(report_b)
    labels_a = [r["label"] for r in a["buckets"]]
    labels_b = [r["label"] for r in b["buckets"]]
    if labels_a != labels_b:
        raise SchemeMismatch(f"bucket schemes differ: {labels_a} vs {labels_b}")
    if a.get("corpus_digest") != b.get("corpus_digest"):
        raise SchemeMismatch("reports were computed on different corpora")
    rows = []
    for ra, rb in zip(a["buckets"], b["buckets"]):
        both = ra["count"] > 0 and rb["count"] > 0
        rows.append({
            "ratio": ra["label"],
            "count_a": ra["count"],
            "count_b": rb["count"],
            "rank_delta": ra["rank_mean"] - rb["rank_mean"] if both else None,
            "topk_delta": ra["topk_mean"] - rb["topk_mean"] if both else None,
        })
    return rows


def comparison_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ratio", "count_a", "count_b", "rank_delta", "topk_delta"])
    for r in rows:
        w.writerow([r["ratio"], r["count_a"], r["count_b"], _fmt(r["rank_delta"]),
                    _fmt(r["topk_delta"])])
    return buf.getvalue()


def arms_table_csv(reports: Sequence, metric: str = "rank") -> str:
    """One column per objective, one row per ratio bucket (mean ``metric``)."""
    reports = [_as_dict(r) for r in reports]
    labels = [r["label"] for r in reports[0]["buckets"]]
    for r in reports[1:]:
        if [b["label"] for b in r["buckets"]] != labels:
            raise SchemeMismatch("bucket schemes differ")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ratio"] + [r["config"]["objective"] for r in reports])
    for j, label in enumerate(labels):
        w.writerow([label] + [_fmt(r["buckets"][j][f"{metric}_mean"]) for r in reports])
    return buf.getvalue()


def score_candidates(records: Iterable[dict], scorer: QualityScorer) -> list[list[float]]:
    """Apply an external quality scorer to every candidate text of per-seed records."""
    return [[scorer(lv["text"]) for lv in rec["levels"]] for rec in records]


def read_candidates(path) -> list[dict]:
    path = Path(path)
    if path.is_dir():
        path = path / "candidates.jsonl"
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
