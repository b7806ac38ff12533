"""Deterministic generator for the bundled desk-scale fixture set.

The vocabulary is made of pseudo-words grouped into synonym clusters. Words in
a cluster share a direction in embedding space (so their cosine stays high)
but differ in sentiment intensity along axis 0, which is what the toy
classifier learns to read. That mirrors the useful property of counter-fitted
vectors: nearest neighbours are near-synonyms whose connotation ranges from
strong to faintly opposite.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingTable
from .model import accuracy, fit_classifier, save_checkpoint
from .text import POS, make_sentence

STOPWORDS = (
    "a an the and or but if of to in on at by for with from as is was are were be "
    "been it its this that these those he she they we you i not so very just than then "
    "there here what which who"
).split()

_CONS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
_SUFFIX = {POS.NOUN: ("", "on", "et"), POS.VERB: ("ate", "en", "ize"),
           POS.ADJ: ("ous", "ive", "al"), POS.ADV: ("ly",)}
_POS_SHARE = {POS.NOUN: 0.4, POS.VERB: 0.2, POS.ADJ: 0.25, POS.ADV: 0.15}
_POLAR_PROB = {POS.NOUN: 0.15, POS.VERB: 0.4, POS.ADJ: 0.75, POS.ADV: 0.5}

DEFAULTS = dict(dim=16, n_clusters=327, cluster_size=6, n_corpus=200, n_train=1000, n_short=40,
                seed=7, epochs=400, learning_rate=2.0, neutral_sd=0.35, stop_sd=0.1,
                intensity=(-0.4, 1.3), centre_norm=1.5)


def data_dir() -> Path:
    return Path(str(resources.files("fragile_interp") / "data"))


def fixture_paths(root: str | Path | None = None) -> dict[str, Path]:
    root = Path(root) if root is not None else data_dir()
    return {
        "embeddings": root / "embeddings.txt",
        "pos": root / "pos_lexicon.txt",
        "stopwords": root / "stopwords.txt",
        "corpus": root / "corpus.jsonl",
        "train": root / "train.jsonl",
        "short": root / "short_seeds.jsonl",
        "model": root / "model.json",
    }


def _pseudo_word(rng, pos, taken):
    while True:
        n_syl = int(rng.integers(2, 4))
        stem = "".join(rng.choice(list(_CONS)) + rng.choice(list(_VOWELS)) for _ in range(n_syl))
        word = stem + str(rng.choice(_SUFFIX[pos]))
        if word not in taken:
            taken.add(word)
            return word


def build_vocabulary(rng, dim, n_clusters, cluster_size, neutral_sd=0.25, stop_sd=0.1,
                     intensity=(0.05, 1.2), centre_norm=1.0):
    """Return (tokens, matrix, lexicon, clusters, sentiment) for the synthetic world."""
    tokens, rows, sentiment = [], [], {}
    lexicon: dict[str, POS] = {}
    clusters: dict[POS, list[list[str]]] = {p: [] for p in _POS_SHARE}
    taken = set(STOPWORDS)

    for w in STOPWORDS:
        v = np.zeros(dim)
        d = rng.normal(size=dim - 1)
        v[1:] = 0.8 * d / np.linalg.norm(d)
        v[0] = rng.normal(0, stop_sd)
        tokens.append(w); rows.append(v); lexicon[w] = POS.OTHER; sentiment[w] = v[0]

    pos_list = list(_POS_SHARE)
    probs = np.array([_POS_SHARE[p] for p in pos_list])
    for _ in range(n_clusters):
        pos = pos_list[int(rng.choice(len(pos_list), p=probs))]
        centre = rng.normal(size=dim - 1)
        centre *= centre_norm / np.linalg.norm(centre)
        polarity = 0.0
        if rng.random() < _POLAR_PROB[pos]:
            polarity = 1.0 if rng.random() < 0.5 else -1.0
        members = []
        # stratified intensities: every polar cluster spans weak to strong synonyms
        strata = (np.arange(cluster_size) + rng.random(cluster_size)) / cluster_size
        rng.shuffle(strata)
        for i in range(cluster_size):
            word = _pseudo_word(rng, pos, taken)
            v = np.zeros(dim)
            v[1:] = centre + rng.normal(0, 0.12, size=dim - 1)
            lo, hi = intensity
            s = polarity * (lo + (hi - lo) * strata[i]) if polarity else rng.normal(0, neutral_sd)
            v[0] = s
            tokens.append(word); rows.append(v); lexicon[word] = pos; sentiment[word] = s
            members.append(word)
        clusters[pos].append(members)
    return tokens, np.array(rows), lexicon, clusters, sentiment


def build_corpus(rng, n, clusters, sentiment, min_len=5, max_len=20, margin=0.4):
    pos_list = list(_POS_SHARE)
    probs = np.array([_POS_SHARE[p] for p in pos_list])
    out = []
    while len(out) < n:
        length = int(rng.integers(min_len, max_len + 1))
        toks = []
        for _ in range(length):
            if rng.random() < 0.3:
                toks.append(STOPWORDS[int(rng.integers(len(STOPWORDS)))])
            else:
                pos = pos_list[int(rng.choice(len(pos_list), p=probs))]
                group = clusters[pos][int(rng.integers(len(clusters[pos])))]
                toks.append(group[int(rng.integers(len(group)))])
        total = sum(sentiment[t] for t in toks)
        if abs(total) < margin:
            continue
        out.append({"text": " ".join(toks), "label": int(total > 0)})
    return out


def write_fixtures(out_dir: str | Path | None = None, **overrides) -> dict[str, Path]:
    """Regenerate every fixture file under ``out_dir`` (the package data dir by default)."""
    params = {**DEFAULTS, **overrides}
    paths = fixture_paths(out_dir)
    paths["embeddings"].parent.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(params["seed"])

    tokens, matrix, lexicon, clusters, sentiment = build_vocabulary(
        rng, params["dim"], params["n_clusters"], params["cluster_size"],
        params["neutral_sd"], params["stop_sd"], params["intensity"], params["centre_norm"])
    # round-trip through the text format so in-memory and on-disk tables agree
    matrix = np.round(matrix, 6)
    table = EmbeddingTable(tokens, matrix)
    table.save(paths["embeddings"])
    with open(paths["pos"], "w", encoding="utf-8") as fh:
        fh.write("# token TAG\n")
        for tok in tokens:
            fh.write(f"{tok} {lexicon[tok].value}\n")
    with open(paths["stopwords"], "w", encoding="utf-8") as fh:
        fh.write("# one stop word per line\n")
        fh.write("\n".join(STOPWORDS) + "\n")

    corpus = build_corpus(rng, params["n_corpus"], clusters, sentiment)
    train = build_corpus(rng, params["n_train"], clusters, sentiment)
    # separate stream so adding this file leaves the others unchanged
    short = build_corpus(np.random.default_rng([params["seed"], 1]), params["n_short"],
                         clusters, sentiment, min_len=5, max_len=6)
    for key, records in (("corpus", corpus), ("train", train), ("short", short)):
        with open(paths[key], "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")

    train_sents = [make_sentence(r["text"].split(), r["label"], lexicon, STOPWORDS) for r in train]
    model = fit_classifier(table, train_sents, 2, params["epochs"], params["learning_rate"],
                           seed=params["seed"], table_path=paths["embeddings"])
    save_checkpoint(model, paths["model"], paths["embeddings"])
    eval_sents = [make_sentence(r["text"].split(), r["label"], lexicon, STOPWORDS) for r in corpus]
    paths_info = dict(paths)
    paths_info["train_accuracy"] = accuracy(model, train_sents)
    paths_info["corpus_accuracy"] = accuracy(model, eval_sents)
    return paths_info
