import json

import numpy as np
import pytest

from fragile_interp.constraints import ConstraintConfig, Constraints
from fragile_interp.embeddings import EmbeddingTable
from fragile_interp.fixtures import fixture_paths
from fragile_interp.model import ToyClassifier, load_checkpoint
from fragile_interp.text import load_pos_lexicon, load_stopwords, make_sentence, tokenize


@pytest.fixture(scope="session")
def paths():
    return fixture_paths()


@pytest.fixture(scope="session")
def bundle(paths):
    """The shipped fixture model, lexicon, stop words and corpus."""
    model = load_checkpoint(paths["model"])
    lexicon = load_pos_lexicon(paths["pos"])
    stopwords = load_stopwords(paths["stopwords"])
    corpus = []
    with open(paths["corpus"], encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            corpus.append(make_sentence(tokenize(rec["text"]), rec["label"], lexicon, stopwords))
    constraints = Constraints(ConstraintConfig(stopwords=stopwords), model.table, lexicon)
    return {"model": model, "table": model.table, "lexicon": lexicon,
            "stopwords": stopwords, "corpus": corpus, "constraints": constraints}


def linear_model(seed=0, n_words=5, dim=8, scale=1.0, n_classes=2):
    """Random binary mean-pool model whose class rows are w and -w."""
    rng = np.random.default_rng(seed)
    tokens = [f"w{i}" for i in range(n_words)]
    table = EmbeddingTable(tokens, rng.normal(size=(n_words, dim)))
    w = rng.normal(0.0, scale, size=dim)
    W = np.stack([w, -w]) if n_classes == 2 else rng.normal(0.0, scale, size=(n_classes, dim))
    return ToyClassifier(table, W, np.zeros(n_classes), np.zeros(dim)), tokens
