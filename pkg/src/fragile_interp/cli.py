"""Command-line entry point.

Every option of ``attack`` and ``train-model`` can also be set through an
environment variable: the flag name upper-cased, dashes to underscores, with
an ``EF_`` prefix (``--k-neighbors`` -> ``EF_K_NEIGHBORS``).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import ConfigError, FragileError

EXIT_RESOURCE = 1
EXIT_CONFIG = 2


def _env(flag: str, default=None):
    return os.environ.get("EF_" + flag.lstrip("-").upper().replace("-", "_"), default)


def _opt(parser, flag, type=str, default=None, required=False, **kwargs):
    value = _env(flag, default)
    if value is not None and type is not str:
        try:
            value = type(value)
        except ValueError:
            parser.error(f"environment value for {flag} is not a valid {type.__name__}")
    parser.add_argument(flag, type=type, default=value,
                        required=required and value is None, **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fragile-interp",
        description="Prediction-preserving synonym swaps that disrupt word attributions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="attack a corpus and write bucketed reports")
    for flag in ("--dataset", "--embeddings", "--model", "--pos", "--stopwords", "--out"):
        _opt(p, flag, required=True)
    _opt(p, "--interpreter", default="ig", choices=["ig", "lime"])
    _opt(p, "--objective", default="l2", choices=["delta_lom", "l2", "random"])
    _opt(p, "--k-neighbors", int, 50)
    _opt(p, "--ig-steps", int, 50)
    _opt(p, "--lime-samples", int, 500)
    _opt(p, "--min-word-cos", float, 0.5)
    _opt(p, "--min-sentence-cos", float, 0.5)
    _opt(p, "--max-ratio", float, 0.5)
    _opt(p, "--seed", int, 0)
    _opt(p, "--max-sentences", int, 500)
    _opt(p, "--workers", int, 1)
    p.add_argument("--skip-misclassified", action="store_true",
                   default=_env("--skip-misclassified", "") not in ("", "0"))

    p = sub.add_parser("train-model", help="fit the toy classifier and write a checkpoint")
    for flag in ("--dataset", "--embeddings", "--out"):
        _opt(p, flag, required=True)
    _opt(p, "--classes", int, 2)
    _opt(p, "--epochs", int, 400)
    _opt(p, "--lr", float, 2.0)
    _opt(p, "--seed", int, 0)
    _opt(p, "--max-sentences", int, None)

    p = sub.add_parser("report-compare", help="per-bucket rank-correlation deltas A - B")
    p.add_argument("a", help="report.json or run directory")
    p.add_argument("b", help="report.json or run directory")
    p.add_argument("--out", required=True)

    p = sub.add_parser("report-table", help="objectives side by side, one row per ratio bucket")
    p.add_argument("reports", nargs="+")
    p.add_argument("--metric", choices=["rank", "topk"], default="rank")
    p.add_argument("--out", required=True)

    p = sub.add_parser("make-fixtures", help="regenerate the synthetic fixture bundle")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    return parser


def _attack(args):
    from .harness import ExperimentConfig, run_experiment

    config = ExperimentConfig(
        dataset_path=args.dataset, embeddings_path=args.embeddings,
        pos_lexicon_path=args.pos, stopword_path=args.stopwords,
        model_checkpoint_path=args.model, output_dir=args.out,
        interpreter=args.interpreter, objective=args.objective,
        k_neighbors=args.k_neighbors, ig_steps=args.ig_steps,
        lime_samples=args.lime_samples, min_word_cos=args.min_word_cos,
        min_sentence_cos=args.min_sentence_cos, max_ratio=args.max_ratio,
        rng_seed=args.seed, max_sentences=args.max_sentences, workers=args.workers,
        skip_misclassified=args.skip_misclassified,
    )
    report = run_experiment(config)
    for row in report.buckets:
        mean = "-" if row.rank_mean is None else f"{row.rank_mean:.3f}"
        print(f"{row.label:>8}  n={row.count:<5d} rank={mean}")


def _train(args):
    from .embeddings import load_embeddings
    from .harness import ingest
    from .model import accuracy, fit_classifier, save_checkpoint

    table = load_embeddings(args.embeddings)
    corpus = ingest(args.dataset, args.max_sentences)
    if args.classes < 2 or args.epochs < 0 or args.lr <= 0:
        raise ConfigError("need --classes >= 2, --epochs >= 0 and --lr > 0")
    if max(s.label for s in corpus) >= args.classes:
        raise ConfigError("dataset has labels outside --classes")
    model = fit_classifier(table, corpus, args.classes, args.epochs, args.lr, args.seed,
                           table_path=args.embeddings)
    save_checkpoint(model, args.out, args.embeddings)
    print(f"training accuracy {accuracy(model, corpus):.3f} on {len(corpus)} sentences")


def _compare(args):
    from .harness import compare_arms, comparison_csv, load_report

    Path(args.out).write_text(comparison_csv(compare_arms(load_report(args.a),
                                                          load_report(args.b))))


def _table(args):
    from .harness import arms_table_csv, load_report

    Path(args.out).write_text(arms_table_csv([load_report(r) for r in args.reports],
                                             args.metric))


def _fixtures(args):
    from .fixtures import write_fixtures

    info = write_fixtures(args.out, seed=args.seed)
    print(f"wrote fixtures to {args.out} (corpus accuracy {info['corpus_accuracy']:.3f})")


COMMANDS = {"attack": _attack, "train-model": _train, "report-compare": _compare,
            "report-table": _table, "make-fixtures": _fixtures}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FragileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    return 0


if __name__ == "__main__":
    sys.exit(main())
