"""Command-line entry points wiring the pipeline end to end.

One binary, five subcommands::

    citerank ingest           corpus.jsonl -> features.jsonl + vocab.tsv
    citerank train            features.jsonl -> model.json
    citerank evaluate         a model or baseline -> metric report
    citerank select-features  greedy forward feature selection
    citerank compare-external author-trained vs external-trained models

Every subcommand writes its outputs plus the fully resolved configuration
(run_config.json) into --out, prints the human-readable report, and exits
non-zero on any validation or runtime error. All randomness flows from
--seed, and machine-readable outputs are byte-identical across reruns
with identical flags. Each flag can also be supplied through an
environment variable with the CITERANK_ prefix (e.g. CITERANK_SEED);
explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, features, ranksvm
from .corpus import (
    CorpusError,
    build_corpus_vocabulary,
    parse_corpus_file,
    parse_external_rankings_file,
)
from .experiments import (
    FeatureBaseline,
    ModelRanker,
    RandomBaseline,
    SplitPlan,
    compare_summaries,
    cross_train_eval,
    forward_feature_selection,
    render_report,
    run_subsampling,
    write_split_records,
)
from .features import FEATURE_NAMES, SIMILARITY_FEATURES, featurize_corpus
from .metrics import DCG_MODES, kendall_tau
from .ranksvm import Hyperparams, RankingModel, rank_group

ENV_PREFIX = "CITERANK_"


def _env(flag: str, fallback):
    value = os.environ.get(ENV_PREFIX + flag.replace("-", "_").upper())
    return fallback if value is None else value


def parse_feature_mask(spec: str) -> tuple[str, ...]:
    """'all', 'text', 'citation', or a comma-separated feature list."""
    if spec == "all":
        return tuple(FEATURE_NAMES)
    if spec == "text":
        return tuple(SIMILARITY_FEATURES)
    if spec == "citation":
        return tuple(n for n in FEATURE_NAMES if n not in SIMILARITY_FEATURES)
    names = tuple(n.strip() for n in spec.split(",") if n.strip())
    unknown = [n for n in names if n not in FEATURE_NAMES]
    if unknown:
        raise ValueError(f"unknown features {unknown}; choose from "
                         f"{', '.join(FEATURE_NAMES)}")
    return names


def _add_common(parser, *flags):
    if "seed" in flags:
        parser.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    if "plan" in flags:
        parser.add_argument("--repeats", type=int,
                            default=int(_env("repeats", 100)))
        parser.add_argument("--train-fraction", type=float,
                            default=float(_env("train-fraction", 0.7)))
    if "hp" in flags:
        parser.add_argument("--c", type=float, default=float(_env("c", 1.0)))
        parser.add_argument("--epochs", type=int,
                            default=int(_env("epochs", 200)))
        parser.add_argument("--features-mask", type=str,
                            default=_env("features-mask", "all"))
    if "dcg" in flags:
        parser.add_argument("--dcg-mode", choices=DCG_MODES,
                            default=_env("dcg-mode", "standard"))
    if "jobs" in flags:
        parser.add_argument("--jobs", type=int, default=int(_env("jobs", 1)))
    parser.add_argument("--out", type=str, required=_env("out", None) is None,
                        default=_env("out", None))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citerank",
        description="Rank a document's references by closeness to the "
                    "citing work.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest", help="validate a corpus and cache features")
    p.add_argument("--corpus", required=True)
    p.add_argument("--candidates", choices=("all", "top5"),
                   default=_env("candidates", "all"))
    _add_common(p)

    p = sub.add_parser("train", help="train a ranking model on cached features")
    p.add_argument("--features", required=True)
    _add_common(p, "seed", "hp")

    p = sub.add_parser("evaluate", help="evaluate a model or baseline")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True,
                   help="'svm', 'random', 'feature:<name>', or a model file")
    _add_common(p, "seed", "plan", "hp", "dcg", "jobs")

    p = sub.add_parser("select-features", help="greedy forward feature selection")
    p.add_argument("--features", required=True)
    _add_common(p, "seed", "plan", "hp", "dcg", "jobs")

    p = sub.add_parser("compare-external",
                       help="author-trained vs external-trained models")
    p.add_argument("--features", required=True)
    p.add_argument("--external", required=True)
    _add_common(p, "seed", "plan", "hp", "dcg", "jobs")
    return parser


def _write(out_dir: Path, name: str, text: str) -> None:
    (out_dir / name).write_text(text, encoding="utf-8")


def _write_config(out_dir: Path, args: argparse.Namespace) -> None:
    config = {k: v for k, v in sorted(vars(args).items())}
    _write(out_dir, "run_config.json", json.dumps(config, sort_keys=True,
                                                  indent=2) + "\n")


def _load_groups(path: str):
    groups = features.read_feature_records_file(path)
    if not groups:
        raise ValueError(f"feature file {path!r} holds no records")
    return groups


def _hyperparams(args) -> Hyperparams:
    return Hyperparams(c=args.c, epochs=args.epochs, seed=args.seed,
                       feature_mask=parse_feature_mask(args.features_mask))


def _plan(args) -> SplitPlan:
    return SplitPlan(repeats=args.repeats, train_fraction=args.train_fraction,
                     seed=args.seed)


def cmd_ingest(args) -> str:
    corpus = parse_corpus_file(args.corpus)
    if len(corpus) == 0:
        raise ValueError(f"corpus file {args.corpus!r} holds no documents")
    vocab = build_corpus_vocabulary(corpus)
    groups = featurize_corpus(corpus, vocab, candidate_selection=args.candidates)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "features.jsonl", "w", encoding="utf-8") as fh:
        features.write_feature_records(groups, fh)
    with open(out_dir / "vocab.tsv", "w", encoding="utf-8") as fh:
        vocab.dump(fh)

    rows = sum(len(g.candidates) for g in groups)
    graded = sum(1 for g in groups if g.has_grades)
    lines = [f"{len(corpus)} documents, {rows} candidate rows",
             f"{graded} annotated documents, vocabulary of {len(vocab)} terms "
             f"over {vocab.n_docs} text units"]
    if corpus.warnings:
        lines.append("")
        lines.append("warnings:")
        lines.extend(f"  {w}" for w in corpus.warnings)
    report = "\n".join(lines) + "\n"
    _write(out_dir, "report.txt", report)
    _write_config(out_dir, args)
    return report


def cmd_train(args) -> str:
    groups = _load_groups(args.features)
    ungraded = [g.doc_id for g in groups if not g.has_grades]
    if ungraded:
        raise ValueError(f"{len(ungraded)} query groups lack annotations "
                         f"(first: {ungraded[0]!r}); training needs grades")
    hp = _hyperparams(args)
    model = ranksvm.train(groups, hp)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "model.json", "w", encoding="utf-8") as fh:
        model.save(fh)
    taus = [kendall_tau(g.grades(), rank_group(model, g)) for g in groups]
    report = (f"trained on {len(groups)} query groups, "
              f"{len(hp.feature_mask)} features\n"
              f"training objective: {model.training_objective!r}\n"
              f"training mean tau: {float(np.mean(taus)):.4f}\n")
    _write(out_dir, "report.txt", report)
    _write_config(out_dir, args)
    return report


def _resolve_ranker(spec: str, args):
    if spec == "svm":
        return _hyperparams(args)
    if spec == "random":
        return RandomBaseline(seed=args.seed)
    if spec.startswith("feature:"):
        return FeatureBaseline(spec.split(":", 1)[1])
    model_path = Path(spec)
    if not model_path.exists():
        raise ValueError(
            f"model {spec!r} is neither a file nor one of 'svm', 'random', "
            f"'feature:<name>'")
    with open(model_path, encoding="utf-8") as fh:
        model = RankingModel.load(fh)
    return ModelRanker(model, name=f"model:{model_path.name}")


def cmd_evaluate(args) -> str:
    groups = _load_groups(args.features)
    ranker = _resolve_ranker(args.model, args)
    summary = run_subsampling(groups, ranker, _plan(args),
                              dcg_mode=args.dcg_mode, jobs=args.jobs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write(out_dir, "summary.json",
           json.dumps(summary.to_dict(), sort_keys=True, indent=2) + "\n")
    with open(out_dir / "per_split.jsonl", "w", encoding="utf-8") as fh:
        write_split_records(summary, fh)
    report = render_report([summary], show_published=True)
    _write(out_dir, "report.txt", report)
    _write_config(out_dir, args)
    return report


def cmd_select_features(args) -> str:
    groups = _load_groups(args.features)
    hp = _hyperparams(args)
    result = forward_feature_selection(groups, _plan(args), hp,
                                       dcg_mode=args.dcg_mode, jobs=args.jobs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "trajectory.jsonl", "w", encoding="utf-8") as fh:
        for round_no, (feature, value) in enumerate(result.trajectory, start=1):
            fh.write(json.dumps({"round": round_no, "feature": feature,
                                 "mean_ndcg": value}, sort_keys=True) + "\n")
    lines = ["forward feature selection (objective: mean NDCG)", ""]
    lines += [f"  round {i:2d}: {feature:<22} {value:.4f}"
              for i, (feature, value) in enumerate(result.trajectory, start=1)]
    lines += ["", f"best prefix ({len(result.best_prefix)} features, "
                  f"NDCG {result.best_value:.4f}):",
              "  " + ", ".join(result.best_prefix)]
    report = "\n".join(lines) + "\n"
    _write(out_dir, "report.txt", report)
    _write_config(out_dir, args)
    return report


def cmd_compare_external(args) -> str:
    groups = _load_groups(args.features)
    external = parse_external_rankings_file(args.external)
    hp = _hyperparams(args)
    plan = _plan(args)
    summaries = [
        cross_train_eval(groups, "author", plan, hp, dcg_mode=args.dcg_mode,
                         jobs=args.jobs),
        cross_train_eval(groups, "external", plan, hp, external=external,
                         dcg_mode=args.dcg_mode, jobs=args.jobs),
    ]
    pvalues = compare_summaries(summaries, metric="tau_ap", seed=plan.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write(out_dir, "summary.json",
           json.dumps({"models": [s.to_dict() for s in summaries],
                       "pvalues_tau_ap": {f"{a} vs {b}": p
                                          for (a, b), p in pvalues.items()}},
                      sort_keys=True, indent=2) + "\n")
    with open(out_dir / "per_split.jsonl", "w", encoding="utf-8") as fh:
        for summary in summaries:
            write_split_records(summary, fh)
    report = render_report(summaries, pvalues, show_published=True)
    _write(out_dir, "report.txt", report)
    _write_config(out_dir, args)
    return report


_COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "select-features": cmd_select_features,
    "compare-external": cmd_compare_external,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = _COMMANDS[args.subcommand](args)
    except (CorpusError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"citerank {args.subcommand}: error: {exc}", file=sys.stderr)
        return 1
    print(report, end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
