"""Command-line pipeline: one verb per stage.

    stats       corpus statistics (counts, means, form distribution)
    split       document-wise train/dev/test split
    featurize   feature table TSV for a corpus and system config
    train       fit a classifier, write the model JSON
    predict     write the prediction interchange TSV
    evaluate    score a prediction file against a corpus
    compare     correlation table + pairwise Bayes factor matrices
    importance  permutation feature importance on a held-out split
    synth       generate a seeded synthetic corpus with a stats manifest

Commands exit 0 on success and nonzero on any error; outputs are written
atomically so a failed run leaves no partial files.  Report paths write
PNG figures next to the delimited outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, figures, fileio
from .corpus import (
    CLASS_FORMS,
    Corpus,
    CorpusError,
    SplitSpec,
    compute_stats,
    corpus_to_jsonl,
    load_split_assignment,
    parse_corpus,
    split_corpus,
    split_corpus_by_assignment,
)
from .evaluation import (
    EvaluationError,
    confusion_matrix,
    gold_from_corpus,
    rank_models,
    report_from_confusion,
)
from .features import (
    FeatureConfig,
    FeatureError,
    extract,
    feature_table_to_tsv,
    read_feature_config,
)
from .fixtures import METRIC_NAMES, ScoreRow, data_path, read_score_csv, system_config_path
from .importance import ImportanceError, permutation_importance
from .models import (
    ALGORITHMS,
    ModelError,
    load_model,
    make_hyperparams,
    model_to_dict,
    train_model,
)
from .predfile import PredictionFileError, predictions_to_tsv, read_prediction_file
from .synth import SynthSpec, generate_corpus

_ERRORS = (
    CorpusError,
    EvaluationError,
    FeatureError,
    ImportanceError,
    ModelError,
    PredictionFileError,
    analysis.AnalysisError,
    ValueError,
    OSError,
)

ENV_DATA_DIR = "REFFORM_DATA_DIR"


def _resolve_corpus_path(path: str) -> Path:
    candidate = Path(path)
    if candidate.exists():
        return candidate
    root = os.environ.get(ENV_DATA_DIR)
    if root and not candidate.is_absolute():
        fallback = Path(root) / candidate
        if fallback.exists():
            return fallback
    return candidate


def _load_corpus(path: str, include_empty: bool = False) -> Corpus:
    return parse_corpus(_resolve_corpus_path(path), include_empty=include_empty)


def _load_config(spec: str, subsequent_only: bool | None) -> FeatureConfig:
    path = Path(spec)
    if not path.exists() and "/" not in spec and "\\" not in spec:
        bundled = system_config_path(spec)
        if bundled.exists():
            path = bundled
    config = read_feature_config(path)
    if subsequent_only:
        config = FeatureConfig(
            system_name=config.system_name,
            features=config.features,
            subsequent_only=True,
            clamps=config.clamps,
        )
    return config


def _parse_hyper(pairs: list[str] | None) -> dict:
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ModelError(f"--hyper expects key=value, got '{pair}'")
        key, _, raw = pair.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        overrides[key] = value
    return overrides


def _parse_ratios(raw: str) -> tuple[float, float, float]:
    parts = raw.split(",")
    if len(parts) != 3:
        raise CorpusError(f"--ratios expects three comma-separated numbers, got '{raw}'")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


def cmd_stats(args) -> int:
    corpus = _load_corpus(args.corpus, include_empty=args.include_empty)
    stats = compute_stats(corpus)
    print(f"corpus: {corpus.name}")
    print(f"documents: {stats.n_docs}")
    print(f"mentions: {stats.n_mentions}")
    print(f"mean words/doc: {stats.mean_words:.2f}")
    print(f"mean sentences/doc: {stats.mean_sentences:.2f}")
    print(f"mean paragraphs/doc: {stats.mean_paragraphs:.2f}")
    print(f"mean referents/doc: {stats.mean_chains:.2f}")
    for label, pct in stats.form_pct.items():
        print(f"{label}: {pct:.2f}%")
    if args.out:
        out = Path(args.out)
        fileio.write_json(out / "stats.json", stats.to_dict())
        figures.plot_form_distribution(
            stats.form_pct, f"form distribution: {corpus.name}",
            out / "form_distribution.png",
        )
    return 0


def cmd_split(args) -> int:
    corpus = _load_corpus(args.corpus, include_empty=args.include_empty)
    if args.assignment:
        assignment = load_split_assignment(args.assignment)
        parts = split_corpus_by_assignment(corpus, assignment)
    else:
        ratios = _parse_ratios(args.ratios)
        parts = split_corpus(corpus, SplitSpec(*ratios, seed=args.seed))
    out = Path(args.out)
    realized = []
    for part, sub in zip(("train", "dev", "test"), parts):
        fileio.write_text(out / f"{part}.jsonl", corpus_to_jsonl(sub))
        realized.extend(f"{doc.doc_id}\t{part}" for doc in sub.documents)
        print(f"{part}: {len(sub.documents)} documents")
    fileio.write_text(out / "assignment.tsv", "\n".join(realized) + "\n")
    return 0


def cmd_featurize(args) -> int:
    corpus = _load_corpus(args.corpus, include_empty=args.include_empty)
    config = _load_config(args.config, args.subsequent_only)
    table = extract(corpus, config, jobs=args.jobs)
    fileio.write_text(args.out, feature_table_to_tsv(table))
    print(f"wrote {len(table)} rows x {len(table.feature_names)} features to {args.out}")
    return 0


def cmd_train(args) -> int:
    corpus = _load_corpus(args.corpus, include_empty=args.include_empty)
    config = _load_config(args.config, args.subsequent_only)
    table = extract(corpus, config, jobs=args.jobs)
    overrides = _parse_hyper(args.hyper)
    params_cls = ALGORITHMS[args.algorithm].params_cls if args.algorithm in ALGORITHMS else None
    if (
        args.seed is not None
        and params_cls is not None
        and "seed" in params_cls.__dataclass_fields__
        and "seed" not in overrides
    ):
        overrides["seed"] = args.seed
    hp = make_hyperparams(args.algorithm, overrides)
    model = train_model(table, args.algorithm, hp, feature_config=config)
    fileio.write_text(
        args.out, json.dumps(model_to_dict(model), sort_keys=True) + "\n"
    )
    print(f"trained {args.algorithm} on {len(table)} rows; wrote {args.out}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    corpus = _load_corpus(args.corpus, include_empty=args.include_empty)
    table = extract(corpus, model.feature_config, jobs=args.jobs)
    predictions = model.predict_table(table)
    gold = {(row.doc_id, row.mention_id): row.gold for row in table.rows}
    fileio.write_text(args.out, predictions_to_tsv(predictions, gold))
    print(f"wrote {len(predictions)} predictions to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    predictions, file_gold = read_prediction_file(args.predictions)
    corpus = _load_corpus(args.corpus, include_empty=args.include_empty)
    gold = gold_from_corpus(corpus, subsequent_only=args.subsequent_only)
    mismatched = [
        key for key, form in file_gold.items() if key in gold and gold[key] is not form
    ]
    if mismatched:
        listed = ", ".join(f"{d}/{m}" for d, m in sorted(mismatched)[:10])
        raise EvaluationError(
            f"gold labels in the prediction file disagree with the corpus: {listed}"
        )
    matrix = confusion_matrix(predictions, gold)
    report = report_from_confusion(matrix)
    print(report.format_table(), end="")
    if args.out:
        out = Path(args.out)
        fileio.write_text(out, report.to_json())
        figures.plot_confusion(
            matrix, [form.value for form in CLASS_FORMS],
            f"confusion: {corpus.name}", out.with_suffix(".png"),
        )
    return 0


def _score_rows(args) -> list[ScoreRow]:
    if args.reports:
        rows = []
        for model_name, corpus_name, path in args.reports:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
            rows.append(
                ScoreRow(
                    model=model_name,
                    corpus=corpus_name,
                    n_test=int(data["n"]),
                    accuracy=float(data["accuracy"]),
                    macro_f1=float(data["macro_f1"]),
                    weighted_f1=float(data["weighted_f1"]),
                )
            )
        return rows
    path = args.scores or data_path("benchmark_scores.csv")
    return read_score_csv(path)


def cmd_compare(args) -> int:
    rows = _score_rows(args)
    corpora = list(dict.fromkeys(row.corpus for row in rows))
    models_by_corpus = {
        c: [row.model for row in rows if row.corpus == c] for c in corpora
    }
    by_key = {(row.model, row.corpus): row for row in rows}
    if len(corpora) < 2:
        raise analysis.AnalysisError("compare needs scores from at least 2 corpora")

    pairs = [
        (a, b) for i, a in enumerate(corpora) for b in corpora[i + 1:]
    ]
    prior = tuple(float(x) for x in args.prior.split(",")) if args.prior else analysis.DEFAULT_PRIOR

    corr_lines = ["pair,metric,r_s,p_value,n,tie_corrected"]
    grid = np.full((len(pairs), len(METRIC_NAMES)), np.nan)
    print(f"{'pair':10s}{'metric':14s}{'r_s':>10s}{'p':>10s}")
    for i, (a, b) in enumerate(pairs):
        shared = [m for m in models_by_corpus[a] if (m, b) in by_key]
        if len(shared) < 3:
            raise analysis.AnalysisError(
                f"corpora {a}/{b} share only {len(shared)} models; need >= 3"
            )
        for j, metric in enumerate(METRIC_NAMES):
            x = [by_key[(m, a)].metric(metric) for m in shared]
            y = [by_key[(m, b)].metric(metric) for m in shared]
            result = analysis.spearman(x, y)
            grid[i, j] = result.r_s
            corr_lines.append(
                f"{a}/{b},{metric},{result.r_s!r},{result.p_value!r},"
                f"{result.n},{str(result.tie_corrected).lower()}"
            )
            print(f"{a + '/' + b:10s}{metric:14s}{result.r_s:10.4f}{result.p_value:10.4f}")

    ranking_lines = []
    for corpus_name in corpora:
        for metric in METRIC_NAMES:
            scores = [
                (m, by_key[(m, corpus_name)].metric(metric))
                for m in models_by_corpus[corpus_name]
            ]
            ranking = rank_models(scores, metric)
            ranking_lines.append(f"{corpus_name} {metric}: {ranking.render()}")
    print()
    print("\n".join(ranking_lines))

    if args.out:
        out = Path(args.out)
        fileio.write_text(out / "correlations.csv", "\n".join(corr_lines) + "\n")
        fileio.write_text(out / "rankings.txt", "\n".join(ranking_lines) + "\n")
        figures.plot_correlation_grid(
            [f"{a}/{b}" for a, b in pairs], list(METRIC_NAMES), grid,
            "rank correlation across corpora", out / "correlations.png",
        )
        for corpus_name in corpora:
            models = models_by_corpus[corpus_name]
            size = len(models)
            bf = np.zeros((size, size))
            log_bf = np.zeros((size, size))
            for i, m1 in enumerate(models):
                for j, m2 in enumerate(models):
                    r1, r2 = by_key[(m1, corpus_name)], by_key[(m2, corpus_name)]
                    result = analysis.bayes_factor_accuracy(
                        analysis.counts_from_accuracy(r1.accuracy, r1.n_test), r1.n_test,
                        analysis.counts_from_accuracy(r2.accuracy, r2.n_test), r2.n_test,
                        prior=prior,
                    )
                    bf[i, j] = result.bf10
                    log_bf[i, j] = result.log_bf10
            lines = ["model," + ",".join(models)]
            for i, m1 in enumerate(models):
                lines.append(m1 + "," + ",".join(repr(v) for v in bf[i]))
            fileio.write_text(out / f"bf_{corpus_name}.csv", "\n".join(lines) + "\n")
            figures.plot_bf_matrix(
                models, log_bf, f"accuracy Bayes factors: {corpus_name}",
                out / f"bf_{corpus_name}.png",
            )
    return 0


def cmd_importance(args) -> int:
    corpus = _load_corpus(args.corpus, include_empty=args.include_empty)
    config = _load_config(args.config, args.subsequent_only)
    ratios = _parse_ratios(args.ratios)
    train_part, dev_part, _ = split_corpus(
        corpus, SplitSpec(*ratios, seed=args.seed)
    )
    train_table = extract(train_part, config, jobs=args.jobs)
    dev_table = extract(dev_part, config, jobs=args.jobs)
    overrides = _parse_hyper(args.hyper)
    if "seed" not in overrides:
        overrides["seed"] = args.seed
    hp = make_hyperparams("gbt", overrides)
    model = train_model(train_table, "gbt", hp, feature_config=config)
    ranking = permutation_importance(
        model, dev_table, metric=args.metric, n_repeats=args.repeats, seed=args.seed
    )
    print(f"baseline {ranking.metric} on dev: {ranking.baseline:.4f}")
    for name, mean, _ in ranking.entries:
        print(f"{name:22s}{mean:+.4f}")
    out = Path(args.out)
    fileio.write_text(out / "importance.csv", ranking.to_csv())
    fileio.write_text(out / "importance_long.csv", ranking.to_long_csv())
    figures.plot_importance(
        ranking, f"permutation importance ({corpus.name})", out / "importance.png"
    )
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(
        n_docs=args.docs,
        seed=args.seed,
        rules=args.rules,
        noise=args.noise,
        empty_rate=args.empty_rate,
    )
    corpus, manifest = generate_corpus(spec)
    out = Path(args.out)
    fileio.write_text(out / "corpus.jsonl", corpus_to_jsonl(corpus))
    fileio.write_json(out / "manifest.json", manifest)
    print(
        f"wrote {spec.n_docs} documents, {manifest['stats']['n_mentions']} mentions "
        f"to {out / 'corpus.jsonl'}"
    )
    return 0


def _add_common(parser, *, corpus=True, jobs=False):
    if corpus:
        parser.add_argument("--corpus", required=True, help="corpus JSONL path")
        parser.add_argument(
            "--include-empty", action="store_true",
            help="keep mentions with form 'empty'",
        )
    if jobs:
        parser.add_argument("--jobs", type=int, default=1,
                            help="parallel workers (never changes outputs)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refform",
        description="Referential-form selection benchmark toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="corpus statistics")
    _add_common(p)
    p.add_argument("--out", help="output directory for stats.json + figure")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="document-wise split")
    _add_common(p)
    p.add_argument("--ratios", default="0.85,0.05,0.10")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--assignment", help="two-column TSV doc_id<TAB>split")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("featurize", help="extract a feature table")
    _add_common(p, jobs=True)
    p.add_argument("--config", required=True,
                   help="feature config path or bundled system name")
    p.add_argument("--subsequent-only", action="store_true")
    p.add_argument("--out", required=True, help="output TSV path")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train a classifier")
    _add_common(p, jobs=True)
    p.add_argument("--config", required=True)
    p.add_argument("--algorithm", required=True, choices=sorted(ALGORITHMS))
    p.add_argument("--hyper", action="append", metavar="KEY=VALUE")
    p.add_argument("--seed", type=int)
    p.add_argument("--subsequent-only", action="store_true")
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write the prediction TSV")
    _add_common(p, jobs=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a prediction file")
    _add_common(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--subsequent-only", action="store_true")
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="correlations + Bayes factor matrices")
    p.add_argument("--scores", help="score CSV (default: bundled benchmark)")
    p.add_argument(
        "--report", dest="reports", action="append", nargs=3,
        metavar=("MODEL", "CORPUS", "REPORT_JSON"),
        help="add one evaluation report to the score table",
    )
    p.add_argument("--prior", help="Beta prior a,b for the BF model")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("importance", help="permutation feature importance")
    _add_common(p, jobs=True)
    p.add_argument("--config", default="gbt")
    p.add_argument("--metric", choices=("accuracy", "macro_f1"), default="macro_f1")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--ratios", default="0.85,0.05,0.10")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hyper", action="append", metavar="KEY=VALUE")
    p.add_argument("--subsequent-only", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--docs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rules", choices=("default", "role_only"), default="default")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--empty-rate", type=float, default=0.0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ERRORS as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
