"""Command-line entry point wiring the pipeline end to end.

Subcommands: ingest, analyze, score, evaluate, synth.  Settings come from
flags, an optional JSON config file, and built-in defaults, in that order
of precedence.  Exit codes: 0 success, 1 usage error, 2 data error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import graph as graph_mod
from .correlation import CORRELATION_MODES, correlation_matrix_to_csv
from .dfp import EFFECTIVE_DFP_RULES
from .errors import ChangeRiskError, ConfigError, DataError
from .evaluate import confusion, f_measure, metrics, precision_alt, split
from .ingest import (LINK_MODES, change_requests_to_jsonl, link_revisions,
                     parse_change_requests, parse_revision_log,
                     revisions_to_jsonl)
from .model import FaultPronenessClassifier, ReportScorer
from .synth import DEFAULT_KIND_WEIGHTS, SynthConfig, generate
from .taxonomy import load_rules
from .textprep import load_stop_words

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

DEFAULTS = {
    "requests_format": "jsonl",
    "revisions_format": "jsonl",
    "correlation_mode": "standard",
    "hits_mode": "converged",
    "tolerance": graph_mod.DEFAULT_TOLERANCE,
    "max_hits_iterations": graph_mod.DEFAULT_MAX_ITER,
    "k": "auto",
    "seed": 0,
    "effective_dfp": "max",
    "link_mode": "both",
    "min_token_overlap": 2,
    "id_patterns": None,
    "stop_words": None,
    "rules": None,
    "stemmer": "suffix",
    "use_correlation": True,
    "train_fraction": 0.8,
}

_CONFIG_KEYS = frozenset(DEFAULTS)


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so main() controls the exit code."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _k_value(text: str):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"k must be an integer or 'auto', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="changerisk",
                     description="Fault-proneness analysis of change "
                                 "requests from revision history")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="command")

    p_ingest = sub.add_parser("ingest", help="normalize and link input files")
    _add_corpus_args(p_ingest)
    _add_pipeline_args(p_ingest)
    p_ingest.add_argument("--out-requests", help="write normalized requests here")
    p_ingest.add_argument("--out-revisions",
                          help="write linked revisions here (default stdout)")
    p_ingest.set_defaults(func=cmd_ingest)

    p_analyze = sub.add_parser("analyze", help="run the full pipeline and "
                                               "write the analysis report")
    _add_corpus_args(p_analyze)
    _add_pipeline_args(p_analyze)
    p_analyze.add_argument("--out", help="report path (default stdout)")
    p_analyze.add_argument("--classifications-csv",
                           help="also write request_id,dfp,class rows here")
    p_analyze.add_argument("--correlation-csv",
                           help="also export the correlation matrix here")
    p_analyze.add_argument("--graph-dump",
                           help="also dump graph edges as jsonl here")
    p_analyze.set_defaults(func=cmd_analyze)

    p_score = sub.add_parser("score", help="classify new requests against a "
                                           "stored analysis report")
    p_score.add_argument("--report", required=True,
                         help="report written by analyze")
    p_score.add_argument("--requests", required=True,
                         help="new change requests to classify")
    p_score.add_argument("--requests-format", choices=("jsonl", "csv"),
                         default=None)
    p_score.add_argument("--config", default=None)
    p_score.add_argument("--out", help="output path (default stdout)")
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("evaluate", help="holdout comparison of the "
                                             "correlated and baseline scorers")
    _add_corpus_args(p_eval)
    _add_pipeline_args(p_eval)
    p_eval.add_argument("--train-fraction", type=float, default=None)
    p_eval.add_argument("--out", help="JSON report path (default stdout)")
    p_eval.add_argument("--metrics-csv",
                        help="write method,accuracy,precision,recall,"
                             "f_measure rows here")
    p_eval.add_argument("--comparison-csv",
                        help="write plot-ready method,metric,value rows here")
    p_eval.set_defaults(func=cmd_evaluate)

    p_synth = sub.add_parser("synth", help="generate a synthetic corpus")
    p_synth.add_argument("--out-dir", required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--num-requests", type=int, default=100)
    p_synth.add_argument("--num-blocks", type=int, default=400)
    p_synth.add_argument("--kind", action="append", dest="kinds", default=None,
                         metavar="LABEL=WEIGHT",
                         help="mixture component; repeat for several kinds")
    p_synth.add_argument("--planted", action="append", default=None,
                         metavar="LABEL", help="fault-prone kind; repeatable")
    p_synth.add_argument("--multiplier", type=int, default=5,
                         help="revision multiplier for planted kinds")
    p_synth.add_argument("--blocks-per-request", nargs=2, type=int,
                         default=(1, 3), metavar=("LOW", "HIGH"))
    p_synth.add_argument("--revision-rate", type=float, default=0.5)
    p_synth.set_defaults(func=cmd_synth)

    return parser


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--requests", required=True, help="change-request file")
    p.add_argument("--requests-format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--revisions", required=True, help="revision log file")
    p.add_argument("--revisions-format",
                   choices=("jsonl", "cvs_rlog", "git_log"), default=None)


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None,
                   help="JSON settings file; flags win over it")
    p.add_argument("--correlation-mode", choices=CORRELATION_MODES,
                   default=None)
    p.add_argument("--hits-mode", choices=graph_mod.HITS_MODES, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--max-hits-iterations", type=int, default=None)
    p.add_argument("--k", type=_k_value, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--effective-dfp", choices=EFFECTIVE_DFP_RULES,
                   default=None)
    p.add_argument("--link-mode", choices=LINK_MODES, default=None)
    p.add_argument("--min-token-overlap", type=int, default=None)
    p.add_argument("--id-pattern", action="append", dest="id_patterns",
                   default=None, help="explicit-id regex; repeatable")
    p.add_argument("--stop-words", default=None, help="stop-word override file")
    p.add_argument("--rules", default=None, help="taxonomy rules file")
    p.add_argument("--stemmer", choices=("suffix", "porter"), default=None)
    p.add_argument("--no-correlation", action="store_true",
                   help="replace clustering with singleton sets (baseline)")


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError("unknown config keys: " + ", ".join(unknown))
    return data


def _setting(args: argparse.Namespace, config: dict, key: str):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return DEFAULTS[key]


def _use_correlation(args: argparse.Namespace, config: dict) -> bool:
    if getattr(args, "no_correlation", False):
        return False
    return bool(config.get("use_correlation", True))


def _build_model(args: argparse.Namespace, config: dict, *,
                 use_correlation: bool | None = None) -> FaultPronenessClassifier:
    stemmer = _setting(args, config, "stemmer")
    stop_path = _setting(args, config, "stop_words")
    rules_path = _setting(args, config, "rules")
    return FaultPronenessClassifier(
        correlation_mode=_setting(args, config, "correlation_mode"),
        hits_mode=_setting(args, config, "hits_mode"),
        tolerance=_setting(args, config, "tolerance"),
        max_hits_iterations=_setting(args, config, "max_hits_iterations"),
        k=_setting(args, config, "k"),
        seed=_setting(args, config, "seed"),
        effective_dfp=_setting(args, config, "effective_dfp"),
        link_mode=_setting(args, config, "link_mode"),
        min_token_overlap=_setting(args, config, "min_token_overlap"),
        id_patterns=_setting(args, config, "id_patterns"),
        stop_words=load_stop_words(stop_path) if stop_path else None,
        rules=load_rules(rules_path, stemmer=stemmer) if rules_path else None,
        stemmer=stemmer,
        use_correlation=(_use_correlation(args, config)
                         if use_correlation is None else use_correlation),
    )


def _read_corpus(args: argparse.Namespace, config: dict):
    with open(args.requests, "rb") as fh:
        crs = parse_change_requests(fh, _setting(args, config,
                                                 "requests_format"))
    with open(args.revisions, "rb") as fh:
        events = parse_revision_log(fh, _setting(args, config,
                                                 "revisions_format"))
    return crs, events


def _write_output(path: str | None, data: str | bytes) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def cmd_ingest(args: argparse.Namespace, config: dict) -> int:
    crs, events = _read_corpus(args, config)
    model = _build_model(args, config)
    linked = []
    if events:
        linked = link_revisions(
            events, crs, model.link_mode,
            id_patterns=model._resolved_patterns(),
            min_overlap=model.min_token_overlap,
            stop_words=model.stop_words, stemmer=model.stemmer)
    if args.out_requests:
        _write_output(args.out_requests, change_requests_to_jsonl(crs))
    _write_output(args.out_revisions, revisions_to_jsonl(linked))
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace, config: dict) -> int:
    crs, events = _read_corpus(args, config)
    model = _build_model(args, config)
    model.fit(crs, events)
    report = model.to_report_dict()
    _write_output(args.out, json.dumps(report, sort_keys=True, indent=2) + "\n")
    if args.classifications_csv:
        _write_output(args.classifications_csv,
                      model.report_.classifications_csv())
    if args.correlation_csv:
        if model.correlation_matrix_ is None:
            raise ConfigError("--correlation-csv requires correlation "
                              "(drop --no-correlation)")
        _write_output(args.correlation_csv,
                      correlation_matrix_to_csv(model.correlation_matrix_))
    if args.graph_dump:
        _write_output(args.graph_dump, model.graph_.to_jsonl())
    return EXIT_OK


def cmd_score(args: argparse.Namespace, config: dict) -> int:
    try:
        raw = Path(args.report).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read analysis report: {exc}") from exc
    try:
        report = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DataError(f"analysis report is not valid JSON: {exc}",
                        stage="score") from exc
    scorer = ReportScorer.from_report_dict(report)
    with open(args.requests, "rb") as fh:
        crs = parse_change_requests(fh, _setting(args, config,
                                                 "requests_format"))
    lines = []
    for cr in crs:
        value, cls = scorer.score_one(cr)
        lines.append(f"{cr.id},{value!r},{cls}")
    _write_output(args.out, "\n".join(lines) + "\n" if lines else "")
    return EXIT_OK


def _evaluate_one(model: FaultPronenessClassifier, train, train_events, test):
    model.fit(train, train_events)
    predictions = dict(zip((cr.id for cr in test), model.predict(test)))
    truth = {cr.id: bool(cr.ground_truth) for cr in test}
    counts = confusion(predictions, truth)
    m = metrics(counts)
    p_alt = precision_alt(counts)
    return {
        "counts": {"t_plus": counts.t_plus, "f_plus": counts.f_plus,
                   "f_minus": counts.f_minus, "t_minus": counts.t_minus},
        "accuracy": m.accuracy,
        "precision": m.precision,
        "recall": m.recall,
        "f_measure": m.f_measure,
        "precision_alt": p_alt,
        "f_measure_alt": f_measure(p_alt, m.recall),
    }


def cmd_evaluate(args: argparse.Namespace, config: dict) -> int:
    crs, events = _read_corpus(args, config)
    fraction = _setting(args, config, "train_fraction")
    seed = _setting(args, config, "seed")
    train, test = split(crs, fraction, seed)
    unlabeled = sorted(cr.id for cr in test if cr.ground_truth is None)
    if unlabeled:
        raise DataError("test requests lack ground-truth labels: "
                        + ", ".join(unlabeled[:5]), stage="evaluate")

    # keep only history attributable to training requests: link against the
    # training corpus, restrict links to it, drop events linking nothing
    model = _build_model(args, config, use_correlation=True)
    linked = link_revisions(events, train, model.link_mode,
                            id_patterns=model._resolved_patterns(),
                            min_overlap=model.min_token_overlap,
                            stop_words=model.stop_words,
                            stemmer=model.stemmer)
    train_ids = {cr.id for cr in train}
    train_events = []
    for ev in linked:
        kept = tuple(sorted(set(ev.linked_cr_ids) & train_ids))
        if kept:
            train_events.append(dataclasses.replace(ev, linked_cr_ids=kept))

    baseline = _build_model(args, config, use_correlation=False)
    results = {
        "correlated": _evaluate_one(model, train, train_events, test),
        "baseline": _evaluate_one(baseline, train, train_events, test),
    }
    report = {
        "methods": results,
        "split": {"train_size": len(train), "test_size": len(test),
                  "train_fraction": fraction, "seed": seed},
    }
    _write_output(args.out, json.dumps(report, sort_keys=True, indent=2) + "\n")

    metric_names = ("accuracy", "precision", "recall", "f_measure")
    if args.metrics_csv:
        rows = ["method,accuracy,precision,recall,f_measure"]
        for method in ("correlated", "baseline"):
            rows.append(method + "," + ",".join(
                repr(results[method][name]) for name in metric_names))
        _write_output(args.metrics_csv, "\n".join(rows) + "\n")
    if args.comparison_csv:
        rows = ["method,metric,value"]
        for method in ("correlated", "baseline"):
            for name in metric_names:
                rows.append(f"{method},{name},{results[method][name]!r}")
        _write_output(args.comparison_csv, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace, config: dict) -> int:
    weights = dict(DEFAULT_KIND_WEIGHTS)
    if args.kinds:
        weights = {}
        for item in args.kinds:
            label, eq, raw = item.partition("=")
            if not eq:
                raise ConfigError(f"--kind needs LABEL=WEIGHT, got {item!r}")
            try:
                weights[label.strip()] = float(raw)
            except ValueError:
                raise ConfigError(f"--kind weight must be a number, got {raw!r}")
    cfg = SynthConfig(seed=args.seed,
                      num_requests=args.num_requests,
                      num_blocks=args.num_blocks,
                      kind_weights=weights,
                      planted_kinds=tuple(args.planted or ()),
                      planted_multiplier=args.multiplier,
                      blocks_per_request=tuple(args.blocks_per_request),
                      revision_rate=args.revision_rate)
    cr_bytes, rev_bytes, _ = generate(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "changerequests.jsonl").write_bytes(cr_bytes)
    (out_dir / "revisions.jsonl").write_bytes(rev_bytes)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = _load_config(getattr(args, "config", None))
        return args.func(args, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        stage = exc.stage or "data"
        print(f"error in {stage} stage: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ChangeRiskError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
