"""Command-line entry point.

Commands:
    score           score a protocol against a corpus (JSON report or CSV row)
    validate-corpus leave-one-out separation test, one JSON document per k
    error-report    weighted-mean approximation error for a category profile
    inspect         corpus summary (count, dimension, base rate, categories)

Exit codes: 0 success, 1 bad data (unreadable or invalid input files),
2 usage errors. Errors are printed to stderr as one JSON line. All
randomness is governed by --seed (fallback: the MOCET_SEED environment
variable, then 0), so identical invocations produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Any

from .corpus import load_corpus, load_protocol, validate_corpus
from .engine import DEFAULT_TRIALS, ScoreConfig, score_protocol
from .error_analysis import approximation_report, load_profile
from .knn import DEFAULT_K, METRICS, build_index
from .validation import k_sweep


def _diagnostic(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        _diagnostic("usage", message)
        raise SystemExit(2)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _k_list(text: str) -> list[int]:
    try:
        ks = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not ks or any(k < 1 for k in ks):
        raise argparse.ArgumentTypeError(f"k values must be positive integers, got {text!r}")
    return ks


def _default_seed() -> int:
    raw = os.environ.get("MOCET_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        _diagnostic("usage", f"MOCET_SEED must be an integer, got {raw!r}")
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mocet", description="MOCET risk scoring")
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser("score", help="score a protocol against a corpus")
    score.add_argument("--corpus", required=True, help="corpus file (JSON lines)")
    score.add_argument("--protocol", required=True, help="protocol file (JSON)")
    score.add_argument("--k", type=_positive_int, default=DEFAULT_K)
    score.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS)
    score.add_argument("--seed", type=int, default=None)
    score.add_argument("--metric", choices=METRICS, default="euclidean")
    score.add_argument("--format", choices=("json", "csv"), default="json")
    score.add_argument("--out", default=None, help="output path (default: stdout)")

    validate = sub.add_parser("validate-corpus", help="leave-one-out separation test")
    validate.add_argument("--corpus", required=True)
    validate.add_argument("--k", type=_k_list, default=[DEFAULT_K],
                          help="comma-separated neighborhood sizes, e.g. 10,20,40")
    validate.add_argument("--metric", choices=METRICS, default="euclidean")
    validate.add_argument("--out", default=None)

    error_report = sub.add_parser("error-report", help="weighted-mean approximation error")
    error_report.add_argument("--profile", required=True,
                              help='profile file: {"groups": [{"n": 5, "p": 0.9}, ...]}')
    error_report.add_argument("--out", default=None)

    inspect = sub.add_parser("inspect", help="summarize a corpus")
    inspect.add_argument("--corpus", required=True)
    inspect.add_argument("--out", default=None)

    return parser


def _config_echo(args: argparse.Namespace, seed: int | None = None) -> dict[str, Any]:
    """Full run configuration, embedded in every emitted document."""
    return {
        "command": args.command,
        "corpus": getattr(args, "corpus", None),
        "protocol": getattr(args, "protocol", None),
        "profile": getattr(args, "profile", None),
        "k": getattr(args, "k", None),
        "trials": getattr(args, "trials", None),
        "seed": seed,
        "metric": getattr(args, "metric", None),
        "format": getattr(args, "format", None),
        "out": getattr(args, "out", None),
    }


def _run_score(args: argparse.Namespace) -> str:
    seed = args.seed if args.seed is not None else _default_seed()
    with open(args.corpus, encoding="utf-8") as handle:
        corpus = load_corpus(handle)
    with open(args.protocol, encoding="utf-8") as handle:
        protocol = load_protocol(handle)
    config = ScoreConfig(k=args.k, trials=args.trials, seed=seed, metric=args.metric)
    index = build_index(corpus, args.metric) if len(corpus) else None
    report = score_protocol(protocol, index, config)
    if args.format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["scenario", "e_y", "mocet", "cumulative_mocet", "k", "trials", "seed"])
        writer.writerow([
            report.scenario,
            report.e_y_closed_form,
            report.mocet,
            report.cumulative_mocet,
            config.k,
            config.trials,
            config.seed,
        ])
        return buffer.getvalue()
    document = {"config_echo": _config_echo(args, seed)}
    document.update(report.as_dict())
    return json.dumps(document, ensure_ascii=False, indent=2) + "\n"


def _run_validate(args: argparse.Namespace) -> str:
    with open(args.corpus, encoding="utf-8") as handle:
        corpus = load_corpus(handle)
    results = k_sweep(corpus, args.k, args.metric)
    echo = _config_echo(args)
    lines = []
    for result in results:
        document = {"config_echo": echo}
        document.update(result.as_dict())
        lines.append(json.dumps(document, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def _run_error_report(args: argparse.Namespace) -> str:
    with open(args.profile, encoding="utf-8") as handle:
        profile = load_profile(handle)
    report = approximation_report(profile)
    document = {"config_echo": _config_echo(args)}
    document.update(report.as_dict())
    return json.dumps(document, ensure_ascii=False, indent=2) + "\n"


def _run_inspect(args: argparse.Namespace) -> str:
    with open(args.corpus, encoding="utf-8") as handle:
        corpus = load_corpus(handle)
    report = validate_corpus(corpus)
    document = {"config_echo": _config_echo(args)}
    document.update(report.as_dict())
    return json.dumps(document, ensure_ascii=False, indent=2) + "\n"


_RUNNERS = {
    "score": _run_score,
    "validate-corpus": _run_validate,
    "error-report": _run_error_report,
    "inspect": _run_inspect,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = _RUNNERS[args.command](args)
    except (ValueError, OSError) as exc:
        _diagnostic("data", str(exc))
        return 1
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
