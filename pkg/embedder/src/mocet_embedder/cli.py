"""Command-line embedding: texts in, corpus records out.

    mocet-embed --in texts.jsonl --out corpus.jsonl --model all-mpnet-base-v2 --batch 32

Exit codes: 0 success, 1 bad data or unavailable model, 2 usage errors.
Diagnostics are single JSON lines on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .encoders import DEFAULT_MODEL, EmbedError
from .pipeline import EmbedJob, embed_texts


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


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mocet-embed", description="embed step texts into corpus records")
    parser.add_argument("--in", dest="input_path", required=True, help="input JSON lines")
    parser.add_argument("--out", dest="output_path", required=True, help="output corpus file")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="model name, or hash:<dim> for the offline encoder")
    parser.add_argument("--batch", type=_positive_int, default=32)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = EmbedJob(
            input_path=args.input_path,
            output_path=args.output_path,
            model=args.model,
            batch_size=args.batch,
        )
        count = embed_texts(job)
    except (EmbedError, OSError) as exc:
        _diagnostic("data", str(exc))
        return 1
    print(json.dumps({"records_written": count, "model": job.model,
                      "out": job.output_path}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
