"""Command-line entry point.

Exit codes: 0 success, 1 I/O failure, 2 schema or configuration problem.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import __version__
from .ingestion import load_config_document, load_dataset, load_schema_document
from .pipeline import run_pipeline
from .recommend import recommend
from .report import emit_report
from .types import ConfigError, SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensorprofiler",
        description="Profile timestamped sensor exports: quality indicators, "
        "six-dimension scores, and preprocessing recommendations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="profile one delimited export")
    p.add_argument("--input", required=True, help="delimited text file with a header row")
    p.add_argument("--schema", required=True, help="feature schema JSON document")
    p.add_argument("--config", required=True, help="profiler config JSON document")
    p.add_argument("--out", help="report path (stdout when omitted)")
    p.add_argument("--format", choices=("machine", "human"), default="machine")
    p.add_argument("--delimiter", help="override the configured cell delimiter")
    p.add_argument("--timestamp-column", help="override the configured timestamp column")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized diagnostics")
    return parser


def _score_summary(profile) -> str:
    s = profile.scores

    def num(v):
        if v is None:
            return "n/a"
        if isinstance(v, float) and math.isinf(v):
            return "+inf"
        if isinstance(v, float):
            return format(v, ".6g")
        return str(v)

    return (
        f"{profile.name}: vol={num(s.vol)} varie={num(s.varie)} vel={num(s.vel)}s "
        f"ver={num(s.ver)} val={num(s.val)} varia={num(s.varia)}"
    )


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_config_document(
            args.config,
            delimiter=args.delimiter,
            timestamp_column=args.timestamp_column,
        )
        schema = load_schema_document(args.schema)
    except (ConfigError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: bad JSON document: {exc}", file=sys.stderr)
        return 2

    try:
        ds = load_dataset(args.input, schema, config)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    profile = run_pipeline(ds, config)
    profile.log.append(f"diagnostics seed {args.seed}")
    recs = recommend(profile, config)
    text = emit_report(profile, recs, fmt=args.format)

    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
                if not text.endswith("\n"):
                    fh.write("\n")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return 1
        print(_score_summary(profile))
    else:
        print(text)
        print(_score_summary(profile), file=sys.stderr)
    return 0


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
