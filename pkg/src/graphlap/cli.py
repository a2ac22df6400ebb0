"""Command-line entry point.

    graphlap EXPERIMENT --config PATH [--seed N] [--out PREFIX] [--threads N]

Exit status: 0 when the experiment's verdict passes, 2 when it fails and
1 on any error.
"""
from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, parse_config
from .experiments import run
from .results import SUMMARY_HEADER, emit_results, fmt


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphlap",
                                     description="Graph Laplacian limit experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--out", default=None, help="output path prefix")
        p.add_argument("--threads", type=int, default=1, help="worker threads for replications")
    return parser


def _print_summary(result, out):
    print(f"{result.experiment}: {'PASS' if result.passed else 'FAIL'}", file=out)
    print("  ".join(SUMMARY_HEADER), file=out)
    for row in result.summaries:
        cells = []
        for k in SUMMARY_HEADER:
            v = row.get(k)
            cells.append(f"{v:.6g}" if isinstance(v, float) else fmt(v))
        print("  ".join(c if c else "-" for c in cells), file=out)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        print(f"error: config not found: {args.config}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text, args.experiment)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError(["--seed: must be an integer in [0, 2^64)"])
            cfg.seed = args.seed
        if args.threads < 1:
            raise ConfigError(["--threads: must be at least 1"])
        prefix = args.out or cfg.output or f"results/{cfg.experiment}"
        result = run(cfg, threads=args.threads)
        paths = emit_results(result, prefix, cfg, seed_override=args.seed)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as exc:  # surfaced with its message, never as a traceback
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _print_summary(result, sys.stdout)
    for p in paths:
        print(f"wrote {p}")
    return 0 if result.passed else 2


if __name__ == "__main__":
    sys.exit(main())
