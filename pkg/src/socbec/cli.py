"""Command-line entry point.

    socbec run <config-file> [--out DIR] [--threads N]
    socbec validate <config-file>

Exit codes: 0 success, 1 usage/parse error, 2 solver failure.  --threads
falls back to the SOCBEC_THREADS environment variable, then 1.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, load_config
from .runner import EXIT_OK, EXIT_USAGE, run


def _default_threads() -> int:
    env = os.environ.get("SOCBEC_THREADS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socbec",
        description="Spectral ground-state and dynamics runs for "
                    "spin-orbit-coupled two-component condensates",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to the config file")
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads for sweep fan-out "
                            "(default: SOCBEC_THREADS or 1)")
    p_val = sub.add_parser("validate", help="parse and validate a config")
    p_val.add_argument("config", help="path to the config file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the CLI contract reserves 2 for
        # solver failures
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "validate":
        print(f"{args.config}: ok ({config.mode} mode, {config.grid!r})")
        return EXIT_OK
    threads = args.threads if args.threads is not None else _default_threads()
    return run(config, out_dir=args.out, threads=threads)


if __name__ == "__main__":
    sys.exit(main())
