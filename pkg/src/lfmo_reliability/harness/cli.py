"""Command-line entry point: ``lfmo <experiment> --config PATH``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import LfmoError
from .config import KINDS, ConfigError, load_config
from .experiments import run_experiment

log = logging.getLogger("lfmo")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lfmo",
        description="Run reliability experiments for mixed coherent systems with LFMO lifetimes.",
    )
    sub = parser.add_subparsers(dest="kind", required=True, metavar="EXPERIMENT")
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind}")
        p.add_argument("--config", required=True, type=Path, help="experiment config (YAML)")
        p.add_argument("--out", type=Path, help="CSV output path (default: config 'output', else stdout)")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--workers", type=int, help="worker processes (results do not depend on this)")
        p.add_argument("--full-scale", action="store_true", help="use full-scale sample sizes (S=1000, R=1000, N=100000)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        updates = {}
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed: must be an unsigned 64-bit integer")
            updates["seed"] = args.seed
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers: must be at least 1")
            updates["workers"] = args.workers
        if args.full_scale:
            updates["full_scale"] = True
        cfg = cfg.model_copy(update=updates)
        log.info("running %s with seed %d", args.kind, cfg.seed)
        table = run_experiment(args.kind, cfg, base=args.config.parent)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LfmoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    out = args.out or (Path(cfg.output) if cfg.output else None)
    if out is None:
        sys.stdout.write(table.to_csv())
    else:
        if not out.is_absolute() and args.out is None:
            out = args.config.parent / out
        table.write(out)
        log.info("wrote %d rows to %s", len(table.rows), out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
