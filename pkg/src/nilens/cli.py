"""Batch experiment runner.

Usage: ``nilens <experiment> [--config FILE] [--out FILE] [--tolerance X]
[--threads N] [--no-figure]``.  The experiment name selects what to
compute; the config file refines geometry, materials and sweep grids.
Results are written as CSV with a metadata header, plus a rendered figure
next to the CSV for multi-row tables.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import EXPERIMENTS, parse_config
from .errors import ConfigError, NumericsError
from .runner import run_experiment, write_table

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nilens",
        description="Slab-lens collective-emission experiments",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, help="config file (key = value)")
        p.add_argument("--out", type=Path, help="output CSV path")
        p.add_argument(
            "--tolerance", type=float,
            help="relative quadrature tolerance override",
        )
        p.add_argument(
            "--threads", type=int, default=1,
            help="worker threads for sweep points (default 1)",
        )
        p.add_argument(
            "--no-figure", action="store_true",
            help="skip rendering the figure next to the CSV",
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1

    try:
        cfg = parse_config(text, name=args.experiment)
        if args.tolerance is not None:
            if args.tolerance <= 0.0:
                raise ConfigError("--tolerance must be positive")
            cfg = replace(
                cfg, quadrature=replace(cfg.quadrature, rel_tol=args.tolerance)
            )
        if args.out is not None:
            cfg = replace(cfg, output=str(args.out))
        if cfg.output is None:
            cfg = replace(cfg, output=f"{cfg.name}.csv")
    except ConfigError as exc:
        for violation in exc.violations:
            print(f"config error: {violation}", file=sys.stderr)
        return 1

    try:
        table = run_experiment(cfg, threads=args.threads)
        write_table(table, cfg.output)
    except ConfigError as exc:
        for violation in exc.violations:
            print(f"config error: {violation}", file=sys.stderr)
        return 1
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {cfg.output}")

    if not args.no_figure:
        from .figures import render_figure

        figure_path = Path(cfg.output).with_suffix(".png")
        if render_figure(table, figure_path):
            print(f"wrote {figure_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
