"""Command-line sweep runner: configure, run, write CSV, print a summary."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .harness import (DEFAULT_SWEEP_VALUES, ExperimentConfig, SWEEP_FIELDS,
                      format_summary, run_sweep)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlcnoma",
        description="Max-min rate sweeps for NOMA-enabled centralized VLC networks.")
    parser.add_argument("--config", metavar="PATH", help="JSON config with ExperimentConfig keys")
    parser.add_argument("--scheme", choices=["imposed", "not-imposed", "both"])
    parser.add_argument("--sweep", choices=sorted(SWEEP_FIELDS))
    parser.add_argument("--values", help="comma-separated sweep values (default: full grid)")
    parser.add_argument("--realizations", type=int)
    parser.add_argument("--seed", type=int, dest="master_seed")
    parser.add_argument("--optimizer", choices=["sa", "ts"])
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", metavar="PATH", help="result CSV path")
    return parser


def config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for name in ("scheme", "sweep", "realizations", "master_seed", "optimizer", "workers"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.values is not None:
        overrides["values"] = tuple(float(v) for v in args.values.split(","))
    return dataclasses.replace(cfg, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        rows = run_sweep(cfg, out_path=args.out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(format_summary(rows))
    if args.out:
        print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
