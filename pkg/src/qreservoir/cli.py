"""Command line entry point: ``qreservoir run | validate | invariants``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config, replace
from .core import NumericalInstabilityError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qreservoir", description="Quantum reservoir computing experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config")
    run.add_argument("--jobs", type=int, default=1, help="worker processes for realizations")
    run.add_argument("--seed", type=int, default=None, help="override base_seed")
    run.add_argument("--out", default=None, help="override output_dir")

    val = sub.add_parser("validate", help="parse a config file and print the resolved settings")
    val.add_argument("config")

    inv = sub.add_parser("invariants", help="run the physics and readout invariant suites")
    inv.add_argument("--suite", choices=("spin", "gaussian", "readout", "all"), default="all")
    inv.add_argument("--seed", type=int, default=0)
    inv.add_argument("--out", default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    from . import experiments

    try:
        if args.command == "invariants":
            out = Path(args.out) if args.out else None
            if out is not None:
                out.mkdir(parents=True, exist_ok=True)
            checks = experiments.run_invariants(args.suite, out, seed=args.seed)
            for c in checks:
                status = "PASS" if c.passed else "FAIL"
                print(f"{status} {c.suite}.{c.name}: {c.value:.3e} (limit {c.limit:g})")
            return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERIC

        cfg = load_config(args.config)
        if args.command == "validate":
            print("\n".join(cfg.resolved_lines()))
            return EXIT_OK

        if args.seed is not None:
            cfg = replace(cfg, base_seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, output_dir=args.out)
        result = experiments.run_experiment(cfg, Path(cfg.output_dir), jobs=max(1, args.jobs))
        if cfg.experiment == "invariants" and not all(c.passed for c in result):
            return EXIT_NUMERIC
        print(f"wrote {cfg.output_dir}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalInstabilityError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
