"""Command-line entry point.

Subcommands: spectrum, goodset, solve, equidist, disorder, locbound.
Exit codes: 0 success, 2 configuration/validation failure, 3 numerical
tolerance failure (outputs are still written in that case).
"""

from __future__ import annotations

import argparse
import os
import sys

EXIT_VALIDATION = 2

_COMMANDS = ("spectrum", "goodset", "solve", "equidist", "disorder", "locbound")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="toralab",
        description="Spectral experiments for Schrodinger operators on rectangular tori.",
    )
    ap.add_argument("command", choices=_COMMANDS, help="experiment to run")
    ap.add_argument("--config", required=True, help="path to the TOML run configuration")
    ap.add_argument("--out", default=None, help="output directory (overrides [run].out)")
    ap.add_argument("--seed", type=int, default=None,
                    help="master seed (overrides [run].seed)")
    ap.add_argument("--threads", type=int, default=0,
                    help="task-parallelism hint, 0 = auto; numerical kernels "
                         "stay single-threaded so outputs never depend on it")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)

    from threadpoolctl import threadpool_limits

    from .config import ConfigError, load_config
    from . import runner

    try:
        cfg = load_config(args.config, seed_override=args.seed, out_override=args.out)
        fn = getattr(runner, f"run_{args.command}")
        # Multi-threaded BLAS reductions reorder sums and perturb low-order
        # bits, breaking the identical-output-bytes contract across thread
        # counts; numerical kernels run single-threaded no matter what
        # --threads or the environment says.
        with threadpool_limits(limits=1):
            return fn(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
