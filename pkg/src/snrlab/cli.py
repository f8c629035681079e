"""``snrlab sweep|theory|oracle`` command line."""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .errors import SnrlabError, UsageError

log = logging.getLogger("snrlab")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with SweepConfig fields; flags override it")
    common.add_argument("--arch", help="comma list from lci,pai,lai")
    common.add_argument("--log2n-min", type=int, dest="log2n_min")
    common.add_argument("--log2n-max", type=int, dest="log2n_max")
    common.add_argument("--trials", type=int)
    common.add_argument("--x0", type=float, help="scene brightness in photons (default 1e7)")
    common.add_argument("--sigma", type=float, help="additive noise std per lensless measurement")
    common.add_argument("--rho", type=float, help="additive noise std per pinhole/lens pixel")
    common.add_argument("--gain", type=float, help="lens gain g (default 100)")
    common.add_argument("--scene", help="uniform | flat | image:PATH (binary PGM)")
    common.add_argument("--seed", type=_u64)
    common.add_argument("--permute", action="store_const", const=True, default=None,
                        help="randomly permute sensing-matrix columns")
    common.add_argument("--no-shot", dest="shot", action="store_const", const=False, default=None,
                        help="disable Poisson shot noise")
    common.add_argument("--workers", type=int, help="threads running cells concurrently")
    common.add_argument("--out", help="output CSV path (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="snrlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="Monte-Carlo SNR versus resolution")
    sub.add_parser("theory", parents=[common], help="closed-form SNR curves and ratios")
    sub.add_parser("oracle", parents=[common], help="closed form vs exact propagation vs Monte Carlo")
    return p


_FIELDS = ("arch", "log2n_min", "log2n_max", "trials", "x0", "sigma", "rho", "gain",
           "scene", "seed", "permute", "shot", "workers", "out")


def config_from_args(args) -> harness.SweepConfig:
    overrides = {k: getattr(args, k) for k in _FIELDS}
    if args.config:
        return harness.SweepConfig.from_json(args.config, **overrides)
    return harness.SweepConfig(**{k: v for k, v in overrides.items() if v is not None})


def _report_oracle(rows) -> None:
    for r in rows:
        g = r.gaps["theory_oracle"]
        gap = "n/a" if g is None else f"{g:.4%}"
        print(f"n={r.n:>6d}  closed-form vs exact variance gap {gap}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args).validate()
        if args.command == "sweep":
            rows = harness.run_sweep(cfg)
            text = harness.sweep_csv(rows, cfg)
        elif args.command == "theory":
            text = harness.theory_csv(harness.run_theory(cfg))
            cross = harness.crossover(cfg)
            print(f"pinhole SNR first falls below the lensless bound at n={cross}", file=sys.stderr)
        else:
            rows = harness.run_oracle(cfg)
            text = harness.oracle_csv(rows)
            _report_oracle(rows)
        harness.write_text(text, cfg.out)
    except TypeError as exc:
        # bad field types in a JSON config
        print(f"snrlab: {exc}", file=sys.stderr)
        return UsageError.exit_code
    except SnrlabError as exc:
        print(f"snrlab: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
