"""Command-line harness.

    suprelax sweep --case cs1 --arith pwl:8 --center -0.5,0.5 \
        --rho-min 1e-5 --rho-count 25 --grid 33 --seed 0 --out cs1.csv
    suprelax check --case cs2:6 --arith pwc:128 --samples 100000 --seed 0
    suprelax bench --case cs3 --arith pwl:8
    suprelax range --case cs1 --arith pwl:4

Exit codes: 0 on success/PASS, 1 on a failed check, 2 on configuration
errors.
"""

from __future__ import annotations

import argparse
import re
import sys

from ._backend import BACKEND
from ._kernels import warmup
from .cases import get_case
from .errors import SuprelaxError
from .harness import (
    ArithSpec,
    SweepConfig,
    bench,
    format_range_output,
    run_case,
    validity_check,
)


def _parse_center(text, case):
    if text is None:
        return tuple(case.default_center)
    vals = tuple(float(v) for v in text.split(","))
    return vals


def _add_common(p):
    p.add_argument("--case", required=True, help="cs1 | cs2:<n> | cs3 | ridge:<f> | mlp[:<weights.json>]")
    p.add_argument("--arith", required=True, help="pwl:<k> | pwc:<k> | mccormick | interval")
    p.add_argument("--seed", type=int, default=0)


# let `--center -0.5,0.5` pass as a value: extend argparse's idea of a
# negative number to comma-separated lists of them
_NEG_LIST = re.compile(r"^-?\d+(\.\d*)?([eE][-+]?\d+)?(,-?\d+(\.\d*)?([eE][-+]?\d+)?)*$")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="suprelax")
    sub = ap.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="contraction sweep, one CSV row per rho")
    sweep._negative_number_matcher = _NEG_LIST
    _add_common(sweep)
    sweep.add_argument("--center", default=None, help="comma-separated point, default per case")
    sweep.add_argument("--rho-min", type=float, default=1e-5)
    sweep.add_argument("--rho-count", type=int, default=25)
    sweep.add_argument("--grid", type=int, default=33, help="sample points per axis (n <= 3)")
    sweep.add_argument("--mc-samples", type=int, default=100_000)
    sweep.add_argument("--oracle-grid", type=int, default=1001)
    sweep.add_argument("--out", default=None, help="CSV output path")

    check = sub.add_parser("check", help="bracketing validity over random samples")
    _add_common(check)
    check.add_argument("--samples", type=int, default=10_000)

    bench_p = sub.add_parser("bench", help="best-of-k construction wall time")
    _add_common(bench_p)
    bench_p.add_argument("--repeats", type=int, default=5)

    rng_p = sub.add_parser("range", help="relaxation and oracle ranges on the full box")
    _add_common(rng_p)
    rng_p.add_argument("--oracle-grid", type=int, default=1001)
    rng_p.add_argument("--mc-samples", type=int, default=100_000)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        warmup()  # pay one-time kernel compilation before any timing
        case = get_case(args.case)
        arith = ArithSpec.parse(args.arith)

        if args.command == "sweep":
            cfg = SweepConfig(
                args.case,
                arith,
                _parse_center(args.center, case),
                rho_min=args.rho_min,
                rho_count=args.rho_count,
                grid_m=args.grid,
                mc_samples=args.mc_samples,
                oracle_grid=args.oracle_grid,
                seed=args.seed,
                out_path=args.out,
            )
            report = run_case(cfg)
            if not args.out:
                sys.stdout.write(report.to_csv())
            else:
                print(f"wrote {len(report.rows)} rows to {args.out}")
            return 0

        if args.command == "check":
            worst, ok = validity_check(
                case, case.box, arith, n_samples=args.samples, seed=args.seed
            )
            status = "PASS" if ok else "FAIL"
            print(
                f"{status} case={args.case} arith={arith} "
                f"max_scaled_violation={worst:.3e} samples={args.samples}"
            )
            return 0 if ok else 1

        if args.command == "bench":
            info = bench(case, arith, repeats=args.repeats)
            print(
                f"case={info['case']} arith={info['arith']} backend={BACKEND} "
                f"best_of_{info['repeats']}={info['best_us']:.1f}us"
            )
            return 0

        if args.command == "range":
            cfg = SweepConfig(
                args.case,
                arith,
                tuple(case.default_center),
                oracle_grid=args.oracle_grid,
                mc_samples=args.mc_samples,
                seed=args.seed,
            )
            print(format_range_output(args.case, args.arith, cfg))
            return 0
    except SuprelaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
