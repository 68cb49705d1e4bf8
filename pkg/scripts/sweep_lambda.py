#!/usr/bin/env python3
"""Trace the per-lambda operator Jensen margin across (0, 1).

The per-lambda bound scales the right side by h(lam)/lam.  For weights
with h(t)/t decreasing, the factor drops below what two-point convexity
can absorb as lam -> 1, and the margin goes negative: the sweep prints
the crossing.  Exit code 2 flags a negative minimum.

    python scripts/sweep_lambda.py --alpha 2 --beta 2.16 --grid 99
    python scripts/sweep_lambda.py --diag 0.64 0.8 --x 0.7071 0.7071
"""

import argparse
import math
import sys

from hconvexlab.falsify import lambda_profile
from hconvexlab.funclib import scalar_function
from hconvexlab.opcalc import SymmetricMatrix, UnitVector


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="neglog",
                    help="target function family (default: neglog)")
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--beta", type=float, default=2.16)
    ap.add_argument("--diag", type=float, nargs="+", default=[0.64, 0.8],
                    help="diagonal entries of the test matrix")
    ap.add_argument("--x", type=float, nargs="+", default=None,
                    help="state vector (default: uniform)")
    ap.add_argument("--grid", type=int, default=99)
    ap.add_argument("--print-every", type=int, default=10)
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    f = scalar_function(args.family)
    h = scalar_function("exp_weight", alpha=args.alpha, beta=args.beta)
    A = SymmetricMatrix.diagonal(args.diag)
    coords = args.x or [1.0 / math.sqrt(len(args.diag))] * len(args.diag)
    x = UnitVector(coords)

    profile = lambda_profile(f, h, A, x, grid=args.grid)
    print(f"# {args.family}, exp_weight(alpha={args.alpha}, "
          f"beta={args.beta}), diag={args.diag}")
    print(f"# factor h(lam)/lam nonincreasing: {profile.factor_decreasing}")
    print(f"{'lam':>10} {'margin':>24}")
    for i, (lam, margin) in enumerate(profile.points):
        if i % args.print_every == 0 or margin < 0.0:
            print(f"{lam:>10.6f} {margin:>24.17g}")
    margins = [m for _, m in profile.points]
    crossings = sum(1 for a, b in zip(margins, margins[1:])
                    if (a < 0.0) != (b < 0.0))
    print(f"# min margin {profile.min_margin!r} at "
          f"lam={profile.argmin_lambda!r}; sign changes: {crossings}")
    return 2 if profile.min_margin < 0.0 else 0


if __name__ == "__main__":
    sys.exit(main())
