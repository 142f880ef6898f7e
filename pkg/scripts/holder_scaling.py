"""Local regularity of the limit process.

Regresses log E|X(t+h) - X(t)|^2 on log h, closed form and sampled, next to
the Brownian control. A slope near 1/2 means Hoelder exponent 1/4.

    python3 scripts/holder_scaling.py --t 1 --reps 20000 --seed 0
"""
import argparse

import numpy as np

from median_bm import limit


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--hmin", type=float, default=1e-6)
    ap.add_argument("--hmax", type=float, default=1e-2)
    ap.add_argument("--points", type=int, default=9)
    ap.add_argument("--reps", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    gaps = np.logspace(np.log10(args.hmin), np.log10(args.hmax), args.points)
    closed = limit.increment_variances(args.t, gaps)
    sampled = limit.increment_variances(args.t, gaps, method="sampled", reps=args.reps, seed=args.seed)
    print(f"{'h':>12} {'closed':>14} {'sampled':>14} {'closed/sqrt(h)':>15}")
    for h, c, s in zip(gaps, closed, sampled):
        print(f"{h:12.3e} {c:14.6e} {s:14.6e} {c / np.sqrt(h):15.6f}")
    print(f"slope closed   {limit.holder_scaling_estimate(args.t, gaps):.4f}")
    print(f"slope sampled  {limit.holder_scaling_estimate(args.t, gaps, args.reps, args.seed, 'sampled'):.4f}")
    print(f"Brownian ctrl  {limit.brownian_control_slope(gaps, args.reps, args.seed):.4f}")


if __name__ == "__main__":
    main()
