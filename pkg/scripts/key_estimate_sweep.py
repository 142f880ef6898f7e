"""Jump frequency of the scaled median against (delta^(1/6)/eps)^p.

Holds eps and alpha fixed and picks n with eps/sqrt(n) = delta^(1/2+alpha),
so the sweep runs along a single regime as delta shrinks.

    python3 scripts/key_estimate_sweep.py --eps 0.2 --alpha -0.1 --p 3
"""
import argparse

from median_bm import verify


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--eps", type=float, default=0.2)
    ap.add_argument("--alpha", type=float, default=-0.1)
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--deltas", type=float, nargs="+", default=[1e-3, 1e-4, 1e-5])
    ap.add_argument("--reps", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--delta0", type=float, default=1e-2,
                    help="upper end of the delta range; the certified value is about 3.8e-21")
    args = ap.parse_args()

    inv, ratios = [], []
    print(f"{'delta':>10} {'n':>7} {'alpha':>8} {'regime':>7} {'P':>12} {'se':>10} {'shape':>10} {'ratio':>10}")
    for i, d in enumerate(args.deltas):
        n = max(3, round((args.eps / d ** (0.5 + args.alpha)) ** 2))
        r = verify.verify_key_estimate(args.eps, d, n, args.p, args.reps, args.seed + i, delta0=args.delta0)
        m = r.metadata
        print(f"{d:10.2e} {n:7d} {m['alpha']:8.4f} {m['regime']:>7} {r.lhs:12.4e} {r.lhs_se:10.2e} "
              f"{m['shape']:10.3e} {m['ratio']:10.3e}")
        inv.append(1 / d)
        ratios.append(m["ratio"])
    slope = verify.trend_slope(inv, ratios, floor=1.0 / args.reps)
    print(f"log-log slope of ratio against 1/delta: {slope:.3f}; a bounded ratio keeps this <= 0.05")


if __name__ == "__main__":
    main()
