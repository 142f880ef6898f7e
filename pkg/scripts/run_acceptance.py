"""Run the acceptance suite and write reports.json / reports.csv.

    python3 scripts/run_acceptance.py --out results/acceptance --seed 42
"""
import argparse
import sys

from median_bm import acceptance as acc


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results/acceptance")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    args = ap.parse_args()
    cfg = acc.AcceptanceConfig(seed=args.seed)
    results = acc.run_suite(cfg, workers=args.workers, only=set(args.only) if args.only else None)
    for r in results:
        print(r.summary_line())
    jpath, cpath = acc.write_reports(results, cfg, args.out)
    print(f"wrote {jpath} and {cpath}")
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
