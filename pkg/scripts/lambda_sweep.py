"""Sweep the control probability and message length for each attack; writes CSV.

The lambda_c values used here are invented examples; nothing privileges them.

    python3 scripts/lambda_sweep.py --seed 3 --csv results/sweep.csv
"""

import argparse
from pathlib import Path

from qsdc import AttackKind, ExperimentSpec, SessionConfig
from qsdc.harness import run_sweep, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--lambda-c", default="0.1,0.2,0.3,0.5,0.7")
    ap.add_argument("--messages", default="10,50")
    ap.add_argument("--attacks", default="none,intercept-resend,weak-mitm,strong-mitm")
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", type=Path, default=Path("results/sweep.csv"))
    args = ap.parse_args()

    grid = {
        "lambda_c": [float(x) for x in args.lambda_c.split(",")],
        "n_messages": [int(x) for x in args.messages.split(",")],
        "attack": args.attacks.split(","),
    }
    base = ExperimentSpec(args.trials, SessionConfig(grid["n_messages"][0], grid["lambda_c"][0], args.seed),
                          AttackKind.NONE, workers=args.workers)
    rows = run_sweep(base, grid)
    write_sweep_csv(args.csv, rows)
    for r in rows:
        print(f"lambda_c={r['lambda_c']:.2f} N={r['n_messages']:3d} {r['attack']:17s} "
              f"d={r['detection_rate']:.3f} survival={r['survival']:.4f}")
    print(f"{len(rows)} rows -> {args.csv}")


if __name__ == "__main__":
    main()
