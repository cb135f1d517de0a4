"""Measure strong convergence orders for the shipped SDE problems.

Usage: python scripts/sde_orders.py [--n 500] [--seed 0]
"""

import argparse

from stratint import convergence_study, gbm, two_noise

PROBLEMS = {"gbm": gbm, "two-noise": two_noise}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=500, help="paths per study")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--ladder", default="16,32,64,128,256,512")
    args = ap.parse_args()

    ladder = [int(x) for x in args.ladder.split(",")]
    print(f"{'problem':>10} {'scheme':>9} {'slope':>7}   rms by level")
    for pname, factory in PROBLEMS.items():
        for scheme in ("euler", "milstein"):
            res = convergence_study(factory(), scheme, ladder, args.n, args.seed)
            levels = " ".join(f"{r:.3e}" for r in res.rms)
            print(f"{pname:>10} {scheme:>9} {res.slope:>7.3f}   {levels}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
