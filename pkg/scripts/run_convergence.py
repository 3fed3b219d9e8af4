"""Convergence of the limit cycle towards the singular cycle along an eps ladder.

Prints Hausdorff distance, Original-time period, distance to the l1 exit
corner and log contraction per eps, then the -K/eps fit.

Usage: python scripts/run_convergence.py [--gamma 0.1] [--ladder 0.0075,0.005,0.0035,0.0025] [--workers 4]
"""
import argparse

from frzilator.model import Params
from frzilator.poincare import (accept_fit, cauchy_decreasing, convergence_study, fit_contraction,
                                strictly_decreasing)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=0.1)
    ap.add_argument("--ladder", default="0.0075,0.005,0.0035,0.0025")
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args()
    ladder = [float(x) for x in a.ladder.split(",")]
    rows = convergence_study(Params(a.gamma, 0.0), ladder, workers=a.workers)
    print("eps,hausdorff,period,corner_distance,log_contraction")
    for r in rows:
        print(f"{r.eps},{r.hausdorff:.6g},{r.period:.10g},{r.corner_distance:.3g},{r.log_contraction:.6g}")
    K, b, r2 = fit_contraction(ladder, [r.log_contraction for r in rows])
    print(f"# hausdorff decreasing: {strictly_decreasing([r.hausdorff for r in rows])}")
    print(f"# periods Cauchy: {cauchy_decreasing([r.period for r in rows])}")
    print(f"# corner within 3 eps: {all(r.corner_distance <= 3 * r.eps for r in rows)}")
    print(f"# fit K={K:.4g} b={b:.4g} R^2={r2:.5f} accepted={accept_fit(K, r2)}")


if __name__ == "__main__":
    main()
