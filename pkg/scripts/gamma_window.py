"""Which gamma values admit the singular cycle and a computable limit cycle.

Usage: python scripts/gamma_window.py [--eps 0.005] [--lo 0.04] [--hi 0.2] [--step 0.01]
"""
import argparse

import numpy as np

from frzilator.errors import FrzError
from frzilator.model import Params
from frzilator.poincare import find_limit_cycle
from frzilator.singular_cycle import build_singular_cycle


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, default=0.005)
    ap.add_argument("--lo", type=float, default=0.04)
    ap.add_argument("--hi", type=float, default=0.2)
    ap.add_argument("--step", type=float, default=0.01)
    a = ap.parse_args()
    print("gamma,singular_cycle,limit_cycle,period")
    for g in np.arange(a.lo, a.hi + a.step / 2, a.step):
        g = round(float(g), 10)
        try:
            build_singular_cycle(Params(g, 0.0))
            sc = "closed"
        except FrzError as exc:
            sc = type(exc).__name__
        try:
            r = find_limit_cycle(Params(g, a.eps), fd_check=False)
            lc, per = "ok", f"{r.period:.10g}"
        except FrzError as exc:
            lc, per = type(exc).__name__, "nan"
        print(f"{g},{sc},{lc},{per}", flush=True)


if __name__ == "__main__":
    main()
