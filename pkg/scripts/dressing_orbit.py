"""Dress the Coxeter loop by random loops and read off the resulting coefficients.

    python3 scripts/dressing_orbit.py --p 4 --trials 10
"""
import argparse

import numpy as np

from cmvflows import build_factors, coxeter_element, invariants, recognize_floquet
from cmvflows.checks import planted_analytic_loop
from cmvflows.flows import dressing_action
from cmvflows.rng import SplitMix64


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=4)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=4)
    args = ap.parse_args()

    rng = SplitMix64(args.seed)
    x = coxeter_element(args.p).assembled
    for i in range(args.trials):
        g = planted_analytic_loop(rng, args.p, lower=False)
        d = dressing_action(g, x)
        v = recognize_floquet(d.loop, 1e-7)
        if v is None:
            print(f"{i:3d} not recognized (line gap {d.line_gap:.1e})")
            continue
        res = build_factors(v).assembled.max_abs_diff(d.loop)
        print(f"{i:3d} max|alpha| {np.max(np.abs(v.alpha)):.3f}  P {invariants(v).P:.4f}  "
              f"residual {res:.1e}  line gap {d.line_gap:.1e}")


if __name__ == "__main__":
    main()
