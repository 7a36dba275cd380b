"""Evolve one state by the bracket ODE and by loop factorization and compare endpoints.

    python3 scripts/compare_routes.py --p 4 --times 0.01 0.05 0.2 0.5
"""
import argparse

import numpy as np

from cmvflows import VerblunskyVector
from cmvflows.flows import HamiltonianSpec, flow_by_factorization, integrate_ode
from cmvflows.rng import SplitMix64


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=4)
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--times", type=float, nargs="+", default=[0.01, 0.05, 0.2, 0.5])
    ap.add_argument("--dt", type=float, default=1e-3)
    args = ap.parse_args()

    v = VerblunskyVector.random(SplitMix64(args.seed), args.p)
    print(f"{'spec':>6} {'t':>6} {'|ode - fact|':>13} {'spectral res':>13} {'h gap':>10}")
    for kind in ("ReI", "ImI"):
        for n in range(args.p // 2):
            spec = HamiltonianSpec(kind, n)
            for t in args.times:
                w, log = flow_by_factorization(v, spec, t, details=True)
                ode = integrate_ode(v, spec, t, args.dt).final
                gap = np.max(np.abs(w.alpha - ode.alpha))
                sres = max(s.spectral_residual for s in log)
                hgap = max(s.h_gap for s in log)
                print(f"{kind}{n:<3} {t:6.3f} {gap:13.2e} {sres:13.2e} {hgap:10.2e}")


if __name__ == "__main__":
    main()
