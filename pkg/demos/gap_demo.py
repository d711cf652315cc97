"""Integrality-style gap between the two coverage LPs on small and full-size random instances.

Small instances are solved exactly.  The n=2000 instance uses certified
bounds: an upper bound on LP_lb and a lower bound on LP_ub, whose quotient is
a lower bound on the true ratio.  Pass --full to run it (about a minute).
"""

import sys
from fractions import Fraction

import numpy as np

from joincover.core import cycle
from joincover.lpbounds import lp_lb, lp_ub
from joincover.rounding import GapInstanceParams, RoundingConfig, gap_bounds, gap_instance, rounded_cover


def main(full):
    g = cycle(4)
    for s in range(1, 5):
        lo, ub = lp_lb(g, s).objective, lp_ub(g, s).objective
        rc = rounded_cover(g, s, RoundingConfig(rng_seed=s))
        print(f"C4 s={s}: LP_lb={lo} LP_ub={ub} ratio={ub / lo} rounded cost={float(rc.cost):.3f} after {rc.trials} trials")

    sizes = [(60, 0.9, 1.0)] + ([(2000, 0.3, 13.0)] if full else [])
    for n, eps, C in sizes:
        params = GapInstanceParams(n, eps, C)
        inst = gap_instance(params, np.random.default_rng(7))
        b = gap_bounds(inst)
        print(
            f"n={n} eps={eps} d={params.d} s={b.s}: LP_lb <= {float(b.lp_lb_upper):.5f}, "
            f"LP_ub in [{float(b.lp_ub_lower):.5f}, {float(b.lp_ub_upper):.5f}], ratio >= {float(b.ratio_lower):.4f}"
        )
    print(f"large-n limit of the ratio: 1 + 1/e = {1 + 1 / np.e:.4f}")


if __name__ == "__main__":
    main("--full" in sys.argv)
