"""Sweep the transition-density lower bound ``p >= C(t) f`` on the exponential-jump fixture.

Prints one CSV row per ``(t, x)`` with ``C(t)``, the smallest margin
``p - C f`` over the grid, the number of grid points below ``-tol``, and the
inversion mass and error bound. Usage: python scripts/lowerbound_sweep.py
"""

import csv
import math
import sys

from jcir.inversion import density_from_cf, default_grid, lower_bound_check
from jcir.model import ExponentialJumps, FiniteActivity, JcirParams

TOL = 1e-6


def main():
    p = JcirParams(1.0, 1.0, math.sqrt(2.0), FiniteActivity(1.0, ExponentialJumps(1.0)))
    out = csv.writer(sys.stdout)
    out.writerow(["t", "x", "c_t", "min_margin", "violations", "mass", "inv_error_bound"])
    for t in (0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0):
        for x in (0.0, 0.5, 1.0, 3.0, 10.0):
            grid = default_grid(t, x, p)
            rep = lower_bound_check(t, x, grid, p, tol=TOL)
            dens = density_from_cf(t, x, grid, p)
            out.writerow([t, x, rep.c_t, rep.min_margin, rep.violations, dens.mass, dens.inv_error_bound])


if __name__ == "__main__":
    main()
