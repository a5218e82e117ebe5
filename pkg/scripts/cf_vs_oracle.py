"""Closed-form characteristic function against the Riccati ODE oracle.

Draws random fixtures and prints one CSV row per fixture with the relative
error. Usage: python scripts/cf_vs_oracle.py [n_fixtures] [seed]
"""

import csv
import sys

import numpy as np

from jcir.charfn import jcir_cf, riccati_oracle
from jcir.model import ExponentialJumps, FiniteActivity, JcirParams, PointMasses, ZeroMeasure


def fixture(rng, kind):
    if kind == "zero":
        nu = ZeroMeasure()
    elif kind == "point_masses":
        nu = PointMasses(sizes=rng.uniform(0.1, 3.0, 2), weights=rng.uniform(0.1, 2.0, 2))
    else:
        nu = FiniteActivity(rng.uniform(0.1, 3.0), ExponentialJumps(rng.uniform(0.1, 2.0)))
    return JcirParams(rng.uniform(0.2, 5.0), rng.uniform(0.0, 3.0), rng.uniform(0.2, 3.0), nu)


def main(n=200, seed=0):
    rng = np.random.default_rng(seed)
    out = csv.writer(sys.stdout)
    out.writerow(["kind", "a", "theta", "sigma", "t", "x", "u_im", "cf_re", "cf_im", "rel_err"])
    kinds = ("zero", "point_masses", "exponential")
    for i in range(n):
        kind = kinds[i % 3]
        p = fixture(rng, kind)
        t, x, u = rng.uniform(0.1, 5.0), rng.uniform(0.0, 5.0), 1j * rng.uniform(-50.0, 50.0)
        v = jcir_cf(t, x, u, p).value
        ph, ps = riccati_oracle(t, u, p)
        ref = np.exp(ph + x * ps)
        out.writerow([kind, p.a, p.theta, p.sigma, t, x, u.imag, v.real, v.imag, abs(v - ref) / abs(ref)])


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:3]))
