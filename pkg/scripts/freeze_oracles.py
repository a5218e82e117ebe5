"""Recompute the reference values frozen into the test suite.

Everything here uses mpmath at 30 digits and none of the package code, so the
numbers are independent of the implementation under test. Run:

    python scripts/freeze_oracles.py
"""

import mpmath as mp

mp.mp.dps = 30


def cir_density(a, s2, theta, t, x, y):
    kappa = 2 * a / (s2 * (1 - mp.e ** (-a * t)))
    u, v = kappa * x * mp.e ** (-a * t), kappa * y
    q = 2 * a * theta / s2 - 1
    if x == 0:
        return kappa / mp.gamma(q + 1) * v**q * mp.e ** (-v)
    return kappa * mp.e ** (-u - v) * (v / u) ** (q / 2) * mp.besseli(q, 2 * mp.sqrt(u * v))


def psi(a, s2, t, u):
    return u * mp.e ** (-a * t) / (1 - s2 / (2 * a) * u * (1 - mp.e ** (-a * t)))


def bajd_levy(w, rate=1, mean=1):
    return rate * mean * w / (1 - mean * w)


def main():
    print("I_1(2) =", mp.besseli(1, 2))
    print("I_0.5(3) =", mp.besseli(0.5, 3), " I_10(40) =", mp.besseli(10, 40))

    print("\nCIR density a=1 s2=2 theta=1 t=1 x=1")
    for y in ("0.1", "0.5", "1", "2", "5"):
        print(" ", y, cir_density(1, 2, 1, 1, 1, mp.mpf(y)))
    print("CIR density a=0.5 s2=0.25 theta=2 t=0.7 x=3 (q > 0)")
    for y in ("1", "3", "6"):
        print(" ", y, cir_density(mp.mpf("0.5"), mp.mpf("0.25"), 2, mp.mpf("0.7"), 3, mp.mpf(y)))
    print("CIR density a=2 s2=4 theta=0.5 t=0.3 x=0.2 (q < 0)")
    for y in ("0.05", "0.5", "2"):
        print(" ", y, cir_density(2, 4, mp.mpf("0.5"), mp.mpf("0.3"), mp.mpf("0.2"), mp.mpf(y)))

    print("\nTempered stable xi^-1.5 e^-xi")
    n = lambda x: x ** mp.mpf(-1.5) * mp.e ** (-x)
    wedge = mp.quad(lambda x: x * n(x), [0, 1]) + mp.quad(n, [1, mp.inf])
    tail = mp.quad(lambda x: x * n(x), [1, mp.inf])
    xlog = mp.quad(lambda x: -x * mp.log(x) * n(x), [0, 1])
    print("  wedge", wedge, "tail", tail, "xlog", xlog, "int_xi", mp.quad(lambda x: x * n(x), [0, 1, mp.inf]))

    print("\nlambda(1), PointMasses((1,1)), a=1 s2=2")
    lam = mp.quad(lambda s: 1 - mp.e ** (-1 / mp.expm1(s)), [0, 1])
    print(" ", lam)

    print("\nphi(1,-1), PointMasses((1,1)), a=1 s2=2 theta=0")
    print(" ", mp.quad(lambda s: mp.e ** psi(1, 2, s, -1) - 1, [0, 1]))

    print("\nz_cf(1,u), BAJD a=1 s2=2 rate=1 Exp(mean 1)")
    for u in (1j, 2j, 5j, -1):
        print(" ", u, mp.e ** mp.quad(lambda s: bajd_levy(psi(1, 2, s, mp.mpc(u))), [0, 1]))

    print("\njcir_cf(1,1,u), BAJD theta=1")
    for u in (1j, 2j, -1):
        u = mp.mpc(u)
        D = 1 - u * (1 - mp.e ** -1)
        logterm = -1 * mp.log(D)
        jump = mp.quad(lambda s: bajd_levy(psi(1, 2, s, u)), [0, 1])
        print(" ", u, mp.e ** (logterm + jump + psi(1, 2, 1, u)))

    print("\ninvariant cf BAJD theta=1")
    for u in (1j, 2j):
        u = mp.mpc(u)
        jump = mp.quad(lambda s: bajd_levy(psi(1, 2, s, u)), [0, mp.inf])
        print(" ", u, (1 - u) ** -1 * mp.e**jump)

    print("\nTV(Gamma(2,1), Gamma(3,1)) = P_2(Y < 2) - P_3(Y < 2)")
    print(" ", mp.gammainc(2, 0, 2, regularized=True) - mp.gammainc(3, 0, 2, regularized=True))


if __name__ == "__main__":
    main()
