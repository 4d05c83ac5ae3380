"""Independent high-precision evaluations frozen into the C++ unit tests.

Run with: python3 tests/oracles/compute_oracles.py
"""
import mpmath as mp

mp.mp.dps = 40


def matern(nu, t):
    s = mp.sqrt(2 * nu) * t
    if nu == mp.mpf(1) / 2:
        return mp.e ** (-s)
    if nu == mp.mpf(3) / 2:
        return (1 + s) * mp.e ** (-s)
    return (1 + s + s * s / 3) * mp.e ** (-s)


def matern_bessel(nu, t):
    # definitional Bessel form, cross-check of the closed forms
    s = mp.sqrt(2 * nu) * t
    return s ** nu / (mp.gamma(nu) * 2 ** (nu - 1)) * mp.besselk(nu, s)


def critical_rho_region(M):
    M = mp.mpf(M)
    phi = mp.npdf(M)
    tail = 1 - mp.ncdf(M)
    return -1 + mp.sqrt(1 + tail / (M * phi))


def borehole(rw, r, Tu, Hu, Tl, Hl, L, Kw):
    lg = mp.log(r / rw)
    return 2 * mp.pi * Tu * (Hu - Hl) / (lg * (mp.mpf('1.5') + 2 * L * Tu / (lg * rw ** 2 * Kw) + Tu / Tl))


def piston(M, S, V0, k, P0, Ta, T0):
    A = P0 * S + mp.mpf('19.62') * M - k * V0 / S
    V = S / (2 * k) * (mp.sqrt(A ** 2 + 4 * k * P0 * V0 / T0 * Ta) - A)
    return 2 * mp.pi * mp.sqrt(M / (k + S ** 2 * P0 * V0 / T0 * Ta / V ** 2))


def welch(x):
    x = [None] + list(x)
    return (5 * x[12] / (1 + x[1]) + 5 * (x[4] - x[20]) ** 2 + x[5] + 40 * x[19] ** 3 - 5 * x[19]
            + mp.mpf('0.05') * x[2] + mp.mpf('0.08') * x[3] - mp.mpf('0.03') * x[6] + mp.mpf('0.03') * x[7]
            - mp.mpf('0.09') * x[9] - mp.mpf('0.01') * x[10] - mp.mpf('0.07') * x[11] + mp.mpf('0.25') * x[13] ** 2
            - mp.mpf('0.04') * x[14] + mp.mpf('0.06') * x[15] - mp.mpf('0.01') * x[17] - mp.mpf('0.03') * x[18])


def robotarm(th, L):
    u = v = 0
    for i in range(4):
        a = sum(th[: i + 1])
        u += L[i] * mp.cos(a)
        v += L[i] * mp.sin(a)
    return mp.sqrt(u * u + v * v)


def mid(lo, hi):
    return (mp.mpf(lo) + mp.mpf(hi)) / 2


if __name__ == "__main__":
    for nu in ("0.5", "1.5", "2.5"):
        nuv = mp.mpf(nu)
        print(f"matern nu={nu} t=1: closed={mp.nstr(matern(nuv, 1), 20)} bessel={mp.nstr(matern_bessel(nuv, 1), 20)}")
        print(f"matern nu={nu} t=0.3: {mp.nstr(matern(nuv, mp.mpf('0.3')), 20)}")
    for M in (1, 2, 3):
        print(f"critical_rho_region M={M}: {mp.nstr(critical_rho_region(M), 20)}")
    bh = [("0.05", "0.15"), ("100", "50000"), ("63070", "115600"), ("990", "1110"),
          ("63.1", "116"), ("700", "820"), ("1120", "1680"), ("9855", "12045")]
    print("borehole midpoint:", mp.nstr(borehole(*[mid(a, b) for a, b in bh]), 20))
    ps = [("30", "60"), ("0.005", "0.020"), ("0.002", "0.010"), ("1000", "5000"),
          ("90000", "110000"), ("290", "296"), ("340", "360")]
    print("piston midpoint:", mp.nstr(piston(*[mid(a, b) for a, b in ps]), 20))
    xs = [mp.mpf(i) / 40 - mp.mpf('0.25') for i in range(1, 21)]
    print("welch x_i = i/40 - 0.25:", mp.nstr(welch(xs), 20))
    th = [mp.mpf('0.5'), mp.mpf('1.0'), mp.mpf('1.5'), mp.mpf('2.0')]
    L = [mp.mpf('0.2'), mp.mpf('0.4'), mp.mpf('0.6'), mp.mpf('0.8')]
    print("robotarm:", mp.nstr(robotarm(th, L), 20))
    print("friedman (0.3,0.7,0.2,0.4,0.9):",
          mp.nstr(10 * mp.sin(mp.pi * mp.mpf('0.3') * mp.mpf('0.7')) + 20 * (mp.mpf('0.2') - mp.mpf('0.5')) ** 2
                  + 10 * mp.mpf('0.4') + 5 * mp.mpf('0.9'), 20))
    # E[Z^2 | Z > M] and Figure-2 ratio at a few spots
    for rho, M in ((0.5, 1), (0.3, 2), (0.8, 3)):
        Mm = mp.mpf(M)
        E = (Mm * mp.npdf(Mm) + 1 - mp.ncdf(Mm)) / (1 - mp.ncdf(Mm))
        r = mp.mpf(rho)
        ratio = (1 - r ** 2 + E * (1 - r) ** 2) / (r ** 2 - r ** 4 + E * (1 - r ** 2) ** 2)
        print(f"cmspe ratio rho={rho} M={M}: {mp.nstr(ratio, 20)}")
    # eise / r2 oracle vectors
    p = [0.12, -1.5, 2.25, 3.0, 0.5, -0.75, 1.125, 4.5, -2.0, 0.0]
    t = [0.10, -1.0, 2.00, 3.5, 0.25, -0.5, 1.0, 4.0, -2.5, 0.3]
    e = mp.fsum((mp.mpf(a) - mp.mpf(b)) ** 2 for a, b in zip(p, t)) / len(p)
    print("eise:", mp.nstr(e, 20))
    tm = mp.fsum(mp.mpf(b) for b in t) / len(t)
    half = [t[i] if i < 5 else float(tm) for i in range(10)]
    e2 = mp.fsum((mp.mpf(a) - mp.mpf(b)) ** 2 for a, b in zip(half, t)) / len(t)
    var = mp.fsum((mp.mpf(b) - tm) ** 2 for b in t) / len(t)
    print("r2 half-perfect:", mp.nstr(1 - e2 / var, 20))
