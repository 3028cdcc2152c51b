"""Reference survival values for the hat function u(x) = max(0, 1 - |x|).

mu(lam) = 2 * int_0^inf h^(gamma-1) m(h, lam h^b) dh with the hand-derived
level-set length m(h, tau) = |{x : |u(x+h) - u(x)| > tau}|, integrated with
mpmath at 30 digits.
"""
import sys
from mpmath import mp, mpf, quad, inf, findroot

mp.dps = 30


def pos(v):
    return v if v > 0 else mpf(0)


def m(h, tau):
    if h <= 1:
        return 2 + h - 3 * tau if tau < h else mpf(0)
    if h <= 2:
        return 2 * pos(1 - tau) + 2 * min(h - 1, pos(1 - tau)) + pos(2 - h - tau)
    return 4 * pos(1 - tau)


def mu(lam, gamma, b):
    lam, gamma, b = mpf(lam), mpf(gamma), mpf(b)
    f = lambda h: h ** (gamma - 1) * m(h, lam * h ** b)
    pts = [mpf(0), mpf(1), mpf(2)]
    # kinks where tau = lam h^b crosses 1, h, 2 - h
    extra = []
    if b != 0:
        extra.append((1 / lam) ** (1 / b))
    if b != 1:
        extra.append((1 / lam) ** (1 / (b - 1)))
    # tau = 2 - h inside (1, 2)
    g = lambda h: lam * h ** b + h - 2
    if g(mpf(1)) < 0 < g(mpf(2)):
        extra.append(findroot(g, (mpf(1), mpf(2)), solver="bisect"))
    for root in extra:
        if root > 0:
            pts.append(root)
    pts = sorted(set(pts)) + [inf]
    return 2 * quad(f, pts, maxdegree=12)


if __name__ == "__main__":
    cases = [(1.0, 2.0), (0.5, 1.5), (-1.0, -1.0), (-2.0, -1.0), (2.0, 1.0)]
    for gamma, b in cases:
        for lam in [1e-2, 0.5, 3.0, 8.0, 1e2, 1e4]:
            print(f"({gamma}, {b}, {lam:e}, {mp.nstr(mu(lam, gamma, b), 17)}),")
    sys.exit(0)
