"""Reference values of the hat seminorm 2 * int_0^inf h^(-sp-1) int |u(x+h)-u(x)|^p dx dh."""
import mpmath as mp

mp.mp.dps = 30


def hat(x):
    return max(mp.mpf(0), 1 - abs(x))


def inner(h, p):
    # Kinks of the integrand, including the sign change of the difference at -h/2.
    pts = sorted({-1 - h, -h, 1 - h, -h / 2, mp.mpf(-1), mp.mpf(0), mp.mpf(1)})
    return mp.quad(lambda x: abs(hat(x + h) - hat(x)) ** p, pts)


def seminorm(s, p):
    f = lambda h: h ** (-s * p - 1) * inner(h, p)
    # For h <= 1 the five pieces of the difference integrate by hand to
    # I_p(h) = 2 h^p (1 - h) + 3 h^(p+1) / (p + 1); below hc that form is
    # integrated exactly to avoid cancellation in u(x+h) - u(x).
    hc = mp.mpf("0.01")
    e0, e1 = p - s * p, p + 1 - s * p
    near = 2 * hc ** e0 / e0 + (3 / (p + 1) - 2) * hc ** e1 / e1
    return 2 * (near + mp.quad(f, [hc, mp.mpf(1) / 2, 1, 2, mp.inf]))


if __name__ == "__main__":
    for s, p in [(0.5, 1), (0.3, 2), (0.9, 1), (0.75, 1.5)]:
        print(s, p, mp.nstr(seminorm(mp.mpf(s), mp.mpf(p)), 17))
        h = mp.mpf("0.3")
        assert abs(inner(h, p) - (2 * h ** p * (1 - h) + 3 * h ** (p + 1) / (p + 1))) < mp.mpf(10) ** -25
