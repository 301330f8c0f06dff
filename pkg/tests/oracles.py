"""Independent reference computations used to derive and re-check frozen test values.

Nothing here imports the package's numerical code.
"""
import math

import mpmath as mp
import numpy as np
from scipy.integrate import quad


def ml_series(a, b, z, tail=1e-25):
    """Power series for E_{a,b}(z) in extended precision (digits scaled to |z|)."""
    s = abs(z) ** (1.0 / a)
    dps = 40 + int(s / math.log(10)) + 10
    with mp.workdps(dps):
        a, b, z = mp.mpf(a), mp.mpf(b), mp.mpf(z)
        total, k = mp.mpf(0), 0
        while True:
            term = z ** k / mp.gamma(a * k + b)
            total += term
            if k > 10 and abs(term) < tail:
                return float(total)
            k += 1


def ml_cut_integral(a, b, x, dps=30):
    """E_{a,b}(-x) for 1 < a < 2 from the pole residues plus the integral along the cut."""
    with mp.workdps(dps):
        a, b, x = mp.mpf(a), mp.mpf(b), mp.mpf(x)
        lam = x ** (1 / a) * mp.expjpi(1 / a)
        res = (2 / a) * mp.re(lam ** (1 - b) * mp.exp(lam))

        def f(r):
            ra = r ** a
            den = ra * ra + 2 * x * ra * mp.cospi(a) + x * x
            return mp.exp(-r) * r ** (a - b) * (x * mp.sinpi(a - b) - ra * mp.sinpi(b)) / den

        s = x ** (1 / a)
        val = mp.quad(f, [0, s / 2, s, 2 * s, s + 80, mp.inf])
        return float(res - val / mp.pi)


def decay_quadrature(mu, a, upper=math.inf):
    """Integral of 1/(1 + |mu| s^a) over [0, upper] by adaptive quadrature."""
    f = lambda s: 1.0 / (1.0 + abs(mu) * s ** a)
    if math.isinf(upper):
        head, _ = quad(f, 0, 1, epsabs=0, epsrel=1e-13)
        tail, _ = quad(f, 1, math.inf, epsabs=0, epsrel=1e-13, limit=200)
        return head + tail
    # split on a log scale so each piece is resolved
    edges = np.concatenate(([0.0], np.logspace(-2, math.log10(upper), 40)))
    return sum(quad(f, lo, hi, epsabs=0, epsrel=1e-13, limit=200)[0] for lo, hi in zip(edges[:-1], edges[1:]))


def exp_psap_mean(T):
    """Exact mean of |e^{-(s+1)} - e^{-s}| over [0, T]."""
    return (1 - math.exp(-1)) * (1 - math.exp(-T)) / T


def exp_class_r_mean(T):
    """Exact class-r mean for e^{-t}, omega = r = 1."""
    return (1 - math.exp(-1)) * math.e * (math.exp(-1) - math.exp(-T)) / T


def sine_psap_mean(T, omega=1.0):
    """Mean of |sin(s + omega) - sin(s)| over [0, T] by adaptive quadrature."""
    f = lambda s: abs(math.sin(s + omega) - math.sin(s))
    pts = np.arange(0.0, T + math.pi, math.pi / 2)
    pts = np.append(pts[pts < T], T)
    return sum(quad(f, lo, hi, epsabs=1e-14)[0] for lo, hi in zip(pts[:-1], pts[1:])) / T


def brute_window_sup(d, m):
    return np.array([np.max(d[i - m:i + 1]) for i in range(m, len(d))])
