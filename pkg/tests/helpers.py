"""Synthetic inputs shared by the unit and acceptance tests."""
import numpy as np
from scipy.optimize import brentq

from conftest import patch
from equidist import contact as ct
from equidist import jets
from equidist.jets import Jet2


def poly(terms, order=6):
    """Jet2 at 0 of a polynomial given as {(i, j): c}."""
    c = np.zeros(jets.n_coeffs(order))
    for (i, j), v in terms.items():
        if i + j <= order:
            c[jets.index(i, j)] = v
    return Jet2(c)


def random_germ(rng, scale=0.4, degree=5):
    return {(i, j): rng.uniform(-scale, scale) for i, j in jets.monomials(degree) if i + j >= 2}


def planted_germs(rng, target, lam):
    """Graph germs (phi, psi, xi, zeta) whose theta has first non-zero order ``target``.

    phi does not enter K1, so removing its pure-y terms shifts theta by
    exactly those terms.
    """
    phi, psi, xi, zeta = (random_germ(rng) for _ in range(4))
    K = ct.contact_map_1par_from_graphs(poly(phi), poly(psi), poly(xi), poly(zeta), lam)
    th = ct.reduce_theta(K)
    for k in range(2, target):
        phi[(k, 0)] = phi.get((k, 0), 0.0) - th.coeffs[k]
    return phi, psi, xi, zeta


def _ev(terms, a, b):
    return sum(c * a ** i * b ** j for (i, j), c in terms.items())


def brute_force_theta(phi, psi, xi, zeta, lam, degree=12, h=0.05):
    """Taylor coefficients of theta from root finding on K1 = 0 and a polynomial fit.

    theta(y) is sampled on Chebyshev nodes in [-h, h] (z from brentq) and
    fitted by least squares with monomials up to ``degree``.
    """
    r, m = ct.lambda_ratios(lam)
    ys = h * np.cos(np.pi * (np.arange(48) + 0.5) / 48)
    vals = []
    for y in ys:
        z = brentq(lambda z: z + r * _ev(xi, m * y, m * _ev(psi, y, z)), -0.5, 0.5,
                   xtol=1e-300, rtol=4 * np.finfo(float).eps)
        vals.append(_ev(phi, y, z) + r * _ev(zeta, m * y, m * _ev(psi, y, z)))
    t = ys / h
    c = np.linalg.lstsq(np.vander(t, degree + 1, increasing=True), np.array(vals), rcond=None)[0]
    return c / h ** np.arange(degree + 1)


def brute_force_order(phi, psi, xi, zeta, lam, scale, rel=1e-7):
    """First order >= 2 whose fitted coefficient exceeds ``rel * scale`` (0 if none up to 5)."""
    c = brute_force_theta(phi, psi, xi, zeta, lam)
    big = np.flatnonzero(np.abs(c[2:6]) > rel * scale)
    return int(big[0]) + 2 if big.size else 0


def _text(terms):
    return " + ".join(f"({float(c)!r})*x^{i}*y^{j}" for (i, j), c in sorted(terms.items())) or "0"


def _grad(terms, q):
    gx = sum(c * i * q[0] ** (i - 1) * q[1] ** j for (i, j), c in terms.items() if i)
    gy = sum(c * j * q[0] ** i * q[1] ** (j - 1) for (i, j), c in terms.items() if j)
    return np.array([gx, gy])


def two_parallel_patch(rng):
    """Graph patch (x, y, g3, g4) on [-1, 1]^2 and two points with equal tangent planes.

    Random cubic/quartic g3, g4 are corrected by a quadratic whose gradient
    jump between p and q cancels theirs.
    """
    p, q = rng.uniform(-0.8, 0.8, (2, 2))
    while np.linalg.norm(p - q) < 0.3:
        q = rng.uniform(-0.8, 0.8, 2)
    d = q - p
    comps = []
    for _ in range(2):
        g = {(i, j): float(rng.uniform(-1, 1)) for i in range(5) for j in range(5 - i)
             if i + j >= 2}
        w = -(_grad(g, q) - _grad(g, p))
        n2 = d @ d
        K = (np.outer(w, d) + np.outer(d, w)) / n2 - (w @ d) * np.outer(d, d) / n2 ** 2
        g[(2, 0)] += K[0, 0] / 2
        g[(1, 1)] += K[0, 1]
        g[(0, 2)] += K[1, 1] / 2
        comps.append(_text(g))
    return patch("x", "y", *comps), tuple(p), tuple(q)
