"""Regenerate frozen.json from symbolic / high-precision computations.

Independent of the package: sympy does the differentiation, series and
determinants, mpmath the root finding.  Run from the repository root:

    python3 tests/oracles/build_oracles.py
"""
import json
from pathlib import Path

import mpmath as mp
import sympy as sp

mp.mp.dps = 40
x, y, z, s = sp.symbols("x y z s")

TORUS = [
    sp.cos(x) * (1 - sp.cos(y) / 10) + sp.sin(x) * sp.sin(y) / 10,
    (1 - sp.cos(y) / 10) * sp.sin(x) - sp.cos(x) * sp.sin(y) / 10,
    sp.cos(2 * x) * (1 - 2 * sp.cos(y) / 5) + 4 * sp.sin(2 * x) * sp.sin(y) / 5,
    (1 - 2 * sp.cos(y) / 5) * sp.sin(2 * x) - 4 * sp.cos(2 * x) * sp.sin(y) / 5,
]


def fl(e):
    return float(sp.N(e, 30))


def taylor2(expr, x0, y0, order):
    """Coefficients c_ij of the Taylor polynomial, graded order."""
    out = {}
    for n in range(order + 1):
        for i in range(n, -1, -1):
            j = n - i
            d = sp.diff(expr, x, i, y, j) if (i or j) else expr
            out[f"{i},{j}"] = fl(d.subs({x: x0, y: y0}) / (sp.factorial(i) * sp.factorial(j)))
    return out


def torus_points():
    pts = {}
    for name, (a, b) in {"origin": (0, 0), "pipi": (sp.pi, sp.pi)}.items():
        pts[name] = [fl(c.subs({x: a, y: b})) for c in TORUS]
    return pts


def torus_derivs(a, b):
    out = {}
    for key, (i, j) in {"t1": (1, 0), "t2": (0, 1), "fuu": (2, 0), "fuv": (1, 1),
                        "fvv": (0, 2)}.items():
        out[key] = [fl(sp.diff(c, x, i, y, j).subs({x: a, y: b})) for c in TORUS]
    return out


def delta_at(a, b):
    """Delta from an mpmath orthonormal normal frame (least-squares complement)."""
    subs = {x: a, y: b}
    t1 = mp.matrix([mp.mpf(str(fl(sp.diff(c, x).subs(subs)))) for c in TORUS])
    t2 = mp.matrix([mp.mpf(str(fl(sp.diff(c, y).subs(subs)))) for c in TORUS])
    T = mp.matrix(4, 2)
    for k in range(4):
        T[k, 0], T[k, 1] = t1[k], t2[k]
    # orthonormal basis of the normal plane: QR of [t1 t2 e_a e_b] for the best pair (a, b)
    best = None
    for a_ in range(4):
        for b_ in range(a_ + 1, 4):
            M = mp.matrix(4, 4)
            for k in range(4):
                M[k, 0], M[k, 1] = T[k, 0], T[k, 1]
                M[k, 2] = 1 if k == a_ else 0
                M[k, 3] = 1 if k == b_ else 0
            d = abs(mp.det(M))
            if best is None or d > best[0]:
                best = (d, M)
    Q, _ = mp.qr(best[1])
    n3 = [Q[k, 2] for k in range(4)]
    n4 = [Q[k, 3] for k in range(4)]
    sec = [[mp.mpf(str(fl(sp.diff(c, x, i, y, j).subs(subs)))) for c in TORUS]
           for i, j in ((2, 0), (1, 1), (0, 2))]
    dot = lambda u, v: sum(u[k] * v[k] for k in range(4))
    A, B, C = (dot(n3, w) for w in sec)
    E, F, G = (dot(n4, w) for w in sec)
    d = (A * F - B * E) * (B * G - C * F) - (A * G - C * E) ** 2 / 4
    return float(d)


def parabolic_root():
    # Delta along x = 0 changes sign at y+; bracketed high-precision root
    return float(mp.findroot(lambda t: delta_at(0.0, float(t)) * 1e6, (1.1, 1.3),
                             solver="anderson", tol=1e-24, verify=False))


def jet_cases():
    exprs = {
        "sin_x_exp_y": sp.sin(x) * sp.exp(y),
        "ratio": (1 + x * y) / (2 + x ** 2 + y),
        "sqrt_atan": sp.sqrt(3 + x + y ** 2) * sp.atan(x - 2 * y + sp.Rational(1, 2)),
        "power": (1 + x + y) ** sp.Rational(-3, 2),
        "torus_f3": TORUS[2],
    }
    return {k: taylor2(e, sp.Rational(3, 10), sp.Rational(11, 10), 6) for k, e in exprs.items()}


def wp_quadric():
    u, v = sp.symbols("u v")
    f = [x, y, x ** 2, y ** 2]
    t = lambda c: [sp.diff(g, c) for g in f]
    at_p = [[g.subs({x: 0, y: 0}) for g in t(x)], [g.subs({x: 0, y: 0}) for g in t(y)]]
    at_q = [[g.subs({x: u, y: v}) for g in t(x)], [g.subs({x: u, y: v}) for g in t(y)]]
    J = sp.Matrix([at_p[0], at_p[1], at_q[0], at_q[1]]).T.det()
    return str(sp.expand(J))


def theta_series(phi, psi, xi, zeta, lam, order=6):
    """theta(y) of the 1-parallel contact map, by fixed-point iteration on K1 = 0."""
    r = (1 - lam) / lam
    m = -lam / (1 - lam)
    u, w = sp.symbols("u w")
    zz = sp.Integer(0)
    for _ in range(order + 1):
        arg2 = psi.subs({y: y, z: zz})
        k1_rest = r * xi.subs({u: m * y, w: m * arg2}, simultaneous=True)
        zz = sp.series(-k1_rest, y, 0, order + 1).removeO()
    arg2 = psi.subs({z: zz})
    theta = phi.subs({z: zz}) + r * zeta.subs({u: m * y, w: m * arg2}, simultaneous=True)
    ser = sp.series(sp.expand(theta), y, 0, order + 1).removeO()
    return [fl(ser.coeff(y, k)) for k in range(order + 1)]


def contact_cases():
    u, w = sp.symbols("u w")
    lam = sp.Rational(1, 2)
    cases = {
        # M+ graph (y, z, phi, psi), M- graph (u, xi, zeta, w) over (u, w)
        "a1": (y ** 2, z ** 2 + y * z, u * w, sp.Integer(0)),
        "a2": (y ** 3 + z * y, z ** 2, u ** 2 * w, u ** 2 / 2),
        "mixed": (y ** 2 + y ** 3 / 3 + z * y ** 2, z * y + y ** 4, u ** 2 + w * u, 2 * u ** 2 - u ** 3),
    }
    out = {}
    for name, (phi, psi, xi, zeta) in cases.items():
        for lam in (sp.Rational(1, 2), sp.Rational(3, 10)):
            out[f"{name}@{lam}"] = theta_series(phi, psi, xi, zeta, lam)
    return out


def main():
    y_plus = 2 * sp.atan(sp.sqrt((sp.sqrt(41) - 4) / 5))
    data = {
        "torus_points": torus_points(),
        "torus_derivs_0.3_1.1": torus_derivs(sp.Rational(3, 10), sp.Rational(11, 10)),
        "torus_delta": {f"{a},{b}": delta_at(a, b)
                        for a, b in ((0.0, 0.0), (0.0, 3.141592653589793), (1.0, 0.5),
                                     (2.0, 2.0), (0.4, 4.0))},
        "y_plus_closed_form": fl(y_plus),
        "y_plus_root": parabolic_root(),
        "jets_at_0.3_1.1": jet_cases(),
        "catalan_implicit": [0, 1, -1, 2, -5, 14, -42],
        "wp_quadric_J": wp_quadric(),
        "theta": contact_cases(),
    }
    path = Path(__file__).with_name("frozen.json")
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
