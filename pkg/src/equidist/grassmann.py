"""Plucker coordinates of 2-planes in R^4 and the weak-parallelism form.

Coordinates are ordered ``(p12, p13, p14, p23, p24, p34)`` and normalised to
unit length with the first non-negligible entry positive, so that two
planes coincide exactly when their coordinates do.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial import cKDTree

from . import kernels
from .config import DEFAULT, Tolerances
from .surface import SurfacePatch

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
LABELS = ("p12", "p13", "p14", "p23", "p24", "p34")


class DependentVectors(ValueError):
    pass


class ChartOutOfRange(ValueError):
    pass


def bivector(u, v) -> np.ndarray:
    """Unnormalised coordinates of u ^ v; batched over leading axes."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.stack([u[..., i] * v[..., j] - u[..., j] * v[..., i] for i, j in PAIRS], axis=-1)


def normalize(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    n = np.linalg.norm(p, axis=-1, keepdims=True)
    q = p / np.where(n == 0, 1.0, n)
    big = np.abs(q) > 1e-12
    first = np.argmax(big, axis=-1)
    lead = np.take_along_axis(q, first[..., None], axis=-1)
    return np.where(lead < 0, -q, q) + 0.0


def relation(p):
    """Plucker relation p12 p34 + p23 p14 - p13 p24."""
    p = np.asarray(p, dtype=float)
    return p[..., 0] * p[..., 5] + p[..., 3] * p[..., 2] - p[..., 1] * p[..., 4]


def relation_gradient(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return np.stack([p[..., 5], -p[..., 4], p[..., 3], p[..., 2], -p[..., 1], p[..., 0]], axis=-1)


@dataclass(frozen=True)
class PluckerCoords:
    coords: tuple

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords)

    def relation_residual(self) -> float:
        return float(relation(self.array))

    def as_dict(self) -> dict:
        return dict(zip(LABELS, self.coords))


def _coords(P) -> np.ndarray:
    return P.array if isinstance(P, PluckerCoords) else np.asarray(P, dtype=float)


def plucker(u, v, tol: Tolerances = DEFAULT) -> PluckerCoords:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    raw = bivector(u, v)
    if np.linalg.norm(raw) <= tol.rank_rel * np.linalg.norm(u) * np.linalg.norm(v):
        raise DependentVectors("vectors do not span a plane")
    return PluckerCoords(tuple(float(x) for x in normalize(raw)))


def weak_form(P, Q):
    """Symmetric pairing whose zero set is the weakly parallel plane pairs.

    For unnormalised bivectors it equals det[u1 u2 u3 u4].
    """
    p, q = _coords(P), _coords(Q)
    out = (p[..., 0] * q[..., 5] + p[..., 5] * q[..., 0] + p[..., 2] * q[..., 3]
           + p[..., 3] * q[..., 2] - p[..., 1] * q[..., 4] - p[..., 4] * q[..., 1])
    return float(out) if np.ndim(out) == 0 else out


def tangent_det(u1, u2, u3, u4):
    """det[u1 u2 u3 u4] for batched vectors ``(..., 4)``."""
    m = np.stack(np.broadcast_arrays(*(np.asarray(u, dtype=float) for u in (u1, u2, u3, u4))),
                 axis=-1)
    out = kernels.det4(np.ascontiguousarray(m.reshape(-1, 4, 4))).reshape(m.shape[:-2])
    return float(out) if out.ndim == 0 else out


def gauss_map(patch: SurfacePatch, q) -> PluckerCoords:
    _, t1, t2 = patch.derivatives(q, order=1)
    return plucker(t1, t2)


def gauss_map_grid(patch: SurfacePatch, u, v) -> np.ndarray:
    _, t1, t2 = patch.derivatives((u, v), order=1)
    return normalize(bivector(t1, t2))


def _antisym(p) -> np.ndarray:
    m = np.zeros((4, 4))
    for k, (i, j) in enumerate(PAIRS):
        m[i, j] = p[k]
        m[j, i] = -p[k]
    return m


def _from_antisym(m) -> np.ndarray:
    return np.array([m[i, j] for i, j in PAIRS])


def plane_basis(P) -> np.ndarray:
    """Orthonormal ``(e1, e2)`` (as columns) with e1 ^ e2 = P."""
    p = _coords(P)
    if abs(relation(p)) > 1e-8 * np.dot(p, p):
        raise ValueError("coordinates violate the Plucker relation")
    uu, _, _ = np.linalg.svd(_antisym(p))
    e1, e2 = uu[:, 0], uu[:, 1]
    if np.dot(bivector(e1, e2), p) < 0:
        e2 = -e2
    return np.stack([e1, e2], axis=1)


def adapted_basis(P) -> np.ndarray:
    """Positively oriented orthonormal basis whose first two vectors span P."""
    e12 = plane_basis(P)
    uu, _, _ = np.linalg.svd(np.eye(4) - e12 @ e12.T)
    comp = uu[:, :2]
    B = np.concatenate([e12, comp], axis=1)
    if np.linalg.det(B) < 0:
        B[:, 3] = -B[:, 3]
    return B


def transform(Q, B) -> np.ndarray:
    """Coordinates of the plane Q in the basis given by the columns of ``B``."""
    Binv = np.linalg.inv(B)
    return _from_antisym(Binv @ _antisym(_coords(Q)) @ Binv.T)


_SHEARS = (np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([[1.0, 1.0], [-1.0, 1.0]]),
           np.array([[1.0, -1.0], [1.0, 1.0]]))


@dataclass(frozen=True)
class FiberReport:
    member: bool
    coords: tuple  # (alpha, beta, gamma, delta) of the affine chart
    residual: float
    q_adapted: tuple
    basis: np.ndarray
    sheared: bool


def cone_fiber_residual(P, Q, strict: bool = False, tol: Tolerances = DEFAULT) -> FiberReport:
    """Locate Q relative to the fibre of planes weakly parallel to P.

    In a basis adapted to P the fibre is {q34 = 0, q23 q14 - q13 q24 = 0}; in
    the chart q12 = 1 it is the cone alpha delta - beta gamma = 0.  When Q sits
    on the chart boundary (q12 = 0) the complement of P is sheared by a
    multiple of P's basis, which keeps q34 and membership but moves Q into
    the chart; ``strict=True`` raises instead.
    """
    q = normalize(_coords(Q))
    B = adapted_basis(P)
    qa = transform(q, B)
    scale = np.linalg.norm(qa)
    member = (abs(qa[5]) <= tol.weak_form_zero * scale
              and abs(qa[3] * qa[2] - qa[1] * qa[4]) <= tol.weak_form_zero * scale ** 2)
    sheared = False
    if abs(qa[0]) <= tol.plucker_match * scale:
        if strict:
            raise ChartOutOfRange("q12 vanishes in the adapted basis")
        best = None
        for K in _SHEARS:
            Bs = B.copy()
            Bs[:, 2:] = B[:, 2:] + B[:, :2] @ K
            cand = transform(q, Bs)
            if best is None or abs(cand[0]) > abs(best[1][0]) * (1 + 1e-12):
                best = (Bs, cand)
        B, qa = best
        sheared = True
        if abs(qa[0]) <= tol.plucker_match * np.linalg.norm(qa):
            raise ChartOutOfRange("no chart with q12 != 0 found")
    al, be, ga, de = (float(qa[k] / qa[0]) + 0.0 for k in (1, 2, 3, 4))
    return FiberReport(bool(member), (al, be, ga, de), al * de - be * ga,
                       tuple(float(x) for x in qa), B, sheared)


def w_jacobian(P, Q) -> np.ndarray:
    """3x12 Jacobian of (relation(P), relation(Q), weak_form(P, Q)) in (P, Q)."""
    p, q = _coords(P), _coords(Q)
    jac = np.zeros((3, 12))
    jac[0, :6] = relation_gradient(p)
    jac[1, 6:] = relation_gradient(q)
    jac[2, :6] = relation_gradient(q)
    jac[2, 6:] = relation_gradient(p)
    return jac


def w_jacobian_rank(P, Q, rel: float = 1e-8) -> int:
    s = np.linalg.svd(w_jacobian(P, Q), compute_uv=False)
    return int(np.sum(s > rel * s[0]))


@dataclass(frozen=True)
class DoublePoint:
    q1: tuple
    q2: tuple
    residual: float


def _param_dist(patch: SurfacePatch, a, b) -> float:
    d = np.abs(np.asarray(a) - np.asarray(b))
    for k in range(2):
        if patch.periodic[k]:
            period = patch.periods[k]
            d[k] = min(d[k] % period, period - d[k] % period)
    return float(np.hypot(d[0], d[1]))


def _sign_dist(a, b):
    return np.minimum(np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1))


def polish_double_point(patch: SurfacePatch, q1, q2, tol: Tolerances = DEFAULT):
    """Least-squares solve G(q1) = G(q2) from a starting pair; None when it fails."""

    def resid(z):
        a = gauss_map_grid(patch, np.array(z[0]), np.array(z[1]))
        b = gauss_map_grid(patch, np.array(z[2]), np.array(z[3]))
        sgn = 1.0 if np.dot(a, b) >= 0 else -1.0
        return a - sgn * b

    z0 = np.array([q1[0], q1[1], q2[0], q2[1]], dtype=float)
    sol = least_squares(resid, z0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    r = float(np.linalg.norm(sol.fun))
    if r > tol.plucker_match:
        return None
    a = tuple(float(w) for w in patch.reduce(sol.x[0], sol.x[1]))
    b = tuple(float(w) for w in patch.reduce(sol.x[2], sol.x[3]))
    if a > b:
        a, b = b, a
    return DoublePoint(a, b, r)


def gauss_double_points(patch: SurfacePatch, n: int = 60, min_separation: float | None = None,
                        tol: Tolerances = DEFAULT) -> list:
    """Pairs of distinct points with the same tangent plane.

    The normalised Gauss map is sampled on an ``n x n`` grid and near-coincident
    samples are paired through a k-d tree (each image is inserted with both
    signs so the sign convention never splits a match).  Candidates that are
    local minima of the image distance over the 4-D grid neighbourhood are
    polished by least squares on the four parameters.
    """
    x0, x1, y0, y1 = patch.domain
    endpoint = [not patch.periodic[0], not patch.periodic[1]]
    us = np.linspace(x0, x1, n, endpoint=endpoint[0])
    vs = np.linspace(y0, y1, n, endpoint=endpoint[1])
    U, V = np.meshgrid(us, vs, indexing="ij")
    Gg = gauss_map_grid(patch, U, V)
    G = Gg.reshape(-1, 6)
    h = max(us[1] - us[0], vs[1] - vs[0])
    if min_separation is None:
        min_separation = 4 * h
    step = max(_sign_dist(Gg[1:], Gg[:-1]).max(), _sign_dist(Gg[:, 1:], Gg[:, :-1]).max())
    m = G.shape[0]
    tree = cKDTree(np.concatenate([G, -G]))
    pairs = tree.query_pairs(step, output_type="ndarray") % m
    pairs = np.sort(pairs, axis=1)
    pairs = np.unique(pairs[pairs[:, 0] != pairs[:, 1]], axis=0)
    if len(pairs) == 0:
        return []
    ia, ja = np.divmod(pairs[:, 0], n)
    ib, jb = np.divmod(pairs[:, 1], n)

    def grid_gap(di, dj, period_i, period_j):
        di = np.abs(di).astype(float) * (us[1] - us[0])
        dj = np.abs(dj).astype(float) * (vs[1] - vs[0])
        if patch.periodic[0]:
            di = np.minimum(di, period_i - di)
        if patch.periodic[1]:
            dj = np.minimum(dj, period_j - dj)
        return np.hypot(di, dj)

    far = grid_gap(ia - ib, ja - jb, *patch.periods) >= min_separation
    ia, ja, ib, jb = ia[far], ja[far], ib[far], jb[far]
    d0 = _sign_dist(Gg[ia, ja], Gg[ib, jb])
    keep = np.ones(len(d0), dtype=bool)

    def shift(idx, off, axis):
        idx = idx + off
        if patch.periodic[axis]:
            return idx % n, np.ones(len(idx), dtype=bool)
        ok = (idx >= 0) & (idx < n)
        return np.clip(idx, 0, n - 1), ok

    offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * 4, indexing="ij")).reshape(4, -1).T
    for off in offsets:
        if not off.any():
            continue
        a1, k1 = shift(ia, off[0], 0)
        a2, k2 = shift(ja, off[1], 1)
        b1, k3 = shift(ib, off[2], 0)
        b2, k4 = shift(jb, off[3], 1)
        d = _sign_dist(Gg[a1, a2], Gg[b1, b2])
        keep &= ~((k1 & k2 & k3 & k4) & (d < d0))

    found: list = []
    for k in np.flatnonzero(keep):
        try:
            dp = polish_double_point(patch, (us[ia[k]], vs[ja[k]]), (us[ib[k]], vs[jb[k]]), tol)
        except ValueError:
            continue
        if dp is None:
            continue
        a, b = np.array(dp.q1), np.array(dp.q2)
        if _param_dist(patch, a, b) < min_separation:
            continue
        near = 10 * tol.dedup
        if any(_param_dist(patch, a, d.q1) < near and _param_dist(patch, b, d.q2) < near
               for d in found):
            continue
        found.append(dp)
    found.sort(key=lambda d: (d.q1, d.q2))
    return found
