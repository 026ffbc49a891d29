"""Zero-set tracing on parameter grids and the global searches built on it.

The weakly parallel set of a point p is the zero set of

    J(q) = det[t1(p), t2(p), t1(q), t2(q)],

traced by marching squares.  Its singular points are critical points of J
on the zero set; their Hessian sign separates isolated points, cusps and
transversal crossings.  The same tracer handles the zero set of Delta and
the Whitney-umbrella sections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.spatial import cKDTree

from . import exprparse, extgeom, kernels
from .config import DEFAULT, Tolerances
from .contact import (DegenerateReason, SingLabel, SingTag, classify_chord, contact_map_1par,
                      contact_map_2par, label_from_order, quadratic_form_of, reduce_theta,
                      theta_orders)
from .grassmann import bivector, normalize, weak_form
from .jets import Jet2
from .parallel import adapt_frames, adapt_frames_batch, degree_from_tangents, make_chord
from .surface import SurfacePatch


class GridTooCoarse(RuntimeError):
    pass


class MarkerKind(str, Enum):
    ISOLATED = "Isolated"
    CUSP = "Cusp"
    CROSSING = "Crossing"


class UmbrellaClass(str, Enum):
    ISOLATED_PLUS_BRANCH = "IsolatedPlusBranch"
    CUSP = "Cusp"
    LOOP = "Loop"


_UMBRELLA_OF_KIND = {
    MarkerKind.ISOLATED: UmbrellaClass.ISOLATED_PLUS_BRANCH,
    MarkerKind.CUSP: UmbrellaClass.CUSP,
    MarkerKind.CROSSING: UmbrellaClass.LOOP,
}

DEFAULT_WINDOW = 0.5


# -- scalar fields on a parameter box -----------------------------------------

class Field:
    """A smooth function on a parameter box.

    Subclasses provide ``values(u, v)`` on broadcast arrays and, when
    critical points are wanted, ``jet(u, v, order)`` returning a batched Jet2.
    """

    name = "field"
    patch: SurfacePatch | None = None

    def __init__(self, box, periodic=(False, False)):
        self.box = tuple(float(b) for b in box)
        self.periodic = tuple(bool(p) for p in periodic)

    def values(self, u, v):
        raise NotImplementedError

    def jet(self, u, v, order: int) -> Jet2:
        raise NotImplementedError


def _pair_with(P, b):
    """weak_form(P, b) for a fixed bivector P and a list of six jets b."""
    return (b[5] * P[0] + b[0] * P[5] + b[3] * P[2] + b[2] * P[3]
            - b[4] * P[1] - b[1] * P[4])


def _window_box(patch: SurfacePatch, p, window):
    if window is None:
        return patch.domain, patch.periodic
    w = float(window)
    box = [p[0] - w, p[0] + w, p[1] - w, p[1] + w]
    for k in range(2):
        if not patch.periodic[k]:
            box[2 * k] = max(box[2 * k], patch.domain[2 * k])
            box[2 * k + 1] = min(box[2 * k + 1], patch.domain[2 * k + 1])
    return tuple(box), (False, False)


class ParallelismField(Field):
    name = "parallelism"

    def __init__(self, patch: SurfacePatch, p, window=None):
        self.patch = patch
        self.p = tuple(float(w) for w in patch.reduce(*p))
        _, t1, t2 = patch.derivatives(self.p, order=1)
        self.P = bivector(t1, t2)
        self.scale = float(np.linalg.norm(self.P))
        box, periodic = _window_box(patch, self.p, window)
        super().__init__(box, periodic)

    def values(self, u, v):
        _, t1, t2 = self.patch.derivatives((u, v), order=1)
        return weak_form(self.P, bivector(t1, t2))

    def jet(self, u, v, order):
        comps = self.patch.jet_at((u, v), order + 1)
        t1 = [c.deriv(0) for c in comps]
        t2 = [c.deriv(1) for c in comps]
        b = [t1[i] * t2[j] - t1[j] * t2[i] for i, j in
             ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))]
        return _pair_with(self.P, b)


def parallelism_fn(patch: SurfacePatch, p, q):
    """det[t1(p), t2(p), t1(q), t2(q)]; ``q`` may be batched as (2, *batch)."""
    return ParallelismField(patch, p).values(q[0], q[1])


class DeltaField(Field):
    name = "delta"

    def __init__(self, patch: SurfacePatch, box=None):
        self.patch = patch
        if box is None:
            super().__init__(patch.domain, patch.periodic)
        else:
            super().__init__(box, (False, False))

    def values(self, u, v):
        return extgeom.delta(extgeom.second_form_grid(self.patch, u, v))


class ExprField(Field):
    """An expression in x, y and the parameter s."""

    def __init__(self, expr, box, s=0.0, name="expr"):
        self.expr = exprparse.parse(expr) if isinstance(expr, str) else expr
        self.s = float(s)
        self.name = name
        super().__init__(box, (False, False))

    def values(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        out = exprparse.evaluate(self.expr, {"x": u, "y": v, "s": self.s})
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast_shapes(u.shape, v.shape))

    def jet(self, u, v, order):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        zero = np.zeros(np.broadcast_shapes(u.shape, v.shape))
        x = Jet2.variable(0, u + zero, order)
        y = Jet2.variable(1, v + zero, order)
        out = exprparse.evaluate(self.expr, {"x": x, "y": y, "s": self.s})
        if not isinstance(out, Jet2):
            out = Jet2.constant(np.broadcast_to(out, zero.shape), order)
        return out + zero


# -- results ------------------------------------------------------------------

@dataclass(frozen=True)
class Marker:
    point: tuple
    kind: MarkerKind
    tangents: tuple  # unit directions in the parameter plane
    delta: float  # Delta of the surface at the point; nan for non-surface fields
    hessian_det: float
    check: float | None = None  # Hessian/4 Delta residual at a 2-parallel point


@dataclass(frozen=True)
class CurveTrace:
    polylines: list
    markers: list
    base_point: tuple | None
    point_class: extgeom.PointClass | None
    grid: tuple
    box: tuple
    field_name: str = "parallelism"
    patch: SurfacePatch | None = field(default=None, compare=False, repr=False)

    def marker_near(self, q, radius: float):
        best = None
        for m in self.markers:
            d = _box_dist(self, m.point, q)
            if d <= radius and (best is None or d < best[0]):
                best = (d, m)
        return None if best is None else best[1]


def _box_dist(trace, a, b) -> float:
    if trace.patch is None:
        return _periodic_dist(a, b, (False, False), (1.0, 1.0))
    return _periodic_dist(a, b, trace.patch.periodic, trace.patch.periods)


def _periodic_dist(a, b, periodic, per) -> float:
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    for k in range(2):
        if periodic[k]:
            d[k] = min(d[k] % per[k], per[k] - d[k] % per[k])
    return float(np.hypot(d[0], d[1]))


# -- marching squares -----------------------------------------------------------

def _axis(lo, hi, n, periodic):
    return np.linspace(lo, hi, n, endpoint=not periodic)


def _refine_edges(fld: Field, a, b, fa, tol: Tolerances):
    """Bisection of the sign boundary on segments a->b, ``fa`` the value at a."""
    lo = np.zeros(len(a))
    hi = np.ones(len(a))
    length = float(np.max(np.linalg.norm(b - a, axis=1))) if len(a) else 0.0
    steps = max(1, int(math.ceil(math.log2(max(length, tol.bisect) / tol.bisect))) + 1)
    pos_a = fa >= 0.0
    d = b - a
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        pt = a + mid[:, None] * d
        fm = fld.values(pt[:, 0], pt[:, 1])
        same = (fm >= 0.0) == pos_a
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    t = 0.5 * (lo + hi)
    return a + t[:, None] * d


def _chains(segs: np.ndarray) -> list:
    """Chains of edge ids from unordered segments; each edge joins at most two segments."""
    adj: dict = {}
    for k, (e0, e1) in enumerate(segs.tolist()):
        adj.setdefault(e0, []).append((e1, k))
        adj.setdefault(e1, []).append((e0, k))
    used = np.zeros(len(segs), dtype=bool)
    out = []

    def walk(start):
        chain = [start]
        cur = start
        while True:
            nxt = None
            for e, k in adj[cur]:
                if not used[k]:
                    used[k] = True
                    nxt = e
                    break
            if nxt is None:
                return chain
            chain.append(nxt)
            cur = nxt

    for e in sorted(adj):  # open chains first, from their lowest end
        if len(adj[e]) == 1 and not all(used[k] for _, k in adj[e]):
            out.append(walk(e))
    for e in sorted(adj):
        if not all(used[k] for _, k in adj[e]):
            out.append(walk(e))
    return out


def _split_wraps(pts: np.ndarray, fld: Field) -> list:
    lo = np.array([fld.box[0], fld.box[2]])
    per = np.array([fld.box[1] - fld.box[0], fld.box[3] - fld.box[2]])
    wrapped = pts.copy()
    for k in range(2):
        if fld.periodic[k]:
            wrapped[:, k] = lo[k] + np.mod(wrapped[:, k] - lo[k], per[k])
    jump = np.zeros(len(pts) - 1, dtype=bool)
    for k in range(2):
        if fld.periodic[k]:
            jump |= np.abs(np.diff(wrapped[:, k])) > 0.5 * per[k]
    cuts = np.flatnonzero(jump) + 1
    return [p for p in np.split(wrapped, cuts) if len(p) >= 2]


def contour(fld: Field, n: int, tol: Tolerances = DEFAULT):
    """Polylines of the zero set of ``fld`` on an ``n x n`` grid, plus the grid data."""
    if n < 8:
        raise ValueError("grid resolution must be at least 8")
    x0, x1, y0, y1 = fld.box
    px, py = fld.periodic
    us = _axis(x0, x1, n, px)
    vs = _axis(y0, y1, n, py)
    U, V = np.meshgrid(us, vs, indexing="ij")
    F = np.ascontiguousarray(fld.values(U, V), dtype=float)
    hx, hy = us[1] - us[0], vs[1] - vs[0]
    cases = kernels.cell_cases(F, px, py)
    center_pos = np.zeros(cases.shape, dtype=bool)
    si, sj = np.nonzero((cases == 5) | (cases == 10))
    if len(si):
        center_pos[si, sj] = fld.values(us[si] + 0.5 * hx, vs[sj] + 0.5 * hy) >= 0.0
    segs = kernels.segments_from_cases(cases, center_pos, n, n)
    polylines = []
    if len(segs):
        edges = np.unique(segs)
        node, direction = np.divmod(edges, 2)
        i, j = np.divmod(node, n)
        a = np.stack([us[i], vs[j]], axis=1)
        step = np.where(direction[:, None] == 0, [[hx, 0.0]], [[0.0, hy]])
        fa = F[i, j]
        pts = _refine_edges(fld, a, a + step, fa, tol)
        lookup = dict(zip(edges.tolist(), range(len(edges))))
        for chain in _chains(segs):
            poly = pts[[lookup[e] for e in chain]]
            polylines.extend(_split_wraps(poly, fld))
    return polylines, (us, vs, F)


# -- critical points -------------------------------------------------------------

def _grad_grid(F, h, periodic, axis):
    if periodic:
        return (np.roll(F, -1, axis=axis) - np.roll(F, 1, axis=axis)) / (2 * h)
    return np.gradient(F, h, axis=axis)


def _sign_change_cells(G, px, py):
    n0, n1 = G.shape
    mx = n0 if px else n0 - 1
    my = n1 if py else n1 - 1
    i0 = np.arange(mx)
    j0 = np.arange(my)
    i1 = (i0 + 1) % n0
    j1 = (j0 + 1) % n1
    c = np.stack([G[i0][:, j0], G[i1][:, j0], G[i1][:, j1], G[i0][:, j1]])
    return (c.min(axis=0) <= 0.0) & (c.max(axis=0) >= 0.0)


def _newton(fld: Field, z0: np.ndarray, h: float, iters: int = 60):
    z = z0.copy()
    for _ in range(iters):
        jt = fld.jet(z[:, 0], z[:, 1], 2)
        g = np.stack([jt[1, 0], jt[0, 1]], axis=-1)
        H = np.moveaxis(jt.hessian(), (0, 1), (-2, -1))
        step = -np.einsum("nij,nj->ni", np.linalg.pinv(H, rcond=1e-13), g)
        norm = np.linalg.norm(step, axis=1, keepdims=True)
        step = np.where(norm > 3 * h, step * (3 * h) / np.maximum(norm, 1e-300), step)
        z = z + step
        if np.all(norm < 1e-14):
            break
    return z


def _null_cone(H):
    """Two unit directions with w^T H w = 0 for an indefinite symmetric 2x2 H."""
    w, vecs = np.linalg.eigh(H)
    lo, hi = w
    a, b = np.sqrt(max(hi, 0.0)), np.sqrt(max(-lo, 0.0))
    dirs = [extgeom.canonical_direction(a * vecs[:, 0] + s * b * vecs[:, 1]) for s in (1.0, -1.0)]
    dirs.sort(key=lambda d: tuple(-d))
    return tuple(dirs)


def classify_critical(H: np.ndarray, tol: Tolerances = DEFAULT):
    """Kind and tangent directions of a critical point on the zero set from its Hessian."""
    det = float(np.linalg.det(H))
    norm = float(np.abs(H).max())
    if norm == 0.0 or abs(det) <= tol.cusp_rel * norm ** 2:
        return MarkerKind.CUSP, (extgeom.kernel_direction(H),), det
    if det > 0:
        return MarkerKind.ISOLATED, (), det
    return MarkerKind.CROSSING, _null_cone(H), det


def _gauss_seeds(fld: ParallelismField, us, vs):
    """Grid points whose tangent plane is locally closest to the one at p."""
    U, V = np.meshgrid(us, vs, indexing="ij")
    _, t1, t2 = fld.patch.derivatives((U, V), order=1)
    G = normalize(bivector(t1, t2))
    Gp = normalize(fld.P)
    d = np.minimum(np.linalg.norm(G - Gp, axis=-1), np.linalg.norm(G + Gp, axis=-1))
    step = max(np.abs(np.diff(d, axis=0)).max(), np.abs(np.diff(d, axis=1)).max())
    keep = d <= 2 * step
    px, py = fld.periodic
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = np.roll(np.roll(d, -di, axis=0), -dj, axis=1)
            valid = np.ones_like(keep)
            if not px:
                if di == 1:
                    valid[-1, :] = False
                elif di == -1:
                    valid[0, :] = False
            if not py:
                if dj == 1:
                    valid[:, -1] = False
                elif dj == -1:
                    valid[:, 0] = False
            keep &= ~(valid & (nb < d))
    i, j = np.nonzero(keep)
    return np.stack([us[i], vs[j]], axis=1)


def critical_points(fld: Field, grid, seeds=(), tol: Tolerances = DEFAULT) -> list:
    """Critical points of ``fld`` lying on its zero set, classified by the Hessian."""
    us, vs, F = grid
    hx, hy = us[1] - us[0], vs[1] - vs[0]
    px, py = fld.periodic
    gu = _grad_grid(F, hx, px, 0)
    gv = _grad_grid(F, hy, py, 1)
    cells = _sign_change_cells(gu, px, py) & _sign_change_cells(gv, px, py)
    ci, cj = np.nonzero(cells)
    starts = [np.stack([us[ci] + 0.5 * hx, vs[cj] + 0.5 * hy], axis=1)]
    if isinstance(fld, ParallelismField):
        starts.append(_gauss_seeds(fld, us, vs))
    if len(seeds):
        starts.append(np.asarray(seeds, dtype=float).reshape(-1, 2))
    z0 = np.concatenate(starts)
    if len(z0) == 0:
        return []
    h = max(hx, hy)
    z = _newton(fld, z0, h)
    x0, x1, y0, y1 = fld.box
    for k, per in enumerate((px, py)):
        lo, hi = fld.box[2 * k], fld.box[2 * k + 1]
        if per:
            z[:, k] = lo + np.mod(z[:, k] - lo, hi - lo)
    inside = ((z[:, 0] >= x0 - 1e-12) & (z[:, 0] <= x1 + 1e-12)
              & (z[:, 1] >= y0 - 1e-12) & (z[:, 1] <= y1 + 1e-12))
    z = z[inside & np.all(np.isfinite(z), axis=1)]
    if len(z) == 0:
        return []
    jt = fld.jet(z[:, 0], z[:, 1], 2)
    scale = max(float(np.abs(F).max()), 1e-300)
    grad = np.hypot(jt[1, 0], jt[0, 1])
    hess = np.moveaxis(jt.hessian(), (0, 1), (-2, -1))
    ok = ((np.abs(jt.value) <= tol.critical_value_rel * scale)
          & (grad * h <= 1e3 * tol.critical_value_rel * scale))
    z, hess = z[ok], hess[ok]
    # merge duplicates (periodic-aware) in a deterministic order
    order = np.lexsort((z[:, 1], z[:, 0]))
    z, hess = z[order], hess[order]
    per = (x1 - x0, y1 - y0)
    kept: list = []
    for k in range(len(z)):
        if any(_periodic_dist(z[k], z[m], fld.periodic, per) <= tol.dedup for m in kept):
            continue
        kept.append(k)
    for a_i, a in enumerate(kept):
        for b in kept[a_i + 1:]:
            if _periodic_dist(z[a], z[b], fld.periodic, per) < h:
                raise GridTooCoarse(
                    f"critical points {tuple(z[a].tolist())} and {tuple(z[b].tolist())} "
                    "lie within one grid cell")
    return [(tuple(float(c) for c in z[k]), hess[k]) for k in kept]


def trace_field(fld: Field, n: int = 200, seeds=(), find_critical: bool = True,
                tol: Tolerances = DEFAULT):
    """Polylines and classified critical points of a field's zero set."""
    polylines, grid = contour(fld, n, tol)
    crit = critical_points(fld, grid, seeds, tol) if find_critical else []
    return polylines, crit, grid


# -- weakly parallel sets ------------------------------------------------------------

def hessian_delta_from_graphs(g3: Jet2, g4: Jet2):
    """Hessian determinant of Jac(g3, g4) at 0 and 4 Delta of the graph (u, v, g3, g4)."""
    jac = g3.deriv(0) * g4.deriv(1) - g3.deriv(1) * g4.deriv(0)
    H = float(np.linalg.det(jac.hessian()))
    alpha = np.array([2 * g3[2, 0], g3[1, 1], 2 * g3[0, 2], 2 * g4[2, 0], g4[1, 1], 2 * g4[0, 2]])
    four_delta = 4.0 * extgeom.delta(alpha)
    denom = max(abs(H), abs(four_delta))
    resid = abs(H - four_delta) / denom if denom > 0 else 0.0
    return H, four_delta, resid


@dataclass(frozen=True)
class HessianDeltaReport:
    hessian_det: float
    four_delta: float
    residual: float


def hessian_delta_check(patch: SurfacePatch, p, q, tol: Tolerances = DEFAULT) -> HessianDeltaReport:
    """Compare the Hessian of Jac(g3, g4) with 4 Delta at a point q 2-parallel to p.

    Both sides use the adapted graph (u, v, g3, g4) of the surface at q over
    the common tangent plane.
    """
    pair = make_chord(patch, p, patch, q, 0.5, tol)
    if pair.degree != 2:
        raise ValueError(f"q is not 2-parallel to p (degree {pair.degree})")
    frames = adapt_frames(pair, order=3, tol=tol)
    return HessianDeltaReport(*hessian_delta_from_graphs(frames.xi, frames.zeta))


def trace_wp(patch: SurfacePatch, p, grid: int = 200, window: float | None = None,
             tol: Tolerances = DEFAULT) -> CurveTrace:
    """The set of points weakly parallel to ``p`` with its singular points marked.

    ``window`` restricts the trace to a box of that half-width around p
    (the whole domain when None).
    """
    fld = ParallelismField(patch, p, window)
    polylines, crit, _ = trace_field(fld, grid, seeds=[fld.p], tol=tol)
    markers = []
    for z, H in crit:
        kind, tangents, det = classify_critical(H, tol)
        zr = tuple(float(w) for w in z)  # box coordinates; evaluation wraps periodic axes
        alpha = extgeom.second_form(patch, zr, tol)
        check = None
        if _periodic_dist(zr, fld.p, patch.periodic, patch.periods) > 1e-9:
            try:
                check = hessian_delta_check(patch, fld.p, zr, tol).residual
            except (ValueError, ArithmeticError):
                check = None
        markers.append(Marker(zr, kind, tangents, float(extgeom.delta(alpha.coeffs)), det, check))
    pclass = extgeom.classify_point(extgeom.second_form(patch, fld.p, tol), tol)
    return CurveTrace(polylines, markers, fld.p, pclass, (grid, grid), fld.box, fld.name, patch)


def trace_delta(patch: SurfacePatch, grid: int = 200, tol: Tolerances = DEFAULT) -> CurveTrace:
    """Zero set of Delta (the parabolic curves); no singular-point analysis."""
    fld = DeltaField(patch)
    polylines, _, _ = trace_field(fld, grid, find_critical=False, tol=tol)
    return CurveTrace(polylines, [], None, None, (grid, grid), fld.box, fld.name, patch)


# -- Whitney umbrella ------------------------------------------------------------------

UMBRELLA = "2*x^2 - 3*y^3 - 2*s*y^2"


@dataclass(frozen=True)
class UmbrellaSection:
    t: float
    topology: UmbrellaClass
    trace: CurveTrace


def umbrella_section(t: float, grid: int = 201, tol: Tolerances = DEFAULT) -> UmbrellaSection:
    """Topology of the zero set of 2u^2 - 3v^3 - 2tv^2 near the origin on [-1, 1]^2."""
    fld = ExprField(UMBRELLA, (-1.0, 1.0, -1.0, 1.0), s=t, name="umbrella")
    polylines, crit, _ = trace_field(fld, grid, seeds=[(0.0, 0.0)], tol=tol)
    markers = []
    for z, H in crit:
        kind, tangents, det = classify_critical(H, tol)
        markers.append(Marker(z, kind, tangents, float("nan"), det))
    trace = CurveTrace(polylines, markers, (0.0, 0.0), None, (grid, grid), fld.box, fld.name)
    at0 = trace.marker_near((0.0, 0.0), 10 * tol.dedup)
    if at0 is None:
        raise ArithmeticError("no singular point found at the origin")
    return UmbrellaSection(float(t), _UMBRELLA_OF_KIND[at0.kind], trace)


@dataclass(frozen=True)
class FamilyMember:
    s: float
    p: tuple
    trace: CurveTrace
    kind: MarkerKind | None
    umbrella: UmbrellaClass | None
    point_class: extgeom.PointClass


def wp_family(patch: SurfacePatch, point_of, s_values, grid: int = 201,
              window: float = DEFAULT_WINDOW, tol: Tolerances = DEFAULT) -> list:
    """``trace_wp`` at ``p(s)`` for each s, with the singular type found at p(s).

    ``point_of`` maps s to the base point; the patch is re-bound to each s.
    """
    out = []
    for s in s_values:
        ps = patch.with_s(s)
        p = point_of(s)
        tr = trace_wp(ps, p, grid, window, tol)
        m = tr.marker_near(tr.base_point, 10 * tol.dedup)
        kind = None if m is None else m.kind
        out.append(FamilyMember(float(s), tr.base_point, tr, kind,
                                None if kind is None else _UMBRELLA_OF_KIND[kind], tr.point_class))
    return out


# -- equidistant sampling ------------------------------------------------------------------

@dataclass(frozen=True)
class EquidistantRecord:
    x: np.ndarray
    q_plus: tuple
    q_minus: tuple
    degree: int
    label: SingLabel
    residual: float  # |J(q+, q-)| relative to the tangent norms


@dataclass(frozen=True)
class EquidistantCloud:
    records: tuple
    lam: float
    grid: int
    dropped: int = 0  # roots whose degree came out 0 after refinement

    def __len__(self):
        return len(self.records)

    def points(self) -> np.ndarray:
        return np.array([r.x for r in self.records]).reshape(-1, 4)

    def params(self) -> np.ndarray:
        return np.array([r.q_plus + r.q_minus for r in self.records]).reshape(-1, 4)


def _pair_values(patch_p, qp, patch_m, qm):
    _, a1, a2 = patch_p.derivatives(qp, order=1)
    _, b1, b2 = patch_m.derivatives(qm, order=1)
    J = weak_form(bivector(a1, a2), bivector(b1, b2))
    norm = (np.linalg.norm(a1, axis=-1) * np.linalg.norm(a2, axis=-1)
            * np.linalg.norm(b1, axis=-1) * np.linalg.norm(b2, axis=-1))
    return J, norm


def _index_gap(n, periodic):
    i = np.arange(n)
    d = np.abs(i[:, None] - i[None, :])
    if periodic:
        d = np.minimum(d, n - d)
    return d


def _classify_degree1(patch_p, qp, patch_m, qm, lam, tol):
    frames = adapt_frames_batch(patch_p, qp, patch_m, qm, 1, 6, tol)
    K = contact_map_1par(frames, lam)
    d = np.abs(K.k1[0, 1])
    bad = d < tol.implicit * np.maximum(1.0, K.k1.max_abs())
    if bad.any():
        # singular elimination: label those chords here, batch the rest
        good = np.flatnonzero(~bad)
        labels = np.empty(qp.shape[1], dtype=object)
        if len(good):
            labels[good] = _classify_degree1(patch_p, qp[:, good], patch_m, qm[:, good], lam, tol)
        for k in np.flatnonzero(bad):
            labels[k] = SingLabel(SingTag.DEGENERATE, 0.0,
                                  {"error": f"|dK1/dz(0,0)| below {tol.implicit:g}"},
                                  DegenerateReason.LOW_MARGIN)
        return list(labels)
    theta = reduce_theta(K, tol)
    orders, margins = theta_orders(theta, K.scale(), tol)
    labels = []
    for k in range(qp.shape[1]):
        w = {"theta_derivatives": [float(theta.derivative(j)[k]) for j in range(theta.order + 1)],
             "first_nonzero_order": int(orders[k]) or None}
        labels.append(label_from_order(int(orders[k]), float(margins[k]), w))
    return labels


def _classify_degree2(patch_p, qp, patch_m, qm, lam, tol):
    frames = adapt_frames_batch(patch_p, qp, patch_m, qm, 2, 6, tol)
    K = contact_map_2par(frames, lam, tol)
    alpha = quadratic_form_of(K)
    d = extgeom.delta(alpha)
    d = np.atleast_1d(d)
    scale = np.abs(alpha).max(axis=-1)
    labels = []
    for k in range(qp.shape[1]):
        sc = float(scale[k])
        margin = abs(d[k]) / sc ** 4 if sc > 0 else 0.0
        w = {"alpha": alpha[k].tolist(), "delta": float(d[k])}
        thr = tol.delta_rel * sc ** 4
        if sc > 0 and d[k] < -thr:
            labels.append(SingLabel(SingTag.CPLUS22, margin, w))
        elif sc > 0 and d[k] > thr:
            labels.append(SingLabel(SingTag.CMINUS22, margin, w))
        else:
            labels.append(SingLabel(SingTag.DEGENERATE, margin, w, DegenerateReason.DELTA_ZERO))
    return labels


def _classify_one(patch_p, qp, patch_m, qm, lam, tol):
    try:
        res = classify_chord(patch_p, qp, patch_m, qm, lam, 6, tol)
        return res.label
    except (ValueError, ArithmeticError) as exc:
        return SingLabel(SingTag.DEGENERATE, 0.0, {"error": str(exc)}, DegenerateReason.LOW_MARGIN)


def _classify_batch(patch_p, qp, patch_m, qm, degree, lam, tol, chunk):
    fn = _classify_degree1 if degree == 1 else _classify_degree2
    labels = []
    for start in range(0, qp.shape[1], chunk):
        sl = slice(start, start + chunk)
        labels.extend(_classify_split(fn, patch_p, qp[:, sl], patch_m, qm[:, sl], lam, tol))
    return labels


def _classify_split(fn, patch_p, qp, patch_m, qm, lam, tol):
    try:
        return list(fn(patch_p, qp, patch_m, qm, lam, tol))
    except (ValueError, ArithmeticError):
        # one bad chord spoils a batch: halve until it is isolated
        m = qp.shape[1]
        if m <= 8:
            return [_classify_one(patch_p, tuple(qp[:, k]), patch_m, tuple(qm[:, k]), lam, tol)
                    for k in range(m)]
        h = m // 2
        return (_classify_split(fn, patch_p, qp[:, :h], patch_m, qm[:, :h], lam, tol)
                + _classify_split(fn, patch_p, qp[:, h:], patch_m, qm[:, h:], lam, tol))


def sample_equidistant(patch: SurfacePatch, lam: float, grid4: int = 20,
                       patch_minus: SurfacePatch | None = None, classify: bool = True,
                       chunk: int = 8192, tol: Tolerances = DEFAULT) -> EquidistantCloud:
    """Labelled sample of the lambda-equidistant from a 4-D grid over pairs (q+, q-).

    A pair is critical for the lambda-point map exactly when J(q+, q-) = 0.
    Grid nodes with |J| at round-off level are roots as they stand; every
    other node with a strict sign change towards a grid neighbour is
    bisected along the first such axis.  Pairs within two grid cells of the
    diagonal are skipped when both ends lie on the same patch.
    """
    if lam in (0.0, 1.0):
        raise ValueError("lambda must differ from 0 and 1")
    if grid4 < 8:
        raise ValueError("grid resolution must be at least 8")
    same = patch_minus is None
    pm = patch if same else patch_minus
    n = grid4

    def axes(pt):
        x0, x1, y0, y1 = pt.domain
        return _axis(x0, x1, n, pt.periodic[0]), _axis(y0, y1, n, pt.periodic[1])

    up, vp = axes(patch)
    um, vm = axes(pm)
    Up, Vp = np.meshgrid(up, vp, indexing="ij")
    Um, Vm = np.meshgrid(um, vm, indexing="ij")
    _, a1, a2 = patch.derivatives((Up, Vp), order=1)
    _, b1, b2 = pm.derivatives((Um, Vm), order=1)
    Bp = bivector(a1, a2).reshape(-1, 6)
    Bm = bivector(b1, b2).reshape(-1, 6)
    W = np.zeros((6, 6))
    for i, j, sgn in ((0, 5, 1), (5, 0, 1), (2, 3, 1), (3, 2, 1), (1, 4, -1), (4, 1, -1)):
        W[i, j] = sgn
    J4 = (Bp @ W @ Bm.T).reshape(n, n, n, n)
    np_ = (np.linalg.norm(a1, axis=-1) * np.linalg.norm(a2, axis=-1)).reshape(n, n)
    nm = (np.linalg.norm(b1, axis=-1) * np.linalg.norm(b2, axis=-1)).reshape(n, n)
    scale4 = np_[:, :, None, None] * nm[None, None, :, :]
    zero = np.abs(J4) <= 1e-12 * scale4
    excluded = np.zeros(J4.shape, dtype=bool)
    if same:
        gi = _index_gap(n, patch.periodic[0])
        gj = _index_gap(n, patch.periodic[1])
        excluded = (gi[:, None, :, None] <= 2) & (gj[None, :, None, :] <= 2)
    periodic4 = (patch.periodic[0], patch.periodic[1], pm.periodic[0], pm.periodic[1])
    nodes, axis = kernels.sign_change_edges(J4, zero, excluded, periodic4)

    # refine sign changes by bisection along the chosen axis
    idx = np.array(np.unravel_index(nodes, J4.shape))  # (4, m)
    grids = (up, vp, um, vm)
    start = np.stack([grids[k][idx[k]] for k in range(4)])
    steps = np.array([g[1] - g[0] for g in grids])
    end = start.copy()
    cols = np.arange(len(nodes))
    end[axis, cols] += steps[axis]
    f_start = J4.ravel()[nodes]
    lo = np.zeros(len(nodes))
    hi = np.ones(len(nodes))
    iters = int(math.ceil(math.log2(float(steps.max()) / tol.bisect))) + 1
    neg_start = f_start < 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pt = start + mid * (end - start)
        fm, _ = _pair_values(patch, (pt[0], pt[1]), pm, (pt[2], pt[3]))
        same_side = (fm < 0) == neg_start
        lo = np.where(same_side, mid, lo)
        hi = np.where(same_side, hi, mid)
    roots = start + 0.5 * (lo + hi) * (end - start)

    zi = np.array(np.nonzero(zero & ~excluded))
    direct = np.stack([grids[k][zi[k]] for k in range(4)]) if zi.size else np.zeros((4, 0))
    allq = np.concatenate([direct, roots], axis=1)
    for k, pt in enumerate((patch, patch, pm, pm)):
        lo_k, hi_k = pt.domain[2 * (k % 2)], pt.domain[2 * (k % 2) + 1]
        if pt.periodic[k % 2]:
            allq[k] = lo_k + np.mod(allq[k] - lo_k, hi_k - lo_k)
    qp, qm = allq[:2], allq[2:]
    if allq.shape[1] == 0:
        return EquidistantCloud((), float(lam), n, 0)

    xp, t1p, t2p = patch.derivatives((qp[0], qp[1]), order=1)
    xm, t1m, t2m = pm.derivatives((qm[0], qm[1]), order=1)
    J, norm = _pair_values(patch, (qp[0], qp[1]), pm, (qm[0], qm[1]))
    deg = degree_from_tangents(t1p, t2p, t1m, t2m, tol)
    degree = deg.degree.astype(int)
    labels = np.empty(allq.shape[1], dtype=object)
    for d in (1, 2):
        sel = np.flatnonzero(degree == d)
        if len(sel) == 0:
            continue
        if classify:
            labels[sel] = _classify_batch(patch, qp[:, sel], pm, qm[:, sel], d, lam, tol, chunk)
        else:
            for k in sel:
                labels[k] = SingLabel(SingTag.DEGENERATE, 0.0, {"unclassified": True},
                                      DegenerateReason.LOW_MARGIN)
    x = lam * xp + (1.0 - lam) * xm
    records = []
    dropped = 0
    for k in range(allq.shape[1]):
        if degree[k] == 0:
            dropped += 1
            continue
        lab = labels[k]
        if deg.low_margin[k] and lab.tag is not SingTag.DEGENERATE:
            w = dict(lab.witness)
            w["label_before_margin_check"] = str(lab)
            w["singular_values"] = deg.singular_values[k].tolist()
            lab = SingLabel(SingTag.DEGENERATE, lab.margin, w, DegenerateReason.LOW_MARGIN)
        records.append(EquidistantRecord(x[k], (float(qp[0, k]), float(qp[1, k])),
                                         (float(qm[0, k]), float(qm[1, k])), int(degree[k]), lab,
                                         float(abs(J[k]) / norm[k])))
    records.sort(key=lambda r: r.q_plus + r.q_minus)
    return EquidistantCloud(tuple(records), float(lam), n, dropped)


@dataclass(frozen=True)
class SymmetryReport:
    matched: float  # fraction of records matched, both directions
    max_param_gap: float  # in grid cells, Chebyshev
    max_point_gap: float  # Euclidean distance between matched lambda-points


def equidistant_symmetry(a: EquidistantCloud, b: EquidistantCloud, patch: SurfacePatch,
                         patch_minus: SurfacePatch | None = None) -> SymmetryReport:
    """Match the records of ``a`` (lambda) with the swapped records of ``b`` (1 - lambda).

    Distances are measured on the 4-D parameter grid in units of one cell.
    """
    pm = patch if patch_minus is None else patch_minus
    n = a.grid
    cell = np.array([patch.periods[0], patch.periods[1], pm.periods[0], pm.periods[1]]) / np.array(
        [n if patch.periodic[0] else n - 1, n if patch.periodic[1] else n - 1,
         n if pm.periodic[0] else n - 1, n if pm.periodic[1] else n - 1])
    lows = np.array([patch.domain[0], patch.domain[2], pm.domain[0], pm.domain[2]])
    per = (patch.periodic[0], patch.periodic[1], pm.periodic[0], pm.periodic[1])
    if len(a) == 0 or len(b) == 0:
        return SymmetryReport(1.0 if len(a) == len(b) else 0.0, 0.0, 0.0)
    pa = (a.params() - lows) / cell
    pb = b.params()
    pb = (np.concatenate([pb[:, 2:], pb[:, :2]], axis=1) - lows) / cell  # (q-, q+) -> (q+, q-)
    box = np.array([n if per[k] else 0 for k in range(4)], dtype=float)
    if np.any(box > 0):
        pa = np.where(box > 0, np.mod(pa, np.where(box > 0, box, 1.0)), pa)
        pb = np.where(box > 0, np.mod(pb, np.where(box > 0, box, 1.0)), pb)
        big = np.where(box > 0, box, max(pa.max(), pb.max()) * 4 + 10)
        lo = min(pa.min(), pb.min())
        shift = np.where(box > 0, 0.0, -lo)
        ta, tb = cKDTree(pb + shift, boxsize=big), cKDTree(pa + shift, boxsize=big)
        da, ia = ta.query(pa + shift, p=np.inf)
        db, ib = tb.query(pb + shift, p=np.inf)
    else:
        da, ia = cKDTree(pb).query(pa, p=np.inf)
        db, ib = cKDTree(pa).query(pb, p=np.inf)
    ok = (np.sum(da <= 1.0 + 1e-9) + np.sum(db <= 1.0 + 1e-9)) / (len(da) + len(db))
    xa, xb = a.points(), b.points()
    gap = max(np.linalg.norm(xa - xb[ia], axis=1).max(), np.linalg.norm(xb - xa[ib], axis=1).max())
    return SymmetryReport(float(ok), float(max(da.max(), db.max())), float(gap))
