"""Chords between surface points: lambda-points, parallelism degree and adapted coordinates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .jets import Jet2, invert_pair
from .surface import NotImmersed, SurfacePatch, immersion_ok


class DegenerateFrame(ValueError):
    pass


class DivisionByZero(ZeroDivisionError):
    pass


def lambda_point(a_plus, a_minus, lam: float) -> np.ndarray:
    return lam * np.asarray(a_plus, dtype=float) + (1.0 - lam) * np.asarray(a_minus, dtype=float)


def chord_transform(x_plus, x_minus, lam: float):
    """``(x, xdot)`` with x the lambda-point and xdot the chord vector."""
    xp = np.asarray(x_plus, dtype=float)
    xm = np.asarray(x_minus, dtype=float)
    return lam * xp + (1.0 - lam) * xm, xp - xm


def chord_inverse(x, xdot, lam: float):
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    return x + (1.0 - lam) * xdot, x - lam * xdot


def lambda_reflect(a, x, lam: float) -> np.ndarray:
    """Reflection through ``a`` sending a chord end to the other end when ``a`` is its lambda-point."""
    if lam == 0:
        raise DivisionByZero("lambda-reflection needs lambda != 0")
    return np.asarray(a, dtype=float) / lam - (1.0 - lam) / lam * np.asarray(x, dtype=float)


def _orthonormal_plane(t1, t2) -> np.ndarray:
    q, _ = np.linalg.qr(np.stack([t1, t2], axis=-1))
    return q


@dataclass(frozen=True)
class DegreeBatch:
    degree: np.ndarray  # int8
    singular_values: np.ndarray  # (..., 4), descending
    low_margin: np.ndarray  # bool
    witness: np.ndarray  # (..., 4) unit vector of the intersection (meaningful for degree >= 1)


def degree_from_tangents(tp1, tp2, tm1, tm2, tol: Tolerances = DEFAULT) -> DegreeBatch:
    """Parallelism degree of batched tangent-plane pairs.

    Singular values of [E+ E-] for orthonormal plane bases count the
    dimensions shared by the two planes: each common direction gives a zero.
    """
    Ep = _orthonormal_plane(tp1, tp2)
    Em = _orthonormal_plane(tm1, tm2)
    M = np.concatenate([Ep, Em], axis=-1)
    _, s, vt = np.linalg.svd(M)
    smax = s[..., :1]
    thr = tol.parallel_rank * smax
    small = s < thr
    degree = np.minimum(small.sum(axis=-1), 2).astype(np.int8)
    low = np.any((s >= thr) & (s <= tol.low_margin_factor * thr), axis=-1)
    c_plus = vt[..., 3, :2]  # right singular vector of the smallest singular value
    w = np.einsum("...ij,...j->...i", Ep, c_plus)
    w = w / np.linalg.norm(w, axis=-1, keepdims=True)
    return DegreeBatch(degree, s, low, w)


@dataclass(frozen=True)
class ParallelInfo:
    degree: int
    singular_values: tuple
    low_margin: bool
    witness: np.ndarray  # (k, 4) basis of the tangent-plane intersection
    margin: float


def _same_point(patch_p: SurfacePatch, qp, patch_m: SurfacePatch, qm) -> bool:
    if patch_p is not patch_m and patch_p != patch_m:
        return False
    a = np.array(patch_p.reduce(*qp))
    b = np.array(patch_m.reduce(*qm))
    d = np.abs(a - b)
    for k in range(2):
        if patch_p.periodic[k]:
            d[k] = min(d[k], patch_p.periods[k] - d[k])
    return bool(np.all(d < 1e-12))


def parallel_degree(patch_p: SurfacePatch, qp, patch_m: SurfacePatch, qm,
                    tol: Tolerances = DEFAULT) -> ParallelInfo:
    if _same_point(patch_p, qp, patch_m, qm):
        raise ValueError("chord endpoints coincide (diagonal pair)")
    _, tp1, tp2 = patch_p.derivatives(qp, order=1)
    _, tm1, tm2 = patch_m.derivatives(qm, order=1)
    for t1, t2 in ((tp1, tp2), (tm1, tm2)):
        if not immersion_ok(t1, t2, tol):
            raise NotImmersed("tangent vectors are numerically dependent")
    res = degree_from_tangents(tp1, tp2, tm1, tm2, tol)
    k = int(res.degree)
    s = res.singular_values
    if k == 2:
        witness = _orthonormal_plane(tp1, tp2).T
    elif k == 1:
        witness = res.witness[None, :]
    else:
        witness = np.zeros((0, 4))
    # distance (in decades) of the singular value closest to the rank threshold
    thr = tol.parallel_rank * s[0]
    margin = float(np.min(np.abs(np.log10(np.maximum(s, 1e-300) / thr))))
    return ParallelInfo(k, tuple(float(x) for x in s), bool(res.low_margin), witness, margin)


@dataclass(frozen=True)
class ChordPair:
    patch_plus: SurfacePatch
    q_plus: tuple
    patch_minus: SurfacePatch
    q_minus: tuple
    lam: float
    a_plus: np.ndarray = field(compare=False)
    a_minus: np.ndarray = field(compare=False)
    info: ParallelInfo = field(compare=False)

    @property
    def degree(self) -> int:
        return self.info.degree

    @property
    def x(self) -> np.ndarray:
        return lambda_point(self.a_plus, self.a_minus, self.lam)


def make_chord(patch_p: SurfacePatch, qp, patch_m: SurfacePatch, qm, lam: float,
               tol: Tolerances = DEFAULT) -> ChordPair:
    if lam in (0.0, 1.0):
        raise ValueError("lambda must differ from 0 and 1")
    qp = tuple(float(w) for w in patch_p.reduce(*qp))
    qm = tuple(float(w) for w in patch_m.reduce(*qm))
    info = parallel_degree(patch_p, qp, patch_m, qm, tol)
    a_p = patch_p.evaluate(*qp)
    a_m = patch_m.evaluate(*qm)
    return ChordPair(patch_p, qp, patch_m, qm, float(lam), a_p, a_m, info)


@dataclass(frozen=True)
class AdaptedFrames:
    degree: int
    basis: np.ndarray  # columns e1..e4
    a_plus: np.ndarray
    a_minus: np.ndarray
    phi: Jet2
    psi: Jet2
    xi: Jet2
    zeta: Jet2
    u_dir: np.ndarray  # common tangent direction (degree 1) or e1
    v_dir: np.ndarray  # common normal direction (degree 1) or e3

    def graph_plus(self):
        return self.phi, self.psi

    def graph_minus(self):
        return self.xi, self.zeta


def cross4(a, b, c) -> np.ndarray:
    """Vector orthogonal to a, b, c with length equal to their 3-volume; batched."""
    m = np.stack([a, b, c], axis=-2)
    return np.stack([(-1) ** i * np.linalg.det(np.delete(m, i, axis=-1)) for i in range(4)],
                    axis=-1)


def _local_coords(jets, Binv):
    shifted = [jt - jt.value for jt in jets]  # centre on the base point exactly
    return [sum(shifted[j] * Binv[..., i, j] for j in range(4)) for i in range(4)]


def _graph(w, over: tuple, values: tuple):
    """Graph jets of ``values`` over the coordinates ``over`` (both index tuples into w)."""
    g1, g2 = invert_pair(w[over[0]], w[over[1]])
    return tuple(w[k].substitute(g1, g2) for k in values)


def adapted_bases(Ep, Em, witness, degree: int, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Adapted bases ``(..., 4, 4)`` for chords of one common degree.

    ``Ep`` and ``Em`` are orthonormal tangent-plane bases ``(..., 4, 2)``.
    Degree 1: e1 spans the common direction, e2 completes T+, e4 completes
    T-, e3 is orthogonal to all three.  Degree 2: e1, e2 span the common
    plane and e3, e4 its orthogonal complement.  Orientation is positive.
    """
    if degree == 1:
        e1 = witness
        cp = np.einsum("...ji,...j->...i", Ep, e1)
        cm = np.einsum("...ji,...j->...i", Em, e1)
        rot = lambda c: np.stack([-c[..., 1], c[..., 0]], axis=-1) / np.linalg.norm(
            c, axis=-1, keepdims=True)
        e2 = np.einsum("...ij,...j->...i", Ep, rot(cp))
        e4 = np.einsum("...ij,...j->...i", Em, rot(cm))
        first = np.argmax(np.abs(e4) > 1e-12, axis=-1)
        lead = np.take_along_axis(e4, first[..., None], axis=-1)
        e4 = np.where(lead < 0, -e4, e4)
        e3 = cross4(e1, e2, e4)
        n3 = np.linalg.norm(e3, axis=-1, keepdims=True)
        if np.any(n3 < tol.parallel_rank):
            raise DegenerateFrame("tangent planes span less than a 3-space")
        B = np.stack([e1, e2, e3 / n3, e4], axis=-1)
        col = 2
    elif degree == 2:
        proj = np.eye(4) - Ep @ np.swapaxes(Ep, -1, -2)
        comp = np.linalg.svd(proj)[0][..., :, :2]
        B = np.concatenate([Ep, comp], axis=-1)
        col = 3
    else:
        raise DegenerateFrame(f"adapted coordinates need a 1- or 2-parallel pair, got degree {degree}")
    det = np.linalg.det(B)
    B[..., :, col] = np.where((det < 0)[..., None], -B[..., :, col], B[..., :, col])
    if np.any(np.abs(det) < tol.parallel_rank):
        raise DegenerateFrame("adapted basis is singular")
    return B


def _frames_from_jets(k, B, a_plus, a_minus, jets_p, jets_m) -> AdaptedFrames:
    Binv = np.linalg.inv(B)
    wp = _local_coords(jets_p, Binv)
    wm = _local_coords(jets_m, Binv)
    phi, psi = _graph(wp, (0, 1), (2, 3))
    if k == 1:
        xi, zeta = _graph(wm, (0, 3), (1, 2))
    else:
        xi, zeta = _graph(wm, (0, 1), (2, 3))
    return AdaptedFrames(k, B, a_plus, a_minus, phi, psi, xi, zeta,
                         B[..., :, 0].copy(), B[..., :, 2].copy())


def adapt_frames(pair: ChordPair, order: int = 6, tol: Tolerances = DEFAULT) -> AdaptedFrames:
    k = pair.degree
    if k not in (1, 2):
        raise DegenerateFrame(f"adapted coordinates need a 1- or 2-parallel pair, got degree {k}")
    _, tp1, tp2 = pair.patch_plus.derivatives(pair.q_plus, order=1)
    _, tm1, tm2 = pair.patch_minus.derivatives(pair.q_minus, order=1)
    Ep = _orthonormal_plane(tp1, tp2)
    Em = _orthonormal_plane(tm1, tm2)
    B = adapted_bases(Ep, Em, pair.info.witness[0], k, tol)
    return _frames_from_jets(k, B, pair.a_plus, pair.a_minus,
                             pair.patch_plus.jet_at(pair.q_plus, order),
                             pair.patch_minus.jet_at(pair.q_minus, order))


def adapt_frames_batch(patch_p: SurfacePatch, qp, patch_m: SurfacePatch, qm, degree: int,
                       order: int = 6, tol: Tolerances = DEFAULT) -> AdaptedFrames:
    """Adapted frames for many chords of the same degree; ``qp, qm`` have shape (2, n).

    The returned jets and arrays carry a trailing batch axis of length n.
    """
    qp = np.asarray(qp, dtype=float)
    qm = np.asarray(qm, dtype=float)
    ap, tp1, tp2 = patch_p.derivatives(qp, order=1)
    am, tm1, tm2 = patch_m.derivatives(qm, order=1)
    res = degree_from_tangents(tp1, tp2, tm1, tm2, tol)
    Ep = _orthonormal_plane(tp1, tp2)
    Em = _orthonormal_plane(tm1, tm2)
    B = adapted_bases(Ep, Em, res.witness, degree, tol)
    return _frames_from_jets(degree, B, ap, am, patch_p.jet_at(qp, order), patch_m.jet_at(qm, order))
