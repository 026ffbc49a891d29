"""Second fundamental form and the pointwise extrinsic invariants of a surface in R^4.

A form is stored as ``alpha = (a b c; e f g)``: the first row holds the e3
components of the second derivatives ``f_uu, f_uv, f_vv`` and the second row
the e4 components.  Unless converted with ``in_frame_coords`` the tangent
variables are the patch parameters, so asymptotic directions come out as
directions in the parameter plane.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import DEFAULT, Tolerances
from .surface import PointFrame, SurfacePatch, frame_at, orthonormal_frames


class PointTag(str, Enum):
    ELLIPTIC = "Elliptic"
    HYPERBOLIC = "Hyperbolic"
    PARABOLIC = "Parabolic"


class ParabolicSubtype(str, Enum):
    NONDEGENERATE_ELLIPSE = "NondegenerateEllipse"
    INFLECTION_REAL = "InflectionReal"
    INFLECTION_FLAT = "InflectionFlat"
    INFLECTION_IMAGINARY = "InflectionImaginary"


@dataclass(frozen=True)
class FundamentalForm:
    a: float
    b: float
    c: float
    e: float
    f: float
    g: float
    frame: PointFrame | None = None

    @classmethod
    def of(cls, alpha, frame=None) -> "FundamentalForm":
        if isinstance(alpha, FundamentalForm):
            return alpha
        vals = np.asarray(alpha, dtype=float).reshape(6)
        return cls(*(float(v) for v in vals), frame=frame)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.e, self.f, self.g])

    @property
    def matrix(self) -> np.ndarray:
        return self.coeffs.reshape(2, 3)

    def quadratic_forms(self):
        """The symmetric 2x2 matrices of II^{e3} and II^{e4}."""
        return (np.array([[self.a, self.b], [self.b, self.c]]),
                np.array([[self.e, self.f], [self.f, self.g]]))

    def in_frame_coords(self) -> "FundamentalForm":
        """Re-express the tangent variables in the orthonormal frame (e1, e2)."""
        if self.frame is None:
            raise ValueError("no frame attached to this form")
        tang = np.stack([self.frame.t1, self.frame.t2], axis=1)
        A = self.frame.tangent.T @ tang  # t = E A
        Ainv = np.linalg.inv(A)
        q3, q4 = self.quadratic_forms()
        r3 = Ainv.T @ q3 @ Ainv
        r4 = Ainv.T @ q4 @ Ainv
        return FundamentalForm(r3[0, 0], r3[0, 1], r3[1, 1], r4[0, 0], r4[0, 1], r4[1, 1],
                               frame=self.frame)


def _as_array(alpha) -> np.ndarray:
    if isinstance(alpha, FundamentalForm):
        return alpha.coeffs
    return np.asarray(alpha, dtype=float)


def alpha_from_derivatives(t1, t2, fuu, fuv, fvv, tol: Tolerances = DEFAULT):
    """Batched forms ``(*batch, 6)`` and frames ``(*batch, 4, 4)`` from raw derivatives."""
    basis = orthonormal_frames(t1, t2, tol)
    e3 = basis[..., :, 2]
    e4 = basis[..., :, 3]
    dot = lambda x, y: np.sum(x * y, axis=-1)
    alpha = np.stack([dot(e3, fuu), dot(e3, fuv), dot(e3, fvv),
                      dot(e4, fuu), dot(e4, fuv), dot(e4, fvv)], axis=-1)
    return alpha, basis


def second_form(patch: SurfacePatch, q, tol: Tolerances = DEFAULT) -> FundamentalForm:
    frame = frame_at(patch, q, tol)
    _, _, _, fuu, fuv, fvv = patch.derivatives(frame.q, order=2)
    e3, e4 = frame.e3, frame.e4
    return FundamentalForm(float(e3 @ fuu), float(e3 @ fuv), float(e3 @ fvv),
                           float(e4 @ fuu), float(e4 @ fuv), float(e4 @ fvv), frame=frame)


def second_form_grid(patch: SurfacePatch, u, v, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Forms at every point of broadcast arrays ``u, v``; shape ``(*batch, 6)``."""
    _, t1, t2, fuu, fuv, fvv = patch.derivatives((u, v), order=2)
    return alpha_from_derivatives(t1, t2, fuu, fuv, fvv, tol)[0]


def delta(alpha):
    """Quarter determinant of the 4x4 resultant matrix; works on ``(..., 6)`` arrays."""
    al = _as_array(alpha)
    a, b, c, e, f, g = np.moveaxis(al, -1, 0)
    out = (a * f - b * e) * (b * g - c * f) - 0.25 * (a * g - c * e) ** 2
    return float(out) if np.ndim(out) == 0 else out


def delta_matrix(alpha) -> np.ndarray:
    a, b, c, e, f, g = _as_array(alpha)
    return np.array([[a, 2 * b, c, 0.0],
                     [e, 2 * f, g, 0.0],
                     [0.0, a, 2 * b, c],
                     [0.0, e, 2 * f, g]])


def gauss_curv(alpha):
    al = _as_array(alpha)
    a, b, c, e, f, g = np.moveaxis(al, -1, 0)
    out = a * c - b * b + e * g - f * f
    return float(out) if np.ndim(out) == 0 else out


def form_rank(alpha, tol: Tolerances = DEFAULT) -> int:
    s = np.linalg.svd(_as_array(alpha).reshape(2, 3), compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_rel * s[0]))


@dataclass(frozen=True)
class PointClass:
    tag: PointTag
    subtype: ParabolicSubtype | None
    delta: float
    gauss: float
    rank: int
    margin: float

    def __str__(self):
        return self.tag.value if self.subtype is None else f"{self.tag.value}/{self.subtype.value}"


def _scale(al):
    return np.abs(al).max(axis=-1)


def classify_point(alpha, tol: Tolerances = DEFAULT) -> PointClass:
    al = _as_array(alpha)
    d = delta(al)
    gc = gauss_curv(al)
    scale = float(_scale(al))
    rank = form_rank(al, tol)
    margin = abs(d) / scale ** 4 if scale > 0 else 0.0
    if scale > 0 and d > tol.delta_rel * scale ** 4:
        return PointClass(PointTag.ELLIPTIC, None, d, gc, rank, margin)
    if scale > 0 and d < -tol.delta_rel * scale ** 4:
        return PointClass(PointTag.HYPERBOLIC, None, d, gc, rank, margin)
    if rank == 2:
        sub = ParabolicSubtype.NONDEGENERATE_ELLIPSE
    elif scale == 0 or abs(gc) <= tol.delta_rel * scale ** 2:
        sub = ParabolicSubtype.INFLECTION_FLAT
    elif gc < 0:
        sub = ParabolicSubtype.INFLECTION_REAL
    else:
        sub = ParabolicSubtype.INFLECTION_IMAGINARY
    return PointClass(PointTag.PARABOLIC, sub, d, gc, rank, margin)


def classify_tags(alpha, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Vectorised sign test: +1 elliptic, -1 hyperbolic, 0 parabolic band."""
    al = _as_array(alpha)
    d = np.asarray(delta(al))
    thr = tol.delta_rel * _scale(al) ** 4
    return np.where(d > thr, 1, np.where(d < -thr, -1, 0)).astype(np.int8)


def curvature_ellipse(alpha, theta):
    """Normal curvature vector ``eta(theta)`` in (e3, e4) coordinates."""
    a, b, c, e, f, g = _as_array(alpha)
    ct, st = np.cos(theta), np.sin(theta)
    return np.stack([a * ct ** 2 + 2 * b * ct * st + c * st ** 2,
                     e * ct ** 2 + 2 * f * ct * st + g * st ** 2], axis=-1)


@dataclass(frozen=True)
class ContactPair:
    u: np.ndarray  # asymptotic direction (tangent variables of alpha)
    v: np.ndarray  # binormal direction in (e3, e4) coordinates


@dataclass(frozen=True)
class ContactPairSet:
    pairs: tuple
    all_tangent_directions: bool = False
    inflection_binormal: np.ndarray | None = None

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]


def canonical_direction(w) -> np.ndarray:
    """Unit vector with its first non-negligible component positive."""
    w = np.asarray(w, dtype=float)
    w = w / np.linalg.norm(w)
    for x in w:
        if abs(x) > 1e-12:
            return (w if x > 0 else -w) + 0.0
    return w + 0.0


def pencil_coefficients(alpha):
    """``(A, B, C)`` with det(v1 Q3 + v2 Q4) = A v1^2 + B v1 v2 + C v2^2."""
    a, b, c, e, f, g = _as_array(alpha)
    return a * c - b * b, a * g + c * e - 2 * b * f, e * g - f * f


def kernel_direction(m: np.ndarray) -> np.ndarray:
    w, vecs = np.linalg.eigh(m)
    return canonical_direction(vecs[:, np.argmin(np.abs(w))])


def contact_pairs(alpha, tol: Tolerances = DEFAULT) -> ContactPairSet:
    al = _as_array(alpha)
    pc = classify_point(al, tol)
    q3 = np.array([[al[0], al[1]], [al[1], al[2]]])
    q4 = np.array([[al[3], al[4]], [al[4], al[5]]])

    def pair(v):
        v = canonical_direction(v)
        return ContactPair(kernel_direction(v[0] * q3 + v[1] * q4), v)

    if pc.tag is PointTag.ELLIPTIC:
        return ContactPairSet(())
    if pc.rank <= 1:
        if pc.rank == 0:
            v = np.array([1.0, 0.0])
        else:
            # left null vector of alpha: II^v vanishes identically
            vecs = np.linalg.svd(al.reshape(2, 3))[0]
            v = vecs[:, 1]
        return ContactPairSet((), True, canonical_direction(v))
    A, B, C = pencil_coefficients(al)
    S = np.array([[A, B / 2], [B / 2, C]])
    w, vecs = np.linalg.eigh(S)
    if pc.tag is PointTag.HYPERBOLIC:
        lo, hi = w  # lo < 0 < hi since det S = Delta < 0
        r_lo, r_hi = np.sqrt(max(hi, 0.0)), np.sqrt(max(-lo, 0.0))
        pairs = [pair(r_lo * vecs[:, 0] + s * r_hi * vecs[:, 1]) for s in (1.0, -1.0)]
        pairs.sort(key=lambda p: tuple(-p.v))
        return ContactPairSet(tuple(pairs))
    return ContactPairSet((pair(vecs[:, np.argmin(np.abs(w))]),))


def asymptotic_directions(alpha, tol: Tolerances = DEFAULT) -> list:
    return [p.u for p in contact_pairs(alpha, tol)]
