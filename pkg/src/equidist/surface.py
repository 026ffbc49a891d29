"""Parametrised surface patches in R^4 and their local frames."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import exprparse
from .config import DEFAULT, Tolerances
from .jets import Jet2

_TWO_PI = 2.0 * np.pi


class OutOfDomain(ValueError):
    pass


class NotImmersed(ArithmeticError):
    pass


@dataclass(frozen=True)
class SurfacePatch:
    name: str
    components: tuple
    domain: tuple  # (x_min, x_max, y_min, y_max)
    periodic: tuple = (False, False)
    s: float = 0.0
    source: tuple = field(default=(), compare=False)  # component texts, for reports

    def __post_init__(self):
        if len(self.components) != 4:
            raise ValueError("a patch needs exactly four components")
        x0, x1, y0, y1 = self.domain
        if not (x0 < x1 and y0 < y1):
            raise ValueError("domain box is empty")

    @classmethod
    def from_strings(cls, name, texts, domain, periodic=(False, False), s=0.0):
        comps = tuple(exprparse.parse(t) for t in texts)
        return cls(name, comps, tuple(float(d) for d in domain), tuple(periodic), float(s),
                   tuple(texts))

    @classmethod
    def from_spec(cls, spec: exprparse.SurfaceSpec, s=0.0):
        texts = tuple(exprparse.to_text(c) for c in spec.components)
        return cls(spec.name, spec.components, spec.domain, spec.periodic, float(s), texts)

    @classmethod
    def load(cls, path, s=0.0):
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_spec(exprparse.parse_surface_text(text), s)

    def with_s(self, s: float) -> "SurfacePatch":
        return replace(self, s=float(s))

    @property
    def periods(self) -> tuple:
        x0, x1, y0, y1 = self.domain
        return (x1 - x0, y1 - y0)

    def reduce(self, u, v):
        """Wrap periodic coordinates into the box and check the rest."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        out = []
        for k, w in enumerate((u, v)):
            lo, hi = self.domain[2 * k], self.domain[2 * k + 1]
            if self.periodic[k]:
                w = lo + np.mod(w - lo, hi - lo)
            else:
                slack = 1e-12 * (hi - lo)
                if np.any(w < lo - slack) or np.any(w > hi + slack) or np.any(~np.isfinite(w)):
                    raise OutOfDomain(f"parameter {'xy'[k]} outside [{lo:g}, {hi:g}]")
            out.append(w)
        return out[0], out[1]

    def _env(self, u, v):
        return {"x": u, "y": v, "s": self.s}

    def evaluate(self, u, v) -> np.ndarray:
        """Points f(u, v) with shape ``(*batch, 4)``."""
        u, v = self.reduce(u, v)
        shape = np.broadcast_shapes(u.shape, v.shape)
        env = self._env(u, v)
        vals = [np.broadcast_to(np.asarray(exprparse.evaluate(c, env), dtype=float), shape)
                for c in self.components]
        return np.stack(vals, axis=-1)

    def jet_at(self, q, order: int = 2) -> list:
        """Taylor jets of the four components about ``q``; ``q`` may be batched as (2, *batch)."""
        u, v = self.reduce(q[0], q[1])
        batch = np.broadcast_shapes(u.shape, v.shape)
        zero = np.zeros(batch)
        x = Jet2.variable(0, u + zero, order)
        y = Jet2.variable(1, v + zero, order)
        env = self._env(x, y)
        out = []
        for c in self.components:
            val = exprparse.evaluate(c, env)
            if not isinstance(val, Jet2):
                val = Jet2.constant(np.broadcast_to(np.asarray(val, dtype=float), batch), order)
            elif val.batch_shape != batch:
                val = val + zero
            out.append(val)
        return out

    def derivatives(self, q, order: int = 2):
        """Stacked partials: returns ``(point, t1, t2[, f_uu, f_uv, f_vv])`` each ``(*batch, 4)``."""
        js = self.jet_at(q, order)

        def stack(i, j):
            return np.stack([jt.partial(i, j) for jt in js], axis=-1)

        out = [stack(0, 0), stack(1, 0), stack(0, 1)]
        if order >= 2:
            out += [stack(2, 0), stack(1, 1), stack(0, 2)]
        return tuple(out)


@dataclass(frozen=True)
class PointFrame:
    q: tuple
    point: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    basis: np.ndarray  # columns e1..e4

    @property
    def e1(self):
        return self.basis[:, 0]

    @property
    def e2(self):
        return self.basis[:, 1]

    @property
    def e3(self):
        return self.basis[:, 2]

    @property
    def e4(self):
        return self.basis[:, 3]

    @property
    def tangent(self) -> np.ndarray:
        return self.basis[:, :2]

    @property
    def normal(self) -> np.ndarray:
        return self.basis[:, 2:]


def immersion_ok(t1, t2, tol: Tolerances = DEFAULT):
    """Boolean mask: the 4x2 derivative matrix has numerical rank 2."""
    m = np.stack([t1, t2], axis=-1)
    s = np.linalg.svd(m, compute_uv=False)
    return s[..., 1] >= tol.immersion * s[..., 0]


def orthonormal_frames(t1, t2, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Positively oriented orthonormal frames adapted to span{t1, t2}.

    Inputs have shape ``(*batch, 4)``; the result has shape ``(*batch, 4, 4)``
    with e1..e4 as columns.  Normal vectors come from a fixed sweep over the
    standard basis so the output is reproducible.
    """
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if not np.all(immersion_ok(t1, t2, tol)):
        raise NotImmersed("tangent vectors are numerically dependent")
    e1 = t1 / np.linalg.norm(t1, axis=-1, keepdims=True)
    w = t2 - np.sum(t2 * e1, axis=-1, keepdims=True) * e1
    e2 = w / np.linalg.norm(w, axis=-1, keepdims=True)
    found = [e1, e2]
    eye = np.eye(4)
    for threshold in (0.5, 0.4):
        # residual of each standard basis vector after projecting out the frame so far
        r = np.broadcast_to(eye, t1.shape[:-1] + (4, 4)).copy()  # rows are candidates
        for e in found:
            r -= np.einsum("...k,...j->...kj", e, e)  # eye_k - <eye_k, e> e = eye_k - e_k e
        norms = np.linalg.norm(r, axis=-1)
        pick = np.argmax(norms > threshold, axis=-1)
        cand = np.take_along_axis(r, pick[..., None, None], axis=-2)[..., 0, :]
        for e in found:  # second pass for numerical orthogonality
            cand = cand - np.sum(cand * e, axis=-1, keepdims=True) * e
        found.append(cand / np.linalg.norm(cand, axis=-1, keepdims=True))
    basis = np.stack(found, axis=-1)
    flip = np.linalg.det(basis) < 0
    basis[..., :, 3] = np.where(flip[..., None], -basis[..., :, 3], basis[..., :, 3])
    return basis


def frame_at(patch: SurfacePatch, q, tol: Tolerances = DEFAULT) -> PointFrame:
    u, v = patch.reduce(q[0], q[1])
    point, t1, t2 = patch.derivatives((float(u), float(v)), order=1)
    basis = orthonormal_frames(t1, t2, tol)
    return PointFrame((float(u), float(v)), point, t1, t2, basis)
