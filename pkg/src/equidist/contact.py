"""Contact maps of chords and the A_k / C+- classifiers.

For a 1-parallel chord the contact map is reduced to a single function
``theta(y)`` whose first non-vanishing derivative fixes the A_k type.  For a
2-parallel chord the quadratic part of the contact map is a pencil of two
binary quadratic forms and the sign of its Delta invariant separates C+
from C-.

All jet code here works on batched jets, so a whole cloud of chords can be
pushed through in one pass.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import factorial

import numpy as np

from . import extgeom
from .config import DEFAULT, Tolerances
from .jets import Jet1, Jet2, implicit_solve
from .parallel import AdaptedFrames, ChordPair, adapt_frames, make_chord


class SingTag(str, Enum):
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    A4 = "A4"
    CPLUS22 = "CPlus22"
    CMINUS22 = "CMinus22"
    DEGENERATE = "Degenerate"


class DegenerateReason(str, Enum):
    ORDER_EXCEEDED = "OrderExceeded"
    DELTA_ZERO = "DeltaZero"
    LOW_MARGIN = "LowMargin"


_A_TAGS = {2: SingTag.A1, 3: SingTag.A2, 4: SingTag.A3, 5: SingTag.A4}


class NotCritical(ValueError):
    """The chord is not weakly parallel, so its lambda-point is a regular value."""


@dataclass(frozen=True)
class SingLabel:
    tag: SingTag
    margin: float
    witness: dict = field(default_factory=dict, compare=False)
    reason: DegenerateReason | None = None

    def __str__(self):
        if self.tag is SingTag.DEGENERATE:
            return f"Degenerate({self.reason.value})"
        return self.tag.value

    def to_dict(self) -> dict:
        out = {"label": str(self), "tag": self.tag.value, "margin": self.margin}
        if self.reason is not None:
            out["reason"] = self.reason.value
        out["witness"] = _jsonable(self.witness)
        return out


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, Enum):
        return x.value
    return x


@dataclass(frozen=True)
class ContactMapJet:
    k1: Jet2
    k2: Jet2
    lam: float
    degree: int
    frames: AdaptedFrames | None = field(default=None, compare=False)

    def scale(self):
        return np.maximum(self.k1.max_abs(), self.k2.max_abs())


def lambda_ratios(lam: float):
    """``r = (1 - lam)/lam`` (reflection scale) and ``m = -lam/(1 - lam)`` (argument scale)."""
    if lam in (0.0, 1.0):
        raise ValueError("lambda must differ from 0 and 1")
    return (1.0 - lam) / lam, -lam / (1.0 - lam)


def _variables(like: Jet2):
    zero = np.zeros(like.batch_shape)
    return (Jet2.variable(0, 0.0, like.order) + zero,
            Jet2.variable(1, 0.0, like.order) + zero)


def contact_map_1par_from_graphs(phi, psi, xi, zeta, lam: float, frames=None) -> ContactMapJet:
    r, m = lambda_ratios(lam)
    y, z = _variables(phi)
    a1, a2 = y * m, psi * m
    k1 = z + xi.substitute(a1, a2) * r
    k2 = phi + zeta.substitute(a1, a2) * r
    return ContactMapJet(k1, k2, float(lam), 1, frames)


def contact_map_1par(frames: AdaptedFrames, lam: float) -> ContactMapJet:
    if frames.degree != 1:
        raise ValueError("contact_map_1par needs 1-parallel adapted frames")
    return contact_map_1par_from_graphs(frames.phi, frames.psi, frames.xi, frames.zeta, lam, frames)


def contact_map_2par_from_graphs(phi, psi, xi, zeta, lam: float, frames=None,
                                 tol: Tolerances = DEFAULT) -> ContactMapJet:
    r, m = lambda_ratios(lam)
    y, z = _variables(phi)
    a1, a2 = y * m, z * m
    k1 = phi + xi.substitute(a1, a2) * r
    k2 = psi + zeta.substitute(a1, a2) * r
    scale = np.maximum(1.0, np.maximum(k1.max_abs(), k2.max_abs()))
    low = np.stack([k1[0, 0], k1[1, 0], k1[0, 1], k2[0, 0], k2[1, 0], k2[0, 1]])
    if np.any(np.abs(low) > 1e3 * tol.zero * scale):
        raise ValueError("contact map of a 2-parallel chord must have zero 1-jet")
    return ContactMapJet(k1, k2, float(lam), 2, frames)


def contact_map_2par(frames: AdaptedFrames, lam: float, tol: Tolerances = DEFAULT) -> ContactMapJet:
    if frames.degree != 2:
        raise ValueError("contact_map_2par needs 2-parallel adapted frames")
    return contact_map_2par_from_graphs(frames.phi, frames.psi, frames.xi, frames.zeta, lam,
                                        frames, tol)


def reduce_theta(K: ContactMapJet, tol: Tolerances = DEFAULT) -> Jet1:
    """Eliminate z from K1 = 0 and restrict K2: theta(y) = K2(y, z(y))."""
    z = implicit_solve(K.k1, tol)
    y = Jet1.variable(0.0, z.order) + np.zeros(K.k1.batch_shape)
    return K.k2.substitute(y, z)


def eta_residuals(phi, psi, zeta, lam: float, z_of_y: Jet1) -> dict:
    """Curvature-derivative tables along the common tangent direction.

    ``eta_plus[j]`` is the j-th derivative of the normal curvature of M+ and
    ``eta_minus[j]`` that of M- (in its own parameter), both along the curve
    cut out by K1 = 0.  ``residual[j]`` measures the failure of the
    proportionality at order j and equals theta^{(j+2)}(0).
    """
    _, m = lambda_ratios(lam)
    n = z_of_y.order
    y = Jet1.variable(0.0, n) + np.zeros(z_of_y.batch_shape)
    big_phi = phi.substitute(y, z_of_y)
    psi_t = psi.substitute(y, z_of_y)
    big_z = zeta.substitute(y, psi_t.scale_argument(1.0 / m) * m)
    rho = lam / (1.0 - lam)
    plus, minus, resid = [], [], []
    for j in range(n - 1):
        ep = factorial(j + 2) * big_phi[j + 2]
        em = factorial(j + 2) * big_z[j + 2]
        plus.append(ep)
        minus.append(em)
        resid.append(ep - (-1) ** (j + 1) * rho ** (j + 1) * em)
    return {"eta_plus": np.array(plus), "eta_minus": np.array(minus), "residual": np.array(resid)}


def theta_orders(theta: Jet1, scale, tol: Tolerances = DEFAULT):
    """First order m >= 2 with a decisive coefficient (0 if none) and its margin, batched."""
    c = np.abs(theta.coeffs[2:])  # orders 2..n
    scale = np.asarray(scale, dtype=float)
    ok = c > tol.theta_rel * scale
    has = ok.any(axis=0)
    first = np.argmax(ok, axis=0)
    orders = np.where(has, first + 2, 0)
    picked = np.take_along_axis(c, first[None, ...], axis=0)[0]
    safe = np.where(scale > 0, scale, 1.0)
    margin = np.where(has, picked / safe, c.max(axis=0) / safe)
    return orders, margin


def label_from_order(order: int, margin: float, witness: dict) -> SingLabel:
    if order in _A_TAGS:
        return SingLabel(_A_TAGS[order], float(margin), witness)
    return SingLabel(SingTag.DEGENERATE, float(margin), witness, DegenerateReason.ORDER_EXCEEDED)


def classify_Ak(theta: Jet1, scale: float | None = None, eta: dict | None = None,
                tol: Tolerances = DEFAULT) -> SingLabel:
    """A_{m-1} where m is the first order of theta above tau * scale.

    ``scale`` defaults to the largest coefficient of theta itself.  Orders
    beyond A4 (including a first non-zero term at order 6) are reported as
    Degenerate(OrderExceeded).
    """
    if theta.batch_shape != ():
        raise ValueError("classify_Ak takes a single theta; use theta_orders for batches")
    if scale is None:
        scale = float(theta.max_abs())
    order, margin = theta_orders(theta, scale, tol)
    order = int(order)
    witness = {
        "theta_derivatives": [float(theta.derivative(j)) for j in range(theta.order + 1)],
        "first_nonzero_order": order if order else None,
        "scale": float(scale),
    }
    if eta is not None:
        resid = np.asarray(eta["residual"], dtype=float)
        witness["eta_plus"] = [float(x) for x in eta["eta_plus"]]
        witness["eta_minus"] = [float(x) for x in eta["eta_minus"]]
        witness["eta_residual"] = [float(x) for x in resid]
        if order:
            k = order - 1
            # proof convention: equalities for eta orders 0..k-2, failure at k-1;
            # the stated theorem indexes the same table as 0..k-1 / k
            witness["eta_convention_proof"] = {"equal_through": k - 2, "differs_at": k - 1}
            witness["eta_convention_statement"] = {"equal_through": k - 1, "differs_at": k}
    return label_from_order(order, float(margin), witness)


def quadratic_form_of(K: ContactMapJet) -> np.ndarray:
    """Second fundamental form ``(a, b, c, e, f, g)`` of the contact surface (y, z, K1, K2) at 0."""
    k1, k2 = K.k1, K.k2
    return np.stack([2 * k1[2, 0], k1[1, 1], 2 * k1[0, 2],
                     2 * k2[2, 0], k2[1, 1], 2 * k2[0, 2]], axis=-1)


def classify_C(K: ContactMapJet, tol: Tolerances = DEFAULT) -> SingLabel:
    if K.degree != 2:
        raise ValueError("classify_C needs the contact map of a 2-parallel chord")
    alpha = quadratic_form_of(K)
    if alpha.ndim != 1:
        raise ValueError("classify_C takes a single contact map")
    d = extgeom.delta(alpha)
    scale = float(np.abs(alpha).max())
    margin = abs(d) / scale ** 4 if scale > 0 else 0.0
    pairs = extgeom.contact_pairs(alpha, tol)
    witness = {
        "alpha": alpha,
        "delta": d,
        "contact_pairs": [{"u": p.u, "v": p.v} for p in pairs],
        "all_tangent_directions": pairs.all_tangent_directions,
    }
    thr = tol.delta_rel * scale ** 4
    if scale > 0 and d < -thr:
        return SingLabel(SingTag.CPLUS22, margin, witness)
    if scale > 0 and d > thr:
        return SingLabel(SingTag.CMINUS22, margin, witness)
    return SingLabel(SingTag.DEGENERATE, margin, witness, DegenerateReason.DELTA_ZERO)


@dataclass(frozen=True)
class ProportionReport:
    kappa_plus: float
    kappa_minus: float
    kappa_minus_reflected: float
    residual: float
    contact_pair_plus: bool
    contact_pair_reflected: bool


def _is_contact_pair(m: np.ndarray, u: np.ndarray, scale: float, tol: Tolerances) -> bool:
    return bool(abs(np.linalg.det(m)) <= tol.derivative_match * scale ** 2
                and np.linalg.norm(m @ u) <= tol.derivative_match * scale)


def proportion_witness(frames: AdaptedFrames, lam: float, u, v,
                       tol: Tolerances = DEFAULT) -> ProportionReport:
    """Normal curvatures of M+ and of the reflected M- along ``u`` in the normal direction ``v``.

    ``u`` is a direction in the common tangent coordinates and ``v`` in the
    (e3, e4) coordinates of a 2-parallel frame.  The residual
    ``kappa_plus + lam/(1-lam) * kappa_minus`` vanishes exactly when the two
    curvatures are in the proportion of the chord; it equals the second
    derivative of ``v . K`` along ``u``.
    """
    if frames.degree != 2:
        raise ValueError("proportion_witness needs 2-parallel adapted frames")
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    h_plus = v[0] * frames.phi.hessian() + v[1] * frames.psi.hessian()
    h_minus = v[0] * frames.xi.hessian() + v[1] * frames.zeta.hessian()
    rho = lam / (1.0 - lam)
    kp = float(u @ h_plus @ u)
    km = float(u @ h_minus @ u)
    h_refl = -rho * h_minus  # reflection x -> -(1-lam)/lam x rescales curvature by -lam/(1-lam)
    scale = max(1.0, float(np.abs(h_plus).max()), float(np.abs(h_refl).max()))
    return ProportionReport(kp, km, -rho * km, kp + rho * km,
                            _is_contact_pair(h_plus, u, scale, tol),
                            _is_contact_pair(h_refl, u, scale, tol))


@dataclass(frozen=True)
class ChordClassification:
    pair: ChordPair
    label: SingLabel
    frames: AdaptedFrames
    contact: ContactMapJet
    theta: Jet1 | None = None


def classify_chord(patch_p, qp, patch_m, qm, lam: float, order: int = 6,
                   tol: Tolerances = DEFAULT) -> ChordClassification:
    pair = make_chord(patch_p, qp, patch_m, qm, lam, tol)
    if pair.degree == 0:
        raise NotCritical("chord is not weakly parallel; its lambda-point is a regular value")
    frames = adapt_frames(pair, order, tol)
    theta = None
    if pair.degree == 1:
        K = contact_map_1par(frames, lam)
        theta = reduce_theta(K, tol)
        z = implicit_solve(K.k1, tol)
        eta = eta_residuals(frames.phi, frames.psi, frames.zeta, lam, z)
        label = classify_Ak(theta, float(K.scale()), eta, tol)
    else:
        K = contact_map_2par(frames, lam, tol)
        label = classify_C(K, tol)
    if pair.info.low_margin:
        w = dict(label.witness)
        w["label_before_margin_check"] = str(label)
        w["singular_values"] = list(pair.info.singular_values)
        label = SingLabel(SingTag.DEGENERATE, label.margin, w, DegenerateReason.LOW_MARGIN)
    return ChordClassification(pair, label, frames, K, theta)
