"""Numerical tolerances shared by every module.

All thresholds live in one frozen record so a caller can tighten or loosen
them in one place; classifiers report the margin by which a test passed.
"""
from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    zero: float = 1e-9                # generic zero test
    derivative_match: float = 1e-8    # jets vs finite differences
    immersion: float = 1e-8           # smallest/largest singular value of df
    rank_rel: float = 1e-8            # rank of the 2x3 second fundamental form
    delta_rel: float = 1e-8           # parabolic band, relative to |alpha|^4
    gauss_rel: float = 1e-8           # sign of G_M, relative to |alpha|^2
    parallel_rank: float = 1e-7       # singular value ratio for parallel degree
    low_margin_factor: float = 100.0  # band above a threshold flagged LowMargin
    plucker_match: float = 1e-7       # Gauss map coincidence, normalized coords
    weak_form_zero: float = 1e-9
    theta_rel: float = 1e-7           # decisive derivative of theta
    implicit: float = 1e-9            # |dK1/dz| below this is singular
    bisect: float = 1e-10             # edge-crossing refinement, parameter units
    critical_value_rel: float = 1e-8  # |J| at a critical point, relative
    cusp_rel: float = 1e-6            # |det Hess| / |Hess|^2 below this is a cusp
    dedup: float = 1e-6               # merge critical points closer than this
    angle: float = 1e-3               # tangent matching, radians

    def with_overrides(self, **kwargs) -> "Tolerances":
        return replace(self, **kwargs)


DEFAULT = Tolerances()
