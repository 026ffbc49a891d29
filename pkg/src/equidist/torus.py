"""The built-in torus in R^4 and its closed-form curves of parabolic points."""
from __future__ import annotations

import math

from .surface import SurfacePatch

TORUS_COMPONENTS = (
    "cos(x)*(1 - cos(y)/10) + sin(x)*sin(y)/10",
    "(1 - cos(y)/10)*sin(x) - cos(x)*sin(y)/10",
    "cos(2*x)*(1 - 2*cos(y)/5) + 4*sin(2*x)*sin(y)/5",
    "(1 - 2*cos(y)/5)*sin(2*x) - 4*cos(2*x)*sin(y)/5",
)


def builtin_torus(s: float = 0.0) -> SurfacePatch:
    """Torus patch on the periodic box [0, 2pi)^2; ``s`` only labels the family member."""
    return SurfacePatch.from_strings("torus", TORUS_COMPONENTS,
                                     (0.0, 2 * math.pi, 0.0, 2 * math.pi), (True, True), s)


def torus_parabolic_curve() -> tuple:
    """The two lines y = y+ and y = y- = -y+ of parabolic points."""
    y_plus = 2.0 * math.atan(math.sqrt((math.sqrt(41.0) - 4.0) / 5.0))
    return y_plus, -y_plus


def family_point(s: float) -> tuple:
    """Point (s, y+ + s): elliptic for s < 0, parabolic at 0, hyperbolic for s > 0."""
    y_plus = torus_parabolic_curve()[0]
    return (s, y_plus + s)


BUILTINS = {"torus": builtin_torus}


def resolve_surface(name_or_path: str, s: float = 0.0) -> SurfacePatch:
    """``builtin:<name>`` or a path to a surface file."""
    if name_or_path.startswith("builtin:"):
        key = name_or_path.split(":", 1)[1]
        if key not in BUILTINS:
            raise ValueError(f"unknown builtin surface {key!r}")
        return BUILTINS[key](s)
    return SurfacePatch.load(name_or_path, s)
