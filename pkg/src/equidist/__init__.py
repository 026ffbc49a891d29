"""Extrinsic geometry of surfaces in R^4, parallel chords and affine equidistants."""
from .config import DEFAULT, Tolerances
from .contact import SingLabel, SingTag, classify_chord
from .extgeom import PointTag, classify_point, contact_pairs, delta, gauss_curv, second_form
from .kernels import BACKEND
from .parallel import make_chord, parallel_degree
from .surface import SurfacePatch
from .torus import builtin_torus, torus_parabolic_curve
from .tracer import sample_equidistant, trace_wp, umbrella_section, wp_family

__all__ = [
    "BACKEND", "DEFAULT", "PointTag", "SingLabel", "SingTag", "SurfacePatch", "Tolerances",
    "builtin_torus", "classify_chord", "classify_point", "contact_pairs", "delta", "gauss_curv",
    "make_chord", "parallel_degree", "sample_equidistant", "second_form", "torus_parabolic_curve",
    "trace_wp", "umbrella_section", "wp_family",
]
