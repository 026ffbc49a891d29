"""Backend selection for the hot numeric kernels.

numba-compiled kernels are used when numba imports cleanly, unless the
environment variable ``EQUIDIST_PURE_NUMPY`` is set to a non-empty value
other than ``0``; then the pure-numpy fallbacks are used.
"""
import os

from . import _numpy_kernels

_FORCE_NUMPY = os.environ.get("EQUIDIST_PURE_NUMPY", "") not in ("", "0")

if _FORCE_NUMPY:
    _impl = _numpy_kernels
    BACKEND = "numpy"
else:
    try:
        from . import _numba_kernels as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba missing
        _impl = _numpy_kernels
        BACKEND = "numpy"

jet_mul = _impl.jet_mul
det4 = _impl.det4
cell_cases = _impl.cell_cases
segments_from_cases = _impl.segments_from_cases
sign_change_edges = _impl.sign_change_edges
