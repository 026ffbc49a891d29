import os
import subprocess
import sys

import numpy as np
import pytest

from equidist import _numpy_kernels as npk
from equidist import jets

nbk = pytest.importorskip("equidist._numba_kernels")


def test_jet_mul(rng):
    order = 6
    nc = jets.n_coeffs(order)
    I, J, K = jets._product_table(order)
    a = rng.normal(size=(nc, 37))
    b = rng.normal(size=(nc, 37))
    assert np.allclose(npk.jet_mul(a, b, I, J, K, nc), nbk.jet_mul(a, b, I, J, K, nc),
                       rtol=1e-14, atol=1e-14)


def test_det4(rng):
    m = rng.normal(size=(200, 4, 4))
    want = np.linalg.det(m)
    assert np.allclose(npk.det4(m), want, rtol=1e-12, atol=1e-13)
    assert np.allclose(nbk.det4(m), want, rtol=1e-12, atol=1e-13)


@pytest.mark.parametrize("px, py", [(False, False), (True, False), (True, True)])
def test_marching_squares_kernels(rng, px, py):
    v = rng.normal(size=(23, 19))
    c1 = npk.cell_cases(v, px, py)
    c2 = nbk.cell_cases(v, px, py)
    assert np.array_equal(c1, c2)
    centre = rng.random(c1.shape) < 0.5
    s1 = npk.segments_from_cases(c1, centre, 23, 19)
    s2 = nbk.segments_from_cases(c2, centre, 23, 19)
    assert np.array_equal(s1, s2)


def test_sign_change_edges(rng):
    v = rng.normal(size=(6, 7, 5, 6))
    zero = np.abs(v) < 0.05
    excluded = rng.random(v.shape) < 0.1
    for periodic in ((True,) * 4, (False, True, False, True)):
        n1, a1 = npk.sign_change_edges(v, zero, excluded, periodic)
        n2, a2 = nbk.sign_change_edges(v, zero, excluded, periodic)
        assert np.array_equal(n1, n2) and np.array_equal(a1, a2)


def test_env_flag_selects_numpy():
    code = "from equidist import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, EQUIDIST_PURE_NUMPY="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "numpy"
    env["EQUIDIST_PURE_NUMPY"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "numba"


def test_backends_give_same_trace():
    code = ("import numpy as np\n"
            "from equidist.torus import builtin_torus\n"
            "from equidist.tracer import trace_wp\n"
            "t = trace_wp(builtin_torus(), (np.pi, np.pi), grid=60)\n"
            "print(len(t.polylines), sum(len(p) for p in t.polylines))\n"
            "for m in t.markers: print(m.kind.value, round(m.point[0], 9), round(m.point[1], 9))\n")
    outs = []
    for flag in ("1", "0"):
        env = dict(os.environ, EQUIDIST_PURE_NUMPY=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout)
    assert outs[0] == outs[1]
