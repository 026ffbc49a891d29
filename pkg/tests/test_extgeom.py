import numpy as np
import pytest

from conftest import patch
from equidist import extgeom as eg
from equidist.extgeom import ParabolicSubtype, PointTag
from equidist.surface import frame_at
from equidist.torus import TORUS_COMPONENTS


def test_second_form_examples(torus):
    assert np.allclose(eg.second_form(patch("x", "y", "x^2", "y^2"), (0, 0)).coeffs,
                       [2, 0, 0, 0, 0, 2])
    assert np.allclose(eg.second_form(patch("x", "y", "x^2 - y^2", "x*y"), (0, 0)).coeffs,
                       [2, 0, -2, 0, 1, 0])
    # cross-check against the order-2 jet projected on the normal frame
    q = (0.0, 0.0)
    js = torus.jet_at(q, 2)
    fr = frame_at(torus, q)
    d2 = np.array([[j.partial(2, 0), j.partial(1, 1), j.partial(0, 2)] for j in js])
    want = np.concatenate([fr.e3 @ d2, fr.e4 @ d2])
    assert np.allclose(eg.second_form(torus, q).coeffs, want, atol=1e-10)


@pytest.mark.parametrize("alpha, d", [
    ((2, 0, 0, 0, 0, 2), -4.0), ((2, 0, -2, 0, 1, 0), 4.0), ((2, 0, 0, 0, 1, 0), 0.0)])
def test_delta_examples(alpha, d):
    assert eg.delta(alpha) == pytest.approx(d, abs=1e-14)


def test_delta_matches_four_by_four_determinant(rng):
    for al in rng.normal(size=(50, 6)):
        a, b, c, e, f, g = al
        m = np.array([[a, 2 * b, c, 0], [e, 2 * f, g, 0], [0, a, 2 * b, c], [0, e, 2 * f, g]])
        assert eg.delta(al) == pytest.approx(np.linalg.det(m) / 4, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("alpha, g", [((2, 0, -2, 0, 0, 0), -4.0), ((0,) * 6, 0.0),
                                      ((2, 0, 2, 0, 0, 0), 4.0)])
def test_gauss_curvature_examples(alpha, g):
    assert eg.gauss_curv(alpha) == g


def test_classify_examples():
    assert eg.classify_point((2, 0, 0, 0, 0, 2)).tag is PointTag.HYPERBOLIC
    assert eg.classify_point((2, 0, -2, 0, 1, 0)).tag is PointTag.ELLIPTIC
    pc = eg.classify_point((2, 0, -2, 0, 0, 0))
    assert pc.tag is PointTag.PARABOLIC and pc.subtype is ParabolicSubtype.INFLECTION_REAL
    assert pc.rank == 1
    assert eg.classify_point((2, 0, 0, 0, 1, 0)).subtype is ParabolicSubtype.NONDEGENERATE_ELLIPSE
    assert eg.classify_point((2, 0, 2, 0, 0, 0)).subtype is ParabolicSubtype.INFLECTION_IMAGINARY
    assert eg.classify_point((0,) * 6).subtype is ParabolicSubtype.INFLECTION_FLAT
    assert eg.classify_point((2, 0, 0, 0, 0, 2)).subtype is None


def test_torus_delta_oracle(torus, oracle):
    for key, want in oracle["torus_delta"].items():
        q = tuple(map(float, key.split(",")))
        assert eg.delta(eg.second_form(torus, q)) == pytest.approx(want, rel=1e-10, abs=1e-13)


def test_curvature_ellipse():
    assert np.allclose(eg.curvature_ellipse((2, 0, 0, 0, 0, 2), 0.0), [2, 0])
    assert np.allclose(eg.curvature_ellipse((2, 0, 0, 0, 0, 2), np.pi / 2), [0, 2])
    th = np.linspace(0, 2 * np.pi, 17)
    assert np.allclose(eg.curvature_ellipse((2, 0, -2, 0, 1, 0), th),
                       np.stack([2 * np.cos(2 * th), np.sin(2 * th)], axis=-1))
    assert np.allclose(eg.curvature_ellipse((0,) * 6, th), 0.0)


def test_curvature_ellipse_traced_twice(rng):
    al = rng.normal(size=6)
    th = rng.uniform(0, 2 * np.pi, 100)
    assert np.allclose(eg.curvature_ellipse(al, th), eg.curvature_ellipse(al, th + np.pi))


def test_contact_pair_examples():
    pairs = eg.contact_pairs((2, 0, 0, 0, 0, 2))
    got = sorted((tuple(np.round(p.u, 12)), tuple(np.round(p.v, 12))) for p in pairs)
    assert got == [((0.0, 1.0), (1.0, 0.0)), ((1.0, 0.0), (0.0, 1.0))]
    assert len(eg.contact_pairs((2, 0, -2, 0, 1, 0))) == 0
    assert len(eg.contact_pairs((2, 0, 0, 0, 1, 0))) == 1
    infl = eg.contact_pairs((2, 0, -2, 0, 0, 0))
    assert infl.all_tangent_directions and np.allclose(infl.inflection_binormal, [0, 1])


def _check_pair(al, p):
    a, b, c, e, f, g = al
    m = p.v[0] * np.array([[a, b], [b, c]]) + p.v[1] * np.array([[e, f], [f, g]])
    scale = np.abs(al).max()
    assert abs(np.linalg.det(m)) < 1e-8 * scale ** 2
    assert np.linalg.norm(m @ p.u) < 1e-8 * scale


def test_contact_pair_count_matches_class(rng):
    want = {PointTag.HYPERBOLIC: 2, PointTag.ELLIPTIC: 0}
    for al in rng.normal(size=(10_000, 6)):
        pc = eg.classify_point(al)
        pairs = eg.contact_pairs(al)
        assert len(pairs) == want[pc.tag]
        for p in pairs:
            _check_pair(al, p)
    # the parabolic stratum has measure zero; build points on it
    for _ in range(200):
        a, b, c, e, f = rng.normal(size=5)
        # choose g so the pencil discriminant vanishes: (ag + ce - 2bf)^2 = 4(ac - b^2)(eg - f^2)
        A = a * c - b * b
        k = c * e - 2 * b * f
        qa, qb, qc = a * a, 2 * a * k - 4 * A * e, k * k + 4 * A * f * f
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            continue
        g = (-qb + np.sqrt(disc)) / (2 * qa)
        al = np.array([a, b, c, e, f, g])
        pc = eg.classify_point(al, eg.DEFAULT.with_overrides(delta_rel=1e-6))
        if pc.tag is PointTag.PARABOLIC and pc.rank == 2:
            pairs = eg.contact_pairs(al, eg.DEFAULT.with_overrides(delta_rel=1e-6))
            assert len(pairs) == 1
            _check_pair(al, pairs[0])


def _linear_image(A):
    texts = ["+".join(f"({float(A[i, j])!r})*({TORUS_COMPONENTS[j]})" for j in range(4))
             for i in range(4)]
    return patch(*texts, box=(0.0, 2 * np.pi, 0.0, 2 * np.pi))


def test_sign_of_delta_is_affine_invariant(torus, rng):
    pts = rng.uniform(0, 2 * np.pi, (12, 2))
    base = [eg.second_form(torus, q) for q in pts]
    for _ in range(4):
        A = rng.normal(size=(4, 4))
        if abs(np.linalg.det(A)) < 0.1:
            continue
        img = _linear_image(A)
        for q, al in zip(pts, base):
            pc = eg.classify_point(al)
            if pc.margin < 1e-4:
                continue
            assert eg.classify_point(eg.second_form(img, q)).tag is pc.tag


@pytest.mark.parametrize("third", ["x^2 + y^2", "x^2 - y^2"])
def test_sign_of_gauss_on_rank_one_is_affine_invariant(third, rng):
    comps = ("x", "y", third, "x^3*y")
    al = eg.second_form(patch(*comps), (0.0, 0.0))
    assert eg.form_rank(al) == 1
    s0 = np.sign(eg.gauss_curv(al))
    for _ in range(5):
        A = rng.normal(size=(4, 4))
        texts = ["+".join(f"({float(A[i, j])!r})*({t})" for j, t in enumerate(comps)) for i in range(4)]
        al2 = eg.second_form(patch(*texts), (0.0, 0.0))
        assert eg.form_rank(al2) == 1
        assert np.sign(eg.gauss_curv(al2)) == s0
