import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equidist import jets
from equidist.jets import DomainError, Jet1, Jet2, SingularImplicit, implicit_solve, invert_pair

X = Jet2.variable(0, 0.0, 6)
Y = Jet2.variable(1, 0.0, 6)


def coeff(j, i, k):
    return float(j[i, k])


def test_layout():
    assert jets.n_coeffs(6) == 28
    assert [jets.index(i, j) for i, j in jets.monomials(2)] == list(range(6))
    with pytest.raises(ValueError):
        Jet2(np.zeros(5))


def test_monomial_product():
    p = X * Y
    assert coeff(p, 1, 1) == 1.0
    assert np.count_nonzero(p.coeffs) == 1


def test_difference_of_squares():
    p = (1 + X) * (1 - X)
    assert coeff(p, 0, 0) == 1.0 and coeff(p, 2, 0) == -1.0
    assert np.count_nonzero(p.coeffs) == 2


def test_square_at_order_four():
    x = Jet2.variable(0, 0.0, 4)
    y = Jet2.variable(1, 0.0, 4)
    p = (x + y * y) ** 2
    expect = {(2, 0): 1.0, (1, 2): 2.0, (0, 4): 1.0}
    for i, j in jets.monomials(4):
        assert coeff(p, i, j) == expect.get((i, j), 0.0)


def test_mixed_orders_truncate():
    a = Jet2.variable(0, 0.0, 3)
    assert (a * X).order == 3
    assert (a + X).order == 3


def test_sin_maclaurin():
    s = jets.sin(Jet2.variable(0, 0.0, 3))
    assert coeff(s, 1, 0) == 1.0
    assert coeff(s, 3, 0) == pytest.approx(-1 / 6, abs=1e-15)
    assert coeff(s, 2, 0) == 0.0


def test_cos_of_zero_jet():
    c = jets.cos(Jet2.constant(0.0, 4))
    assert coeff(c, 0, 0) == 1.0
    assert np.count_nonzero(c.coeffs) == 1


def test_sin_sum_matches_finite_differences():
    j = jets.sin(Jet2.variable(0, 0.0, 2) + Jet2.variable(1, 0.0, 2))
    f = lambda a, b: math.sin(a + b)
    h = 1e-4
    fx = (f(h, 0) - f(-h, 0)) / (2 * h)
    fxx = (f(h, 0) - 2 * f(0, 0) + f(-h, 0)) / h ** 2
    fxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)
    assert j.partial(1, 0) == pytest.approx(fx, abs=1e-8)
    assert j.partial(2, 0) == pytest.approx(fxx, abs=1e-7)
    assert j.partial(1, 1) == pytest.approx(fxy, abs=1e-7)


@pytest.mark.parametrize("name", ["sin_x_exp_y", "ratio", "sqrt_atan", "power", "torus_f3"])
def test_elementary_functions_against_oracle(name, oracle):
    x = Jet2.variable(0, 0.3, 6)
    y = Jet2.variable(1, 1.1, 6)
    built = {
        "sin_x_exp_y": lambda: jets.sin(x) * jets.exp(y),
        "ratio": lambda: (1 + x * y) / (2 + x * x + y),
        "sqrt_atan": lambda: jets.sqrt(3 + x + y * y) * jets.atan(x - 2 * y + 0.5),
        "power": lambda: (1 + x + y) ** -1.5,
        "torus_f3": lambda: jets.cos(2 * x) * (1 - 2 * jets.cos(y) / 5)
        + 4 * jets.sin(2 * x) * jets.sin(y) / 5,
    }[name]()
    for key, val in oracle["jets_at_0.3_1.1"][name].items():
        i, j = map(int, key.split(","))
        assert coeff(built, i, j) == pytest.approx(val, rel=1e-11, abs=1e-12), key


def test_domain_errors():
    with pytest.raises(DomainError):
        jets.sqrt(Jet2.constant(-1.0, 2))
    with pytest.raises(DomainError):
        (X * 0.0 + 0.0).reciprocal()
    with pytest.raises(DomainError):
        1.0 / X


def test_implicit_solve_examples(oracle):
    y, z = X, Y
    assert np.allclose(implicit_solve(z).coeffs, 0.0)
    assert np.allclose(implicit_solve(z - y * y).coeffs, [0, 0, 1, 0, 0, 0, 0])
    assert np.allclose(implicit_solve(z + z * z - y).coeffs, oracle["catalan_implicit"])


def test_implicit_solve_singular():
    with pytest.raises(SingularImplicit):
        implicit_solve(Y * Y - X)


def test_implicit_solve_residual_is_small(rng):
    for _ in range(20):
        c = rng.uniform(-10, 10, 28)
        c[0] = 0.0
        c[jets.index(0, 1)] = rng.uniform(1, 10) * rng.choice([-1, 1])
        k1 = Jet2(c)
        z = implicit_solve(k1)
        back = k1.substitute(Jet1.variable(0.0, 6), z)
        scale = max(1.0, np.abs(z.coeffs).max()) * np.abs(c).max()
        assert np.abs(back.coeffs).max() < 1e-12 * scale


def test_invert_pair_round_trip():
    f1 = X + 0.3 * Y + X * Y - 0.5 * Y ** 3
    f2 = -Y + 0.2 * X * X + X ** 4
    g1, g2 = invert_pair(f1, f2)
    r1 = f1.substitute(g1, g2)
    r2 = f2.substitute(g1, g2)
    assert np.allclose(r1.coeffs, X.coeffs, atol=1e-12)
    assert np.allclose(r2.coeffs, Y.coeffs, atol=1e-12)


def test_batched_jets_broadcast():
    u = Jet2.variable(0, np.array([0.0, 1.0, 2.0]), 3)
    v = Jet2.variable(1, 0.5, 3)
    w = jets.sin(u) * v
    assert w.batch_shape == (3,)
    assert np.allclose(w.value, np.sin([0.0, 1.0, 2.0]) * 0.5)


def test_jet1_derivatives():
    t = Jet1([0.0, 1.0, 0.5, 0.0, 0.25, 0.0, 0.0])
    assert t.derivative(2) == 1.0
    assert t.derivative(4) == pytest.approx(6.0)


poly_coeffs = st.lists(st.floats(-5, 5, allow_nan=False), min_size=28, max_size=28)


@settings(max_examples=40, deadline=None)
@given(poly_coeffs)
def test_polynomials_reproduce_exactly(cs):
    built = Jet2.constant(0.0, 6)
    for (i, j), c in zip(jets.monomials(6), cs):
        built = built + c * X ** i * Y ** j if (i or j) else built + c
    assert np.allclose(built.coeffs, cs, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_composition_associativity(a, b, c):
    f = jets.sin(X + Y) * jets.exp(Y)
    g1, g2 = a * X + X * Y, b * Y + X * X
    h1, h2 = X + c * Y * Y, Y - c * X * Y
    lhs = f.substitute(g1, g2).substitute(h1, h2)
    rhs = f.substitute(g1.substitute(h1, h2), g2.substitute(h1, h2))
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)
