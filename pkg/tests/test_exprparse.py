from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equidist import exprparse as ep
from equidist.jets import DomainError, Jet2
from equidist.torus import TORUS_COMPONENTS


def test_precedence_tree():
    t = ep.parse("x^2 - y^2")
    assert t == ep.BinOp("-", ep.Pow(ep.Var("x"), Fraction(2)), ep.Pow(ep.Var("y"), Fraction(2)))


def test_torus_component_tree():
    t = ep.parse(TORUS_COMPONENTS[0])
    assert isinstance(t, ep.BinOp) and t.op == "+"
    assert t.left == ep.BinOp("*", ep.Call("cos", ep.Var("x")),
                              ep.BinOp("-", ep.Num(1.0),
                                       ep.BinOp("/", ep.Call("cos", ep.Var("y")), ep.Num(10.0))))


def test_syntax_error_position():
    with pytest.raises(ep.ExprSyntaxError) as info:
        ep.parse("x +* y")
    assert info.value.position == 3


@pytest.mark.parametrize("text", ["", "x +", "(x", "sin x", "x^y", "x^2^3", "2 3", "x $ y"])
def test_malformed(text):
    with pytest.raises(ep.ExprSyntaxError):
        ep.parse(text)


def test_unknown_identifier():
    with pytest.raises(ep.UnknownIdentifier):
        ep.parse("x + t")
    with pytest.raises(ep.UnknownIdentifier):
        ep.parse("tan(x)")


def test_left_associativity_and_unary():
    assert ep.evaluate(ep.parse("8 / 4 / 2"), {}) == 1.0
    assert ep.evaluate(ep.parse("1 - 2 - 3"), {}) == -4.0
    assert ep.evaluate(ep.parse("-x^2"), {"x": 3.0}) == -9.0
    assert ep.evaluate(ep.parse("x^(-1/2)"), {"x": 4.0}) == 0.5


def test_evaluate_numbers_and_jets():
    assert ep.evaluate(ep.parse("x*y"), {"x": 2, "y": 3}) == 6
    j = ep.evaluate(ep.parse("x^2 - y^2"), {"x": Jet2.variable(0, 0.0, 2),
                                             "y": Jet2.variable(1, 0.0, 2)})
    assert j[2, 0] == 1.0 and j[0, 2] == -1.0
    assert ep.evaluate(ep.parse(TORUS_COMPONENTS[2]), {"x": 0.0, "y": 0.0}) == pytest.approx(0.6)


def test_division_by_zero_reports_position():
    with pytest.raises(DomainError, match="position 2"):
        ep.evaluate(ep.parse("x / (y - y)"), {"x": 1.0, "y": 2.0})


def test_free_variables():
    assert ep.free_variables(ep.parse("sin(x) + s*pi")) == frozenset({"x", "s"})


def test_jets_match_finite_differences():
    h = 1e-3
    q = (0.7, -0.4)
    for text in TORUS_COMPONENTS:
        e = ep.parse(text)
        f = lambda a, b: ep.evaluate(e, {"x": a, "y": b})
        j = ep.evaluate(e, {"x": Jet2.variable(0, q[0], 3), "y": Jet2.variable(1, q[1], 3)})
        # central differences of order two, mixed partials by tensor stencils
        def d(i, k):
            if i == 0 and k == 0:
                return f(*q)
            if i > 0:
                return (dd(i - 1, k, h, 0) - dd(i - 1, k, -h, 0)) / (2 * h)
            return (dd(i, k - 1, 0, h) - dd(i, k - 1, 0, -h)) / (2 * h)

        def dd(i, k, du, dv):
            ff = lambda a, b: f(a + du, b + dv)
            return _fd(ff, q, i, k, h)

        for i in range(4):
            for k in range(4 - i):
                exact = j.partial(i, k)
                approx = d(i, k)
                # nested central differences lose accuracy with the order
                tol = (1e-12, 1e-6, 1e-5, 1e-4)[i + k]
                assert abs(exact - approx) <= tol * max(1.0, abs(exact)), (text, i, k)


def _fd(f, q, i, k, h):
    if i == 0 and k == 0:
        return f(*q)
    if i > 0:
        g = lambda a, b: f(a, b)
        return (_fd(lambda a, b: g(a + h, b), q, i - 1, k, h)
                - _fd(lambda a, b: g(a - h, b), q, i - 1, k, h)) / (2 * h)
    return (_fd(lambda a, b: f(a, b + h), q, i, k - 1, h)
            - _fd(lambda a, b: f(a, b - h), q, i, k - 1, h)) / (2 * h)


atoms = st.sampled_from(["x", "y", "s", "pi", "2", "0.5", "3e-2"])


@st.composite
def exprs(draw, depth=3):
    if depth == 0:
        return draw(atoms)
    kind = draw(st.integers(0, 4))
    if kind == 0:
        return draw(atoms)
    if kind == 1:
        op = draw(st.sampled_from(["+", "-", "*", "/"]))
        return f"{draw(exprs(depth - 1))} {op} {draw(exprs(depth - 1))}"
    if kind == 2:
        return f"{draw(st.sampled_from(['sin', 'cos', 'atan', 'exp']))}({draw(exprs(depth - 1))})"
    if kind == 3:
        return f"({draw(exprs(depth - 1))})^{draw(st.sampled_from(['2', '3', '(1/2)', '(-1)']))}"
    return f"-({draw(exprs(depth - 1))})"


@settings(max_examples=150, deadline=None)
@given(exprs())
def test_print_parse_round_trip(text):
    once = ep.to_text(ep.parse(text))
    assert ep.parse(once) == ep.parse(text)
    assert ep.to_text(ep.parse(once)) == once


SURFACE = """# a test surface
name = saddle
f1 = x
f2 = y
f3 = x^2 - y^2   # trailing comment
f4 = x*y
domain = -1 1 -2*pi 2*pi
periodic = false true
"""


def test_surface_file_lf_and_crlf():
    a = ep.parse_surface_text(SURFACE)
    b = ep.parse_surface_text(SURFACE.replace("\n", "\r\n"))
    assert a == b
    assert a.name == "saddle"
    assert a.periodic == (False, True)
    assert a.domain[3] == pytest.approx(2 * np.pi)


@pytest.mark.parametrize("mutate, line", [
    (lambda s: s.replace("f4 = x*y\n", ""), 0),
    (lambda s: s + "f1 = y\n", 9),
    (lambda s: s.replace("f2 = y", "f2 = y +"), 4),
    (lambda s: s.replace("periodic = false true", "periodic = maybe true"), 8),
    (lambda s: s + "colour = red\n", 9),
    (lambda s: s.replace("-1 1 ", "1 -1 "), 7),
])
def test_surface_file_errors(mutate, line):
    with pytest.raises(ep.SurfaceFileError) as info:
        ep.parse_surface_text(mutate(SURFACE))
    assert info.value.line == line
