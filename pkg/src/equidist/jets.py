"""Truncated Taylor series in one and two variables (total order <= 6).

A jet carries the coefficients of a polynomial truncated at a fixed total
order.  Coefficient arrays have shape ``(ncoef, *batch)``: the leading axis
indexes monomials and any trailing axes hold independent expansions that
are processed together (grid points, chord pairs, ...).

Two-variable monomials ``x^i y^j`` are stored by total degree ``d = i + j``
and then by ``j``, so ``index(i, j) = d (d + 1) / 2 + j``.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from . import kernels
from .config import DEFAULT, Tolerances

MAX_ORDER = 6


class DomainError(ValueError):
    """An elementary function or a division left its real domain."""


class SingularImplicit(ArithmeticError):
    """The implicit function theorem does not apply (dK/dz vanishes)."""


def n_coeffs(order: int) -> int:
    return (order + 1) * (order + 2) // 2


def index(i: int, j: int) -> int:
    d = i + j
    return d * (d + 1) // 2 + j


@lru_cache(maxsize=None)
def monomials(order: int) -> tuple:
    return tuple((d - j, j) for d in range(order + 1) for j in range(d + 1))


@lru_cache(maxsize=None)
def _product_table(order: int):
    mons = monomials(order)
    I, J, K = [], [], []
    for ia, (i1, j1) in enumerate(mons):
        for ib, (i2, j2) in enumerate(mons):
            if i1 + i2 + j1 + j2 <= order:
                I.append(ia)
                J.append(ib)
                K.append(index(i1 + i2, j1 + j2))
    return (np.array(I, dtype=np.int64), np.array(J, dtype=np.int64),
            np.array(K, dtype=np.int64))


def _order_from_len(n: int, two_var: bool) -> int:
    if not two_var:
        return n - 1
    for order in range(MAX_ORDER + 1):
        if n_coeffs(order) == n:
            return order
    raise ValueError(f"{n} coefficients do not form a triangular jet of order <= {MAX_ORDER}")


def _expand(c: np.ndarray, batch: tuple) -> np.ndarray:
    """Broadcast a coefficient array (leading monomial axis) to ``batch``."""
    pad = len(batch) - (c.ndim - 1)
    c = c.reshape(c.shape[:1] + (1,) * pad + c.shape[1:])
    return np.broadcast_to(c, c.shape[:1] + batch)


def _broadcast_pair(a: np.ndarray, b: np.ndarray):
    batch = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    return _expand(a, batch), _expand(b, batch), batch


class _Jet:
    """Arithmetic shared by ``Jet1`` and ``Jet2``."""

    __slots__ = ("coeffs", "order")
    __array_ufunc__ = None  # let ndarray operands defer to our reflected ops
    _two_var = True

    def __init__(self, coeffs, order: int | None = None):
        c = np.array(coeffs, dtype=float)
        if c.ndim == 0:
            raise ValueError("coefficient array must have a monomial axis")
        inferred = _order_from_len(c.shape[0], self._two_var)
        if order is not None and order != inferred:
            raise ValueError(f"expected order {order}, got {c.shape[0]} coefficients")
        if inferred < 0 or inferred > MAX_ORDER:
            raise ValueError(f"order must lie in [0, {MAX_ORDER}]")
        c.setflags(write=False)
        self.coeffs = c
        self.order = inferred

    @classmethod
    def _wrap(cls, coeffs: np.ndarray, order: int):
        obj = object.__new__(cls)
        coeffs.setflags(write=False)
        obj.coeffs = coeffs
        obj.order = order
        return obj

    @classmethod
    def _ncoef(cls, order: int) -> int:
        return n_coeffs(order) if cls._two_var else order + 1

    @classmethod
    def constant(cls, value, order: int):
        v = np.asarray(value, dtype=float)
        c = np.zeros((cls._ncoef(order),) + v.shape)
        c[0] = v
        return cls._wrap(c, order)

    def constant_like(self, value):
        return type(self).constant(np.broadcast_to(value, self.batch_shape), self.order)

    @property
    def batch_shape(self) -> tuple:
        return self.coeffs.shape[1:]

    @property
    def value(self):
        return self.coeffs[0]

    def max_abs(self):
        """Largest coefficient magnitude per batch element."""
        return np.abs(self.coeffs).max(axis=0)

    def truncate(self, order: int):
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        return type(self)._wrap(self.coeffs[: self._ncoef(order)].copy(), order)

    # -- arithmetic ---------------------------------------------------------
    def _pair(self, other):
        order = min(self.order, other.order)
        a = self.coeffs[: self._ncoef(order)]
        b = other.coeffs[: self._ncoef(order)]
        return a, b, order

    def _is_same(self, other) -> bool:
        return type(other) is type(self)

    def __neg__(self):
        return type(self)._wrap(-self.coeffs, self.order)

    def __pos__(self):
        return self

    def __add__(self, other):
        if self._is_same(other):
            a, b, order = self._pair(other)
            return type(self)._wrap(a + b, order)
        if isinstance(other, _Jet):
            return NotImplemented
        o = np.asarray(other, dtype=float)
        batch = np.broadcast_shapes(self.batch_shape, o.shape)
        c = np.array(_expand(self.coeffs, batch))
        c[0] = c[0] + o
        return type(self)._wrap(c, self.order)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, _Jet) and not self._is_same(other):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if self._is_same(other):
            a, b, order = self._pair(other)
            return type(self)._wrap(self._mul_coeffs(a, b, order), order)
        if isinstance(other, _Jet):
            return NotImplemented
        o = np.asarray(other, dtype=float)
        c, o = _broadcast_pair(self.coeffs, o[None, ...])[:2]
        return type(self)._wrap(c * o, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if self._is_same(other):
            return self * other.reciprocal()
        if isinstance(other, _Jet):
            return NotImplemented
        o = np.asarray(other, dtype=float)
        if np.any(o == 0.0):
            raise DomainError("division by zero")
        c, o = _broadcast_pair(self.coeffs, o[None, ...])[:2]
        return type(self)._wrap(c / o, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        return power(self, exponent)

    def reciprocal(self):
        c0 = self.value
        if np.any(c0 == 0.0):
            raise DomainError("division by a jet with zero constant term")
        n = self.order
        k = np.arange(n + 1).reshape((-1,) + (1,) * c0.ndim)
        series = (-1.0) ** k / c0[None, ...] ** (k + 1)
        return self.compose(series)

    def compose(self, series):
        """Apply a univariate Taylor series taken about this jet's constant term.

        ``series[k]`` is the k-th Taylor coefficient f^(k)(c0)/k! (optionally
        batched); the result is ``sum_k series[k] * (self - c0)^k``.
        """
        series = np.asarray(series, dtype=float)
        n = self.order
        if series.shape[0] < n + 1:
            raise ValueError("series shorter than the jet order")
        h_coeffs = np.array(self.coeffs)
        h_coeffs[0] = 0.0
        h = type(self)._wrap(h_coeffs, n)
        out = h.constant_like(0.0) + series[n]
        for k in range(n - 1, -1, -1):
            out = out * h + series[k]
        return out

    def substitute(self, *args):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(order={self.order}, coeffs={self.coeffs.tolist()})"


class Jet2(_Jet):
    """Truncated Taylor expansion in two variables ``x, y``."""

    __slots__ = ()
    _two_var = True

    @staticmethod
    def _mul_coeffs(a, b, order):
        a, b, batch = _broadcast_pair(a, b)
        nc = n_coeffs(order)
        I, J, K = _product_table(order)
        a2 = np.ascontiguousarray(a.reshape(nc, -1))
        b2 = np.ascontiguousarray(b.reshape(nc, -1))
        out = kernels.jet_mul(a2, b2, I, J, K, nc)
        return out.reshape((nc,) + batch)

    @classmethod
    def variable(cls, axis: int, value=0.0, order: int = MAX_ORDER):
        """The jet of ``value + x`` (axis 0) or ``value + y`` (axis 1)."""
        jet = cls.constant(value, order)
        if order >= 1:
            c = np.array(jet.coeffs)
            c[1 + axis] = 1.0
            jet = cls._wrap(c, order)
        return jet

    @classmethod
    def from_terms(cls, terms: dict, order: int = MAX_ORDER):
        """Build a jet from ``{(i, j): coefficient}``; terms above ``order`` are dropped."""
        c = np.zeros(n_coeffs(order))
        for (i, j), v in terms.items():
            if i + j <= order:
                c[index(i, j)] += v
        return cls._wrap(c, order)

    def __getitem__(self, ij):
        i, j = ij
        if i + j > self.order:
            return np.zeros(self.batch_shape)
        return self.coeffs[index(i, j)]

    def partial(self, i: int, j: int):
        """The derivative d^{i+j} / dx^i dy^j at the expansion point."""
        return factorial(i) * factorial(j) * self[i, j]

    def deriv(self, axis: int) -> "Jet2":
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        n = self.order - 1
        c = np.zeros((n_coeffs(n),) + self.batch_shape)
        for k, (i, j) in enumerate(monomials(n)):
            if axis == 0:
                c[k] = (i + 1) * self.coeffs[index(i + 1, j)]
            else:
                c[k] = (j + 1) * self.coeffs[index(i, j + 1)]
        return Jet2._wrap(c, n)

    def gradient(self):
        return np.stack([self[1, 0], self[0, 1]], axis=0)

    def hessian(self):
        h = np.empty((2, 2) + self.batch_shape)
        h[0, 0] = 2.0 * self[2, 0]
        h[0, 1] = h[1, 0] = self[1, 1]
        h[1, 1] = 2.0 * self[0, 2]
        return h

    def substitute(self, a, b):
        """Compose ``self(a, b)`` where ``a`` and ``b`` are jets with zero constant term.

        ``a`` and ``b`` may be ``Jet1`` (giving a ``Jet1``) or ``Jet2``.
        """
        if type(a) is not type(b):
            raise TypeError("substituted jets must be of the same kind")
        for inner in (a, b):
            if np.any(np.abs(inner.value) > 1e-12 * np.maximum(1.0, inner.max_abs())):
                raise ValueError("substituted jets must have zero constant term")
        order = min(self.order, a.order, b.order)
        a = a.truncate(order)
        b = b.truncate(order)
        powers = [b.constant_like(1.0)]
        for _ in range(order):
            powers.append(powers[-1] * b)
        out = None
        for i in range(order, -1, -1):
            inner = powers[0] * self[i, 0]
            for j in range(1, order - i + 1):
                inner = inner + powers[j] * self[i, j]
            out = inner if out is None else out * a + inner
        return out

    def evaluate(self, dx, dy):
        """Value of the truncated polynomial at the offset ``(dx, dy)``."""
        dx = np.asarray(dx, dtype=float)
        dy = np.asarray(dy, dtype=float)
        total = 0.0
        for k, (i, j) in enumerate(monomials(self.order)):
            total = total + self.coeffs[k] * dx ** i * dy ** j
        return total


class Jet1(_Jet):
    """Truncated Taylor expansion in one variable."""

    __slots__ = ()
    _two_var = False

    @staticmethod
    def _mul_coeffs(a, b, order):
        a, b, batch = _broadcast_pair(a, b)
        out = np.zeros((order + 1,) + batch)
        for k in range(order + 1):
            for i in range(k + 1):
                out[k] += a[i] * b[k - i]
        return out

    @classmethod
    def variable(cls, value=0.0, order: int = MAX_ORDER):
        jet = cls.constant(value, order)
        if order >= 1:
            c = np.array(jet.coeffs)
            c[1] = 1.0
            jet = cls._wrap(c, order)
        return jet

    def __getitem__(self, k):
        if k > self.order:
            return np.zeros(self.batch_shape)
        return self.coeffs[k]

    def derivative(self, k: int):
        """The k-th derivative at the expansion point."""
        return factorial(k) * self[k]

    def deriv(self) -> "Jet1":
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        k = np.arange(1, self.order + 1).reshape((-1,) + (1,) * len(self.batch_shape))
        return Jet1._wrap(self.coeffs[1:] * k, self.order - 1)

    def scale_argument(self, s):
        """The jet of ``t -> self(s t)``."""
        s = np.asarray(s, dtype=float)
        k = np.arange(self.order + 1).reshape((-1,) + (1,) * s.ndim)
        return Jet1._wrap(self.coeffs * s[None, ...] ** k, self.order)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        total = 0.0
        for k in range(self.order, -1, -1):
            total = total * t + self.coeffs[k]
        return total


def is_jet(x) -> bool:
    return isinstance(x, _Jet)


# -- elementary functions ----------------------------------------------------

def _fact(c0, n):
    return np.array([float(factorial(k)) for k in range(n + 1)]).reshape(
        (-1,) + (1,) * np.ndim(c0))


def _trig_series(c0, n: int, shift: int):
    # derivatives of sin cycle through sin, cos, -sin, -cos
    s, c = np.sin(c0), np.cos(c0)
    cycle = (s, c, -s, -c)
    return np.stack([cycle[(k + shift) % 4] / factorial(k) for k in range(n + 1)])


def sin(x):
    if not is_jet(x):
        return np.sin(x)
    return x.compose(_trig_series(x.value, x.order, 0))


def cos(x):
    if not is_jet(x):
        return np.cos(x)
    return x.compose(_trig_series(x.value, x.order, 1))


def exp(x):
    if not is_jet(x):
        return np.exp(x)
    c0 = x.value
    return x.compose(np.exp(c0)[None, ...] / _fact(c0, x.order))


def _binomial_series(p: float, c0, n: int):
    out = np.empty((n + 1,) + np.shape(c0))
    coef = 1.0
    for k in range(n + 1):
        out[k] = coef * c0 ** (p - k)
        coef *= (p - k) / (k + 1)
    return out


def power(x, exponent):
    """``x ** exponent`` for a literal (integer or rational) exponent."""
    p = Fraction(exponent).limit_denominator(10 ** 6) if not isinstance(exponent, int) else exponent
    if not is_jet(x):
        base = np.asarray(x, dtype=float)
        if isinstance(p, int) or p.denominator == 1:
            if int(p) < 0 and np.any(base == 0.0):
                raise DomainError("zero raised to a negative power")
            return base ** int(p)
        if np.any(base < 0.0):
            raise DomainError("fractional power of a negative number")
        return base ** float(p)
    if isinstance(p, Fraction) and p.denominator == 1:
        p = int(p)
    if isinstance(p, int):
        if p < 0:
            return power(x.reciprocal(), -p)
        result = x.constant_like(1.0)
        base = x
        while p:
            if p & 1:
                result = result * base
            p >>= 1
            if p:
                base = base * base
        return result
    c0 = x.value
    if np.any(c0 <= 0.0):
        raise DomainError("fractional power of a jet whose constant term is not positive")
    return x.compose(_binomial_series(float(p), c0, x.order))


def sqrt(x):
    if not is_jet(x):
        v = np.asarray(x, dtype=float)
        if np.any(v < 0.0):
            raise DomainError("sqrt of a negative number")
        return np.sqrt(v)
    return power(x, Fraction(1, 2))


def atan(x):
    if not is_jet(x):
        return np.arctan(x)
    c0 = x.value
    n = x.order
    if n == 0:
        return x.compose(np.arctan(c0)[None, ...])
    # d/dt atan(c0 + t) = 1 / (1 + (c0 + t)^2); integrate termwise.
    u = Jet1.variable(0.0, n - 1) + c0
    g = (1.0 + u * u).reciprocal()
    series = np.empty((n + 1,) + c0.shape)
    series[0] = np.arctan(c0)
    for k in range(1, n + 1):
        series[k] = g.coeffs[k - 1] / k
    return x.compose(series)


# -- implicit and inverse functions -----------------------------------------

def implicit_solve(k1: Jet2, tol: Tolerances = DEFAULT) -> Jet1:
    """Solve ``k1(y, z(y)) = 0`` for the jet of ``z`` with ``z(0) = 0``.

    The first variable of ``k1`` is ``y`` and the second is ``z``.
    """
    n = k1.order
    scale = np.maximum(1.0, k1.max_abs())
    if np.any(np.abs(k1[0, 0]) > tol.zero * scale):
        raise ValueError("implicit_solve needs K1(0, 0) = 0")
    d = k1[0, 1] if n >= 1 else np.zeros(k1.batch_shape)
    if np.any(np.abs(d) < tol.implicit * scale):
        raise SingularImplicit(f"|dK1/dz(0,0)| below {tol.implicit:g}")
    y = Jet1.variable(0.0, n)
    z = Jet1.constant(np.zeros(k1.batch_shape), n)
    for _ in range(n + 1):
        z = z - k1.substitute(y + np.zeros(k1.batch_shape), z) / d
    c = np.array(z.coeffs)
    c[0] = 0.0
    return Jet1._wrap(c, n)


def invert_pair(f1: Jet2, f2: Jet2):
    """Jets ``(g1, g2)`` of the local inverse of ``(s, t) -> (f1, f2)``.

    Both components must vanish at the origin with an invertible linear part.
    """
    order = min(f1.order, f2.order)
    f1 = f1.truncate(order)
    f2 = f2.truncate(order)
    l00, l01 = f1[1, 0], f1[0, 1]
    l10, l11 = f2[1, 0], f2[0, 1]
    det = l00 * l11 - l01 * l10
    scale = np.maximum(np.abs([l00, l01, l10, l11]).max(axis=0), 1e-300)
    if np.any(np.abs(det) < 1e-12 * scale ** 2):
        raise SingularImplicit("linear part of the map is not invertible")
    i00, i01, i10, i11 = l11 / det, -l01 / det, -l10 / det, l00 / det
    batch = np.zeros(np.shape(det))
    y = Jet2.variable(0, 0.0, order) + batch
    z = Jet2.variable(1, 0.0, order) + batch
    g1 = y * i00 + z * i01
    g2 = y * i10 + z * i11
    for _ in range(order):
        r1 = f1.substitute(g1, g2) - y
        r2 = f2.substitute(g1, g2) - z
        g1 = g1 - (r1 * i00 + r2 * i01)
        g2 = g2 - (r1 * i10 + r2 * i11)
    return g1, g2
