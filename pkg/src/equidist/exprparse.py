"""Arithmetic expressions in x, y and a family parameter s.

Expressions are parsed by recursive descent into small immutable trees that
evaluate over plain numbers, numpy arrays or jets alike.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from . import jets
from .jets import DomainError

VARIABLES = ("x", "y", "s")
FUNCTIONS = ("sin", "cos", "sqrt", "atan", "exp")
CONSTANTS = {"pi": np.pi}


class ExprSyntaxError(ValueError):
    """Malformed expression text; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int, expected: str = ""):
        self.position = position
        self.expected = expected
        detail = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at position {position}{detail}")


class UnknownIdentifier(ExprSyntaxError):
    pass


class SurfaceFileError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


# -- tree ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: tuple = (0, 0)  # source span of the operator, kept for error reports

    def __eq__(self, other):
        return (isinstance(other, BinOp) and self.op == other.op
                and self.left == other.left and self.right == other.right)

    def __hash__(self):
        return hash((self.op, self.left, self.right))


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: Fraction


Expr = Union[Num, Var, Const, Neg, Call, BinOp, Pow]


# -- tokenizer ----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos,
                                  "number, identifier or operator")
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def _is(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def _expect(self, text: str) -> _Tok:
        if not self._is(text):
            raise ExprSyntaxError(f"unexpected {self._describe()}", self.tok.pos, repr(text))
        return self._advance()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "end" else repr(self.tok.text)

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self._describe()}", self.tok.pos, "operator")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self._is("+") or self._is("-"):
            t = self._advance()
            left = BinOp(t.text, left, self.term(), (t.pos, t.pos + 1))
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self._is("*") or self._is("/"):
            t = self._advance()
            left = BinOp(t.text, left, self.unary(), (t.pos, t.pos + 1))
        return left

    def unary(self) -> Expr:
        if self._is("-"):
            self._advance()
            return Neg(self.unary())
        if self._is("+"):
            self._advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self._is("^"):
            self._advance()
            exponent = self.exponent()
            if self._is("^"):
                raise ExprSyntaxError("chained '^' is ambiguous; add parentheses",
                                      self.tok.pos, "operator other than '^'")
            return Pow(base, exponent)
        return base

    def _signed_number(self) -> Fraction:
        sign = 1
        while self._is("-") or self._is("+"):
            if self._advance().text == "-":
                sign = -sign
        if self.tok.kind != "num":
            raise ExprSyntaxError(f"unexpected {self._describe()}", self.tok.pos,
                                  "numeric literal exponent")
        return sign * Fraction(self._advance().text)

    def exponent(self) -> Fraction:
        if self._is("("):
            self._advance()
            value = self._signed_number()
            if self._is("/"):
                self._advance()
                den = self._signed_number()
                if den == 0:
                    raise ExprSyntaxError("zero denominator in exponent", self.toks[self.i - 1].pos)
                value = value / den
            self._expect(")")
            return value
        return self._signed_number()

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self._advance()
            return Num(float(t.text))
        if t.kind == "ident":
            self._advance()
            if t.text in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Call(t.text, arg)
            if t.text in VARIABLES:
                return Var(t.text)
            if t.text in CONSTANTS:
                return Const(t.text)
            raise UnknownIdentifier(f"unknown identifier {t.text!r}", t.pos,
                                    "one of x, y, s, pi, " + ", ".join(FUNCTIONS))
        if self._is("("):
            self._advance()
            e = self.expr()
            self._expect(")")
            return e
        raise ExprSyntaxError(f"unexpected {self._describe()}", t.pos,
                              "number, variable, function or '('")


def parse(text: str) -> Expr:
    return _Parser(text).parse()


# -- printing -------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _fmt_exponent(p: Fraction) -> str:
    if p.denominator == 1 and p >= 0:
        return str(p.numerator)
    return f"({p})"


def to_text(e: Expr) -> str:
    """Render with the fewest parentheses that reparse to the same tree."""
    if isinstance(e, Num):
        return _fmt_number(e.value)
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        return "-" + (f"({inner})" if _prec(e.operand) < 3 else inner)
    if isinstance(e, Pow):
        base = to_text(e.base)
        if _prec(e.base) < 5:
            base = f"({base})"
        return f"{base}^{_fmt_exponent(e.exponent)}"
    p = _PREC[e.op]
    left = to_text(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = to_text(e.right)
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def free_variables(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, (Neg,)):
        return free_variables(e.operand)
    if isinstance(e, Call):
        return free_variables(e.arg)
    if isinstance(e, Pow):
        return free_variables(e.base)
    if isinstance(e, BinOp):
        return free_variables(e.left) | free_variables(e.right)
    return frozenset()


# -- evaluation -------------------------------------------------------------------

_FUNCS = {"sin": jets.sin, "cos": jets.cos, "sqrt": jets.sqrt,
          "atan": jets.atan, "exp": jets.exp}


def evaluate(e: Expr, env: dict):
    """Evaluate over numbers, arrays or jets bound in ``env``."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise KeyError(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Neg):
        return -evaluate(e.operand, env)
    if isinstance(e, Call):
        return _FUNCS[e.func](evaluate(e.arg, env))
    if isinstance(e, Pow):
        return jets.power(evaluate(e.base, env), e.exponent)
    left = evaluate(e.left, env)
    right = evaluate(e.right, env)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    if not jets.is_jet(right) and np.any(np.asarray(right) == 0.0):
        raise DomainError(f"division by zero (operator at position {e.span[0]})")
    try:
        return left / right
    except DomainError as exc:
        raise DomainError(f"{exc} (operator at position {e.span[0]})") from None


# -- surface files ----------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceSpec:
    name: str
    components: tuple  # four Expr
    domain: tuple  # (x_min, x_max, y_min, y_max)
    periodic: tuple = (False, False)


def _parse_bool(word: str, line: int) -> bool:
    w = word.lower()
    if w in ("true", "yes", "1"):
        return True
    if w in ("false", "no", "0"):
        return False
    raise SurfaceFileError(f"expected true/false, got {word!r}", line)


def parse_surface_text(text: str) -> SurfaceSpec:
    """Read the ``key = value`` surface format (LF or CRLF line endings)."""
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SurfaceFileError("expected 'key = value'", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in fields:
            raise SurfaceFileError(f"duplicate key {key!r}", lineno)
        fields[key] = (value, lineno)

    missing = [k for k in ("name", "f1", "f2", "f3", "f4", "domain") if k not in fields]
    if missing:
        raise SurfaceFileError("missing keys: " + ", ".join(missing), 0)
    unknown = set(fields) - {"name", "f1", "f2", "f3", "f4", "domain", "periodic"}
    if unknown:
        key = sorted(unknown)[0]
        raise SurfaceFileError(f"unknown key {key!r}", fields[key][1])

    name, line = fields["name"]
    if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9\-]*", name):
        raise SurfaceFileError(f"invalid name {name!r}", line)

    comps = []
    for k in ("f1", "f2", "f3", "f4"):
        value, line = fields[k]
        try:
            comps.append(parse(value))
        except ExprSyntaxError as exc:
            raise SurfaceFileError(f"{k}: {exc}", line) from None

    value, line = fields["domain"]
    parts = value.split()
    if len(parts) != 4:
        raise SurfaceFileError("domain needs four numbers", line)
    try:
        dom = tuple(float(evaluate(parse(p), {})) for p in parts)
    except (ExprSyntaxError, KeyError, ValueError):
        raise SurfaceFileError("domain entries must be numeric", line) from None
    if not (dom[0] < dom[1] and dom[2] < dom[3]):
        raise SurfaceFileError("domain box is empty", line)

    periodic = (False, False)
    if "periodic" in fields:
        value, line = fields["periodic"]
        words = value.split()
        if len(words) != 2:
            raise SurfaceFileError("periodic needs two flags", line)
        periodic = (_parse_bool(words[0], line), _parse_bool(words[1], line))
    return SurfaceSpec(name, tuple(comps), dom, periodic)
