"""Symbolic expressions over jet variables ``t, x, D1x, D2x, ..., z``.

Expressions are immutable trees of frozen dataclasses.  Two evaluation routes
exist: :func:`evaluate` walks the tree and :func:`compile_expr` turns it into a
plain Python function for the integrators.  Both perform the same floating
point operations in the same order, so they agree bit for bit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

from .errors import (
    DomainError,
    EvalOverflow,
    ExprSyntaxError,
    MissingDerivative,
    UnknownIdentifier,
)

__all__ = [
    "VarId", "T", "Z", "xd",
    "Expr", "Const", "Var", "Add", "Sub", "Mul", "Div", "Neg", "Pow", "Call",
    "Jet", "FUNCTIONS",
    "parse", "unparse", "evaluate", "compile_expr", "partial",
    "total_derivative", "simplify", "max_jet_order", "variables",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


@dataclass(frozen=True, order=True)
class VarId:
    kind: str  # "t", "x" or "z"
    order: int = 0

    @property
    def name(self) -> str:
        if self.kind == "x":
            return "x" if self.order == 0 else f"D{self.order}x"
        return self.kind


T = VarId("t")
Z = VarId("z")


def xd(k: int) -> VarId:
    """The jet variable holding the k-th derivative of x."""
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    return VarId("x", k)


class Expr:
    """Base class of expression nodes; supports ``+ - * / **`` with numbers."""

    __slots__ = ()

    def __add__(self, other):
        return Add(self, _coerce(other))

    def __radd__(self, other):
        return Add(_coerce(other), self)

    def __sub__(self, other):
        return Sub(self, _coerce(other))

    def __rsub__(self, other):
        return Sub(_coerce(other), self)

    def __mul__(self, other):
        return Mul(self, _coerce(other))

    def __rmul__(self, other):
        return Mul(_coerce(other), self)

    def __truediv__(self, other):
        return Div(self, _coerce(other))

    def __rtruediv__(self, other):
        return Div(_coerce(other), self)

    def __pow__(self, other):
        return Pow(self, _coerce(other))

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        return unparse(self)


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)):
        return Const(float(value))
    raise TypeError(f"cannot use {type(value).__name__} in an expression")


@dataclass(frozen=True, eq=True, repr=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    var: VarId


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr

    def __post_init__(self):
        if self.fn not in FUNCTIONS:
            raise ValueError(f"unsupported function {self.fn!r}")


_BINARY = (Add, Sub, Mul, Div)

ZERO = Const(0.0)
ONE = Const(1.0)


@dataclass(frozen=True)
class Jet:
    """A point ``(t, x, x', ..., x^(m), z)`` at which expressions are evaluated."""

    t: float
    x_derivs: tuple
    z: float

    def __post_init__(self):
        object.__setattr__(self, "x_derivs", tuple(float(v) for v in self.x_derivs))

    @property
    def order(self) -> int:
        return len(self.x_derivs) - 1

    def value(self, var: VarId) -> float:
        if var.kind == "t":
            return self.t
        if var.kind == "z":
            return self.z
        if var.order >= len(self.x_derivs):
            raise MissingDerivative(var.order, self.order)
        return self.x_derivs[var.order]


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)
_DERIV_RE = re.compile(r"D([1-9])x")


@dataclass
class _Token:
    kind: str  # number, ident, op, end
    text: str
    pos: int  # character index


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = self._tokenize(text)
        self.i = 0

    def _offset(self, pos: int) -> int:
        return len(self.text[:pos].encode("utf-8"))

    def _tokenize(self, text: str):
        tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ExprSyntaxError(
                    f"unexpected character {text[pos]!r}", self._offset(pos),
                    {"number", "identifier", "operator", "'('"},
                )
            kind = m.lastgroup
            if kind != "ws":
                tokens.append(_Token(kind, m.group(), pos))
            pos = m.end()
        tokens.append(_Token("end", "", len(text)))
        return tokens

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, expected):
        tok = self.tok
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"unexpected {what}", self._offset(tok.pos), expected)

    def expect(self, text: str):
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return
        self.error({repr(text)})

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.error({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            right = self.term()
            e = Add(e, right) if op == "+" else Sub(e, right)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            right = self.unary()
            e = Mul(e, right) if op == "*" else Div(e, right)
        return e

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.i += 1
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.i += 1
            return Const(float(tok.text))
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if name == "t":
                return Var(T)
            if name == "z":
                return Var(Z)
            if name == "x":
                return Var(xd(0))
            m = _DERIV_RE.fullmatch(name)
            if m:
                return Var(xd(int(m.group(1))))
            raise UnknownIdentifier(name, self._offset(tok.pos))
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        self.error({"number", "variable", "function call", "'('", "'-'"})


def parse(text: str) -> Expr:
    """Parse expression text into a tree.

    ``^`` binds tightest and is right-associative, then unary minus, then
    ``* /``, then ``+ -`` (both left-associative).
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing

_SUM, _PROD, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/"}
_PREC = {Add: _SUM, Sub: _SUM, Mul: _PROD, Div: _PROD}


def _format_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, Const):
        v = e.value
        if v < 0 or (v == 0 and math.copysign(1.0, v) < 0):
            return "-" + _format_number(-v), _UNARY
        return _format_number(v), _ATOM
    if isinstance(e, Var):
        return e.var.name, _ATOM
    if isinstance(e, _BINARY):
        prec = _PREC[type(e)]
        ls, lp = _render(e.left)
        rs, rp = _render(e.right)
        if lp < prec:
            ls = f"({ls})"
        if rp <= prec:
            rs = f"({rs})"
        return f"{ls} {_SYMBOL[type(e)]} {rs}", prec
    if isinstance(e, Neg):
        s, p = _render(e.arg)
        if p < _UNARY:
            s = f"({s})"
        return "-" + s, _UNARY
    if isinstance(e, Pow):
        bs, bp = _render(e.base)
        es, ep = _render(e.exponent)
        if bp <= _POW:
            bs = f"({bs})"
        if ep < _UNARY:
            es = f"({es})"
        return f"{bs}^{es}", _POW
    if isinstance(e, Call):
        return f"{e.fn}({_render(e.arg)[0]})", _ATOM
    raise TypeError(f"not an expression: {e!r}")


def unparse(e: Expr) -> str:
    """Canonical text with minimal parentheses; reparses to the same tree."""
    return _render(e)[0]


# ---------------------------------------------------------------------------
# evaluation

def _rpow(base: float, p: float) -> float:
    if p.is_integer():
        if base == 0.0 and p < 0:
            raise ZeroDivisionError("0 to a negative power")
        return base ** int(p)
    if base < 0.0:
        raise ValueError("negative base with non-integer exponent")
    return math.pow(base, p)


def _int_exponent(e: Expr):
    if isinstance(e, Const) and e.value.is_integer() and abs(e.value) < 2**31:
        return int(e.value)
    return None


def _eval(e: Expr, p: Jet) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return p.value(e.var)
    if isinstance(e, Add):
        return _eval(e.left, p) + _eval(e.right, p)
    if isinstance(e, Sub):
        return _eval(e.left, p) - _eval(e.right, p)
    if isinstance(e, Mul):
        return _eval(e.left, p) * _eval(e.right, p)
    if isinstance(e, Div):
        return _eval(e.left, p) / _eval(e.right, p)
    if isinstance(e, Neg):
        return -_eval(e.arg, p)
    if isinstance(e, Pow):
        k = _int_exponent(e.exponent)
        base = _eval(e.base, p)
        if k is not None:
            return base ** k
        return _rpow(base, _eval(e.exponent, p))
    if isinstance(e, Call):
        return getattr(math, e.fn)(_eval(e.arg, p))
    raise TypeError(f"not an expression: {e!r}")


def evaluate(e: Expr, p: Jet) -> float:
    """Value of ``e`` at the jet ``p``.

    Raises DomainError for log/sqrt outside their domain or division by zero,
    EvalOverflow on overflow and MissingDerivative if the jet is too short.
    """
    need = max_jet_order(e)
    if need > p.order:
        raise MissingDerivative(need, p.order)
    try:
        return _eval(e, p)
    except ZeroDivisionError as exc:
        raise DomainError(f"division by zero: {exc}") from None
    except OverflowError as exc:
        raise EvalOverflow(f"overflow: {exc}") from None
    except ValueError as exc:
        raise DomainError(str(exc)) from None


def _source(e: Expr) -> str:
    if isinstance(e, Const):
        return f"({e.value!r})"
    if isinstance(e, Var):
        v = e.var
        if v.kind == "t":
            return "t"
        if v.kind == "z":
            return "z"
        return f"X[{v.order}]"
    if isinstance(e, _BINARY):
        return f"({_source(e.left)} {_SYMBOL[type(e)]} {_source(e.right)})"
    if isinstance(e, Neg):
        return f"(-{_source(e.arg)})"
    if isinstance(e, Pow):
        k = _int_exponent(e.exponent)
        if k is not None:
            return f"({_source(e.base)} ** {k})"
        return f"_rpow({_source(e.base)}, {_source(e.exponent)})"
    if isinstance(e, Call):
        return f"_{e.fn}({_source(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")


_TEMPLATE = """\
def _compiled(t, X, z):
    try:
        return {body}
    except ZeroDivisionError as exc:
        raise DomainError("division by zero: " + str(exc)) from None
    except OverflowError as exc:
        raise EvalOverflow("overflow: " + str(exc)) from None
    except ValueError as exc:
        raise DomainError(str(exc)) from None
"""


@lru_cache(maxsize=512)
def compile_expr(e: Expr) -> Callable[[float, Sequence[float], float], float]:
    """Compile ``e`` into ``f(t, X, z)`` where ``X[k]`` is the k-th derivative of x.

    ``X`` must hold Python floats (not numpy scalars) so that division by zero
    raises instead of silently producing inf.
    """
    namespace = {
        "_rpow": _rpow,
        "DomainError": DomainError,
        "EvalOverflow": EvalOverflow,
        **{f"_{fn}": getattr(math, fn) for fn in FUNCTIONS},
    }
    exec(_TEMPLATE.format(body=_source(e)), namespace)
    return namespace["_compiled"]


# ---------------------------------------------------------------------------
# structure queries

def variables(e: Expr) -> set:
    if isinstance(e, Const):
        return set()
    if isinstance(e, Var):
        return {e.var}
    if isinstance(e, _BINARY):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Neg):
        return variables(e.arg)
    if isinstance(e, Pow):
        return variables(e.base) | variables(e.exponent)
    if isinstance(e, Call):
        return variables(e.arg)
    raise TypeError(f"not an expression: {e!r}")


def max_jet_order(e: Expr) -> int:
    """Largest k such that ``Dkx`` occurs in ``e`` (0 if none)."""
    return max((v.order for v in variables(e) if v.kind == "x"), default=0)


# ---------------------------------------------------------------------------
# simplification

def _fold(fn, *args):
    try:
        v = fn(*args)
    except (ArithmeticError, ValueError):
        return None
    if isinstance(v, complex) or not math.isfinite(v):
        return None
    return Const(float(v))


def _is(e: Expr, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def _negative_const(e: Expr) -> bool:
    return isinstance(e, Const) and e.value < 0


def _add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(lambda u, v: u + v, a.value, b.value)
        if folded is not None:
            return folded
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(b, Neg) or _negative_const(b):
        return _sub(a, _neg(b))
    if isinstance(a, Neg) or _negative_const(a):
        return _sub(b, _neg(a))
    return Add(a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(lambda u, v: u - v, a.value, b.value)
        if folded is not None:
            return folded
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return _neg(b)
    if isinstance(b, Neg) or _negative_const(b):
        return _add(a, _neg(b))
    if isinstance(a, Neg) or _negative_const(a):
        return _neg(_add(_neg(a), b))
    return Sub(a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(lambda u, v: u * v, a.value, b.value)
        if folded is not None:
            return folded
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if isinstance(a, Neg) or _negative_const(a):
        return _neg(_mul(_neg(a), b))
    if isinstance(b, Neg) or _negative_const(b):
        return _neg(_mul(a, _neg(b)))
    return Mul(a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(lambda u, v: u / v, a.value, b.value)
        if folded is not None:
            return folded
    if _is(b, 1.0):
        return a
    if isinstance(a, Neg) or _negative_const(a):
        return _neg(_div(_neg(a), b))
    if isinstance(b, Neg) or _negative_const(b):
        return _neg(_div(a, _neg(b)))
    return Div(a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    if isinstance(a, Sub):
        return Sub(a.right, a.left)
    return Neg(a)


def _pow(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(_rpow, a.value, b.value)
        if folded is not None:
            return folded
    if _is(b, 1.0):
        return a
    if _is(b, 0.0):
        return ONE
    return Pow(a, b)


def _call(fn: str, a: Expr) -> Expr:
    if isinstance(a, Const):
        folded = _fold(getattr(math, fn), a.value)
        if folded is not None:
            return folded
    return Call(fn, a)


_BUILD = {Add: _add, Sub: _sub, Mul: _mul, Div: _div}


def simplify(e: Expr) -> Expr:
    """Apply local value-preserving rewrites bottom-up until nothing changes.

    Rules: constant folding, ``0*e -> 0``, ``0+e -> e``, ``e-0 -> e``,
    ``1*e -> e``, ``e/1 -> e``, ``e^1 -> e``, ``e^0 -> 1``, ``-(-e) -> e``,
    plus sign normalisation (``a + -b -> a - b``, ``-a * b -> -(a * b)``,
    ``-(a - b) -> b - a`` and friends).  Negation commutes exactly with IEEE
    rounding, so the sign rules change no value.  Every rule builds on already
    simplified children, so one pass reaches the fixed point.
    """
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, _BINARY):
        return _BUILD[type(e)](simplify(e.left), simplify(e.right))
    if isinstance(e, Neg):
        return _neg(simplify(e.arg))
    if isinstance(e, Pow):
        return _pow(simplify(e.base), simplify(e.exponent))
    if isinstance(e, Call):
        return _call(e.fn, simplify(e.arg))
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# differentiation

def _d(e: Expr, v: VarId) -> Expr:
    # children of e are simplified; results are built with the simplifying constructors
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.var == v else ZERO
    if isinstance(e, Add):
        return _add(_d(e.left, v), _d(e.right, v))
    if isinstance(e, Sub):
        return _sub(_d(e.left, v), _d(e.right, v))
    if isinstance(e, Mul):
        return _add(_mul(_d(e.left, v), e.right), _mul(e.left, _d(e.right, v)))
    if isinstance(e, Div):
        num = _sub(_mul(_d(e.left, v), e.right), _mul(e.left, _d(e.right, v)))
        if _is(num, 0.0):
            return ZERO
        return _div(num, _pow(e.right, Const(2.0)))
    if isinstance(e, Neg):
        return _neg(_d(e.arg, v))
    if isinstance(e, Pow):
        du = _d(e.base, v)
        if not variables(e.exponent):
            # power rule for an exponent that does not depend on the jet
            return _mul(_mul(e.exponent, _pow(e.base, _sub(e.exponent, ONE))), du)
        dp = _d(e.exponent, v)
        inner = _add(
            _mul(dp, _call("log", e.base)),
            _div(_mul(e.exponent, du), e.base),
        )
        return _mul(e, inner)
    if isinstance(e, Call):
        du = _d(e.arg, v)
        if _is(du, 0.0):
            return ZERO
        u = e.arg
        if e.fn == "exp":
            outer = e
        elif e.fn == "log":
            return _div(du, u)
        elif e.fn == "sin":
            outer = _call("cos", u)
        elif e.fn == "cos":
            outer = _neg(_call("sin", u))
        else:  # sqrt
            return _div(du, _mul(Const(2.0), e))
        return _mul(outer, du)
    raise TypeError(f"not an expression: {e!r}")


def partial(e: Expr, v: VarId) -> Expr:
    """Exact partial derivative of ``e`` with respect to the jet variable ``v``."""
    return _d(simplify(e), v)


def total_derivative(e: Expr, lagrangian: Expr, n: int | None = None) -> Expr:
    """d/dt of ``e`` along a jet, with the time derivative of z replaced by the Lagrangian.

    Returns ``de/dt + sum_k de/dDkx * D(k+1)x + de/dz * L``.  ``n`` is the
    problem order; it is accepted for symmetry with the other derivations and
    not otherwise needed.
    """
    e = simplify(e)
    lagrangian = simplify(lagrangian)
    result = _d(e, T)
    orders = sorted(v.order for v in variables(e) if v.kind == "x")
    for k in orders:
        result = _add(result, _mul(_d(e, xd(k)), Var(xd(k + 1))))
    if Z in variables(e):
        result = _add(result, _mul(_d(e, Z), lagrangian))
    return result
