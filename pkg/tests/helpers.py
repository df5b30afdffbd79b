"""Shared test utilities: random jets, random well-behaved expressions, oracles."""

from __future__ import annotations

import math

import numpy as np

from herglotz.expr import (
    Z,
    Add,
    Call,
    Const,
    Div,
    Expr,
    Jet,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    evaluate,
    parse,
    partial,
    total_derivative,
    xd,
)


def rel_err(a: float, b: float) -> float:
    """|a - b| relative to max(1, |a|, |b|)."""
    return abs(a - b) / max(1.0, abs(a), abs(b))


def random_jet(rng: np.random.Generator, order: int, scale: float = 1.0) -> Jet:
    xs = rng.uniform(-scale, scale, order + 1)
    return Jet(float(rng.uniform(-scale, scale)), tuple(xs), float(rng.uniform(-scale, scale)))


def random_expr(rng: np.random.Generator, names: list, depth: int = 3) -> Expr:
    """A random expression that is smooth and finite on jets with entries in [-1, 1].

    Divisions, logs, square roots and real powers are only applied to
    arguments bounded away from zero.
    """
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.25:
            return Const(float(np.round(rng.uniform(-3, 3), 2)))
        return parse(names[rng.integers(len(names))])
    kind = rng.integers(10)
    a = random_expr(rng, names, depth - 1)
    if kind < 5:
        b = random_expr(rng, names, depth - 1)
        return [Add, Sub, Mul, Mul, Add][kind](a, b)
    if kind == 5:
        b = random_expr(rng, names, depth - 1)
        return Div(a, Add(Const(2.0), Call("cos", b)))
    if kind == 6:
        return Pow(a, Const(float(rng.integers(0, 4))))
    if kind == 7:
        fn = ["exp", "sin", "cos"][rng.integers(3)]
        return Call(fn, Mul(Const(0.5), a) if fn == "exp" else a)
    if kind == 8:
        guarded = Add(Const(1.0), Pow(a, Const(2.0)))
        choice = rng.integers(3)
        if choice == 0:
            return Call("log", guarded)
        if choice == 1:
            return Call("sqrt", guarded)
        return Pow(guarded, Const(0.5 + float(rng.integers(3)) * 0.25))
    return Neg(a)


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace variables by expressions (keys are VarId)."""
    if isinstance(e, Var):
        return mapping.get(e.var, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, Call):
        return Call(e.fn, substitute(e.arg, mapping))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, mapping), substitute(e.exponent, mapping))
    return type(e)(substitute(e.left, mapping), substitute(e.right, mapping))


def central_fd(f, x: float, rel_step: float = 1e-6) -> float:
    h = rel_step * max(1.0, abs(x))
    return (f(x + h) - f(x - h)) / (2 * h)


def jet_with(p: Jet, var, value: float) -> Jet:
    if var.kind == "t":
        return Jet(value, p.x_derivs, p.z)
    if var.kind == "z":
        return Jet(p.t, p.x_derivs, value)
    xs = list(p.x_derivs)
    xs[var.order] = value
    return Jet(p.t, tuple(xs), p.z)


# A fixed analytic test trajectory: x(t) = sin(t) + 0.5 t^2 + 0.3 t, Z(t) = exp(0.3 t) + 0.5 cos(t)

def traj_x(k: int, t: float) -> float:
    trig = [math.sin, math.cos, lambda s: -math.sin(s), lambda s: -math.cos(s)][k % 4](t)
    poly = [0.5 * t * t + 0.3 * t, t + 0.3, 1.0][k] if k <= 2 else 0.0
    return trig + poly


def traj_x_expr(k: int) -> Expr:
    trig = ["sin(t)", "cos(t)", "-sin(t)", "-cos(t)"][k % 4]
    poly = ["0.5 * t^2 + 0.3 * t", "t + 0.3", "1"][k] if k <= 2 else "0"
    return parse(f"{trig} + {poly}")


def traj_z(t: float) -> float:
    return math.exp(0.3 * t) + 0.5 * math.cos(t)


TRAJ_Z_EXPR = parse("exp(0.3 * t) + 0.5 * cos(t)")
TRAJ_ZDOT_EXPR = parse("0.3 * exp(0.3 * t) - 0.5 * sin(t)")


def traj_jet(t: float, order: int) -> Jet:
    return Jet(t, tuple(traj_x(k, t) for k in range(order + 1)), traj_z(t))


def lagrangian_along_traj(E: Expr, n: int) -> Expr:
    """``E - E(t, X(t), Z(t)) + Z'(t)``: equals ``Z'`` along the test trajectory.

    Its partials in the jet variables are those of ``E``, so ``z' = L`` holds on
    the trajectory while ``dL/dz`` stays nontrivial.
    """
    mapping = {xd(k): traj_x_expr(k) for k in range(n + 1)}
    mapping[parse("z").var] = TRAJ_Z_EXPR
    return Add(Sub(E, substitute(E, mapping)), TRAJ_ZDOT_EXPR)


# One case per differentiation rule.
RULE_CASES = [
    "t + z", "t - D1x", "x * z", "x / (2 + cos(z))", "-D2x", "z^3", "D1x^0", "(1 + x^2)^0.75",
    "(2 + sin(t))^(z + x)", "exp(z * x)", "log(1 + t^2)", "sin(D1x)", "cos(x * t)",
    "sqrt(1 + z^2)", "3",
]


# Expanded optimality conditions, assembled from partial and total derivatives only.

def expanded_n1(L: Expr) -> Expr:
    """``L_x + L_z L_x' - d/dt L_x'``."""
    Lx, Lv, Lz = partial(L, xd(0)), partial(L, xd(1)), partial(L, Z)
    return Sub(Add(Lx, Mul(Lz, Lv)), total_derivative(Lv, L, 1))


def expanded_n2(L: Expr) -> Expr:
    """``L_x + L_z L_x' - (L_x')' + L_z^2 L_x'' - 2 L_z (L_x'')' - (L_z)' L_x'' + (L_x'')''``."""
    Lx, L1, L2, Lz = partial(L, xd(0)), partial(L, xd(1)), partial(L, xd(2)), partial(L, Z)
    dt = lambda e: total_derivative(e, L, 2)  # noqa: E731
    terms = [
        Lx,
        Mul(Lz, L1),
        Neg(dt(L1)),
        Mul(Mul(Lz, Lz), L2),
        Neg(Mul(Mul(Const(2.0), Lz), dt(L2))),
        Neg(Mul(dt(Lz), L2)),
        dt(dt(L2)),
    ]
    out = terms[0]
    for term in terms[1:]:
        out = Add(out, term)
    return out


def classical_el(L: Expr, n: int) -> Expr:
    """``sum_j (-1)^j d^j/dt^j L_{x^(j)}`` for z-free ``L``."""
    out = Const(0.0)
    for j in range(n + 1):
        term = partial(L, xd(j))
        for _ in range(j):
            term = total_derivative(term, L, n)
        out = Add(out, term if j % 2 == 0 else Neg(term))
    return out


def max_rel_err_on_jets(e1: Expr, e2: Expr, order: int, count: int = 100, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        p = random_jet(rng, order)
        worst = max(worst, rel_err(evaluate(e1, p), evaluate(e2, p)))
    return worst


ACCEPTANCE: list = []


def record(number: int, title: str, ok: bool, detail: str) -> None:
    """Log one acceptance line (shown in the terminal summary) and print it."""
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    ACCEPTANCE.append(line)
    print(line)
