"""Necessary optimality conditions for higher-order Herglotz problems.

With ``lam(t) = exp(-int_a^t dL/dz)`` the Euler-Lagrange equation reads
``sum_j (-1)^j (d/dt)^j (lam * dL/dx^(j)) = 0``.  Because
``d/dt (lam * F) = lam * (F' + mu * F)`` with ``mu = -dL/dz`` and ``lam > 0``,
everything here is derived in the lam-free form built from the operator
``D_mu F = F' + mu * F``.  The zero sets coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MissingDerivative, NoConvergence, OrderMismatch, SingularEL
from .expr import (
    Expr,
    Jet,
    Z,
    compile_expr,
    max_jet_order,
    partial,
    simplify,
    total_derivative,
    xd,
)

_EPS = float(np.finfo(float).eps)

__all__ = [
    "mu_expression", "d_mu", "el_expression", "nbc_expression",
    "OptimalitySystem", "derive", "residual_stats", "solve_highest_derivative",
    "HighestDerivativeSolver",
]


def mu_expression(lagrangian: Expr) -> Expr:
    """``mu = -dL/dz``, the logarithmic derivative of the integrating factor."""
    return simplify(-partial(lagrangian, Z))


def d_mu(F: Expr, lagrangian: Expr, n: int) -> Expr:
    """``D_mu F = dF/dt + mu * F`` (total derivative with ``z' = L``)."""
    mu = mu_expression(lagrangian)
    return simplify(total_derivative(F, lagrangian, n) + mu * F)


def _alternating(terms: list, lagrangian: Expr, n: int) -> Expr:
    # sum_j (-1)^j D_mu^j terms[j], evaluated Horner style:
    # P0 - D(P1 - D(P2 - ...))
    acc = terms[-1]
    for term in reversed(terms[:-1]):
        acc = simplify(term - d_mu(acc, lagrangian, n))
    return simplify(acc)


def _check_order(lagrangian: Expr, n: int):
    if n < 1:
        raise OrderMismatch(f"problem order must be >= 1, got {n}")
    if max_jet_order(lagrangian) > n:
        raise OrderMismatch(
            f"Lagrangian uses D{max_jet_order(lagrangian)}x but the problem order is {n}"
        )


def el_expression(lagrangian: Expr, n: int) -> Expr:
    """Euler-Lagrange residual ``sum_{j=0}^n (-1)^j D_mu^j (dL/dx^(j))``."""
    _check_order(lagrangian, n)
    terms = [partial(lagrangian, xd(j)) for j in range(n + 1)]
    return _alternating(terms, lagrangian, n)


def nbc_expression(lagrangian: Expr, n: int, k: int, endpoint: str = "b") -> Expr:
    """Natural boundary residual for a free ``x^(k)`` at ``endpoint``.

    ``sum_{j=1}^{n-k} (-1)^(j-1) D_mu^(j-1) (dL/dx^(k+j))``.  The expression is
    the same at both endpoints; ``endpoint`` only selects where it is evaluated.
    """
    _check_order(lagrangian, n)
    if endpoint not in ("a", "b"):
        raise ValueError(f"endpoint must be 'a' or 'b', got {endpoint!r}")
    if not 0 <= k <= n - 1:
        raise IndexError(f"boundary slot k={k} outside 0..{n - 1}")
    terms = [partial(lagrangian, xd(k + j)) for j in range(1, n - k + 1)]
    return _alternating(terms, lagrangian, n)


@dataclass(frozen=True)
class OptimalitySystem:
    n: int
    lagrangian: Expr
    mu: Expr
    el: Expr
    nbc_a: dict = field(default_factory=dict)
    nbc_b: dict = field(default_factory=dict)

    def nbc(self, endpoint: str) -> dict:
        return self.nbc_a if endpoint == "a" else self.nbc_b


def derive(lagrangian: Expr, n: int) -> OptimalitySystem:
    el = el_expression(lagrangian, n)
    nbc = {k: nbc_expression(lagrangian, n, k) for k in range(n)}
    return OptimalitySystem(
        n=n,
        lagrangian=lagrangian,
        mu=mu_expression(lagrangian),
        el=el,
        nbc_a=dict(nbc),
        nbc_b=dict(nbc),
    )


def residual_stats(system: OptimalitySystem, jets) -> dict:
    """Euler-Lagrange residual magnitudes over a sequence of jets of order >= 2n.

    ``jets`` may be :class:`Jet` objects or anything with ``t``, ``x_derivs``
    and ``z`` (solutions expose :meth:`jets`).
    """
    f = compile_expr(system.el)
    need = 2 * system.n
    values = []
    for p in jets:
        if len(p.x_derivs) <= need:
            raise MissingDerivative(need, len(p.x_derivs) - 1)
        values.append(f(float(p.t), [float(v) for v in p.x_derivs], float(p.z)))
    per_point = np.asarray(values, dtype=float)
    if per_point.size == 0:
        return {"max_abs": 0.0, "rms": 0.0, "per_point": per_point}
    return {
        "max_abs": float(np.max(np.abs(per_point))),
        "rms": float(np.sqrt(np.mean(per_point**2))),
        "per_point": per_point,
    }


class HighestDerivativeSolver:
    """Solves ``el(t, x, ..., x^(2n-1), v, z) = 0`` for ``v = x^(2n)``.

    Scalar Newton with the exact symbolic derivative of the residual.  A
    point where the residual is independent of ``v`` and already zero is
    degenerate: the guess is returned unchanged and ``degenerate_steps`` is
    incremented.
    """

    max_iters = 50
    coef_floor = 1e-12

    def __init__(self, el: Expr, n: int):
        self.n = n
        self.top = 2 * n
        self.el = el
        self.del_dv = simplify(partial(el, xd(self.top)))
        self._f = compile_expr(el)
        self._df = compile_expr(self.del_dv)
        self.degenerate_steps = 0

    def __call__(self, t: float, X: list, z: float, guess: float) -> float:
        # X holds x^(0..2n-1); one slot is appended for the unknown and removed again
        f, df = self._f, self._df
        v = float(guess)
        X.append(v)
        try:
            r = f(t, X, z)
            tol = 1e-12 * max(1.0, abs(r))
            if abs(r) <= tol:
                if not abs(df(t, X, z)) >= self.coef_floor:
                    self.degenerate_steps += 1
                return v
            for _ in range(self.max_iters):
                c = df(t, X, z)
                if not abs(c) >= self.coef_floor:
                    raise SingularEL(f"d(el)/d(D{self.top}x) = {c:.3g} at t = {t:.6g}")
                step = r / c
                v -= step
                X[-1] = v
                r = f(t, X, z)
                if abs(r) <= tol or abs(step) <= 4 * _EPS * max(1.0, abs(v)):
                    return v
            raise NoConvergence(f"highest-derivative Newton stalled at t = {t:.6g}")
        finally:
            X.pop()


def solve_highest_derivative(el: Expr, partial_jet: Jet, guess: float, n: int | None = None) -> float:
    """Value of ``x^(2n)`` that zeroes ``el`` at a jet carrying ``x^(0..2n-1)``."""
    if n is None:
        n = (len(partial_jet.x_derivs)) // 2
    X = list(partial_jet.x_derivs)
    if len(X) != 2 * n:
        raise ValueError(f"partial jet must carry x^(0..{2 * n - 1}), got {len(X)} values")
    return HighestDerivativeSolver(el, n)(partial_jet.t, X, partial_jet.z, guess)
