"""Evaluate the Herglotz functional along a given trajectory.

``z' = L(t, x(t), ..., x^(n)(t), z)`` is integrated from ``z(a) = gamma`` with
classical fixed-step RK4.  The integrating factor ``lam' = mu * lam`` with
``mu = -dL/dz`` is advanced in the same RK4 step so that its stages see the
matching intermediate z values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BlowUp, EvalOverflow
from .expr import compile_expr
from .optimality import mu_expression
from .trajectory import Trajectory

__all__ = [
    "ZPath", "LambdaPath", "BLOWUP_THRESHOLD", "DEFAULT_STEPS",
    "integrate_z", "lambda_path", "objective", "step_grid", "herglotz_rk4",
]

BLOWUP_THRESHOLD = 1e8
DEFAULT_STEPS = 1000


@dataclass(frozen=True, eq=False)
class ZPath:
    grid: np.ndarray
    z_values: np.ndarray

    @property
    def z_b(self) -> float:
        return float(self.z_values[-1])


@dataclass(frozen=True, eq=False)
class LambdaPath:
    grid: np.ndarray
    lambda_values: np.ndarray


def step_grid(a: float, b: float, steps: int) -> tuple[np.ndarray, float]:
    """Nodes ``a + i*h`` (last one pinned to ``b``) and the step ``h = (b - a) / steps``."""
    if steps < 10:
        raise ValueError(f"steps must be >= 10, got {steps}")
    h = (b - a) / steps
    grid = a + h * np.arange(steps + 1)
    grid[-1] = b
    return grid, h


def herglotz_rk4(f_L, f_mu, grid, h, X_nodes, X_mids, gamma, with_lambda=False):
    """Core RK4 loop over precomputed x-derivative lists.

    ``X_nodes[i]`` / ``X_mids[i]`` hold ``[x, x', ...]`` (Python floats) at
    ``grid[i]`` and ``grid[i] + h/2``.  Returns ``(z, lam)`` arrays; ``lam`` is
    None unless requested.
    """
    steps = len(grid) - 1
    z_out = np.empty(steps + 1)
    lam_out = np.empty(steps + 1) if with_lambda else None
    z = float(gamma)
    lam = 1.0
    z_out[0] = z
    if with_lambda:
        lam_out[0] = lam
    half = 0.5 * h
    sixth = h / 6.0
    t_list = grid.tolist()
    for i in range(steps):
        t0 = t_list[i]
        tm = t0 + half
        t1 = t_list[i + 1]
        X0, Xm, X1 = X_nodes[i], X_mids[i], X_nodes[i + 1]
        try:
            k1 = f_L(t0, X0, z)
            z2 = z + half * k1
            k2 = f_L(tm, Xm, z2)
            z3 = z + half * k2
            k3 = f_L(tm, Xm, z3)
            z4 = z + h * k3
            k4 = f_L(t1, X1, z4)
            z_new = z + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if with_lambda:
                l1 = f_mu(t0, X0, z) * lam
                l2 = f_mu(tm, Xm, z2) * (lam + half * l1)
                l3 = f_mu(tm, Xm, z3) * (lam + half * l2)
                l4 = f_mu(t1, X1, z4) * (lam + h * l3)
                lam = lam + sixth * (l1 + 2.0 * l2 + 2.0 * l3 + l4)
        except (EvalOverflow, OverflowError):
            raise BlowUp(t1, math.inf) from None
        if not abs(z_new) <= BLOWUP_THRESHOLD:
            raise BlowUp(t1, z_new)
        z = z_new
        z_out[i + 1] = z
        if with_lambda:
            if not math.isfinite(lam):
                raise BlowUp(t1, lam)
            lam_out[i + 1] = lam
    return z_out, lam_out


def _sample(problem, x: Trajectory, steps: int):
    grid, h = step_grid(problem.a, problem.b, steps)
    nodes = x.derivs(grid, problem.n).T.tolist()
    mids = x.derivs(grid[:-1] + 0.5 * h, problem.n).T.tolist()
    return grid, h, nodes, mids


def _run(problem, x: Trajectory, steps: int, with_lambda: bool):
    grid, h, nodes, mids = _sample(problem, x, steps)
    f_L = compile_expr(problem.lagrangian)
    f_mu = compile_expr(mu_expression(problem.lagrangian))
    z, lam = herglotz_rk4(f_L, f_mu, grid, h, nodes, mids, problem.gamma, with_lambda)
    return grid, z, lam


def integrate_z(problem, x: Trajectory, steps: int = DEFAULT_STEPS) -> ZPath:
    """z along ``x`` on the RK4 step grid; raises BlowUp if |z| exceeds 1e8."""
    grid, z, _ = _run(problem, x, steps, with_lambda=False)
    return ZPath(grid, z)


def lambda_path(problem, x: Trajectory, zp: ZPath | None = None, steps: int | None = None) -> LambdaPath:
    """Integrating factor ``exp(-int_a^t dL/dz)`` along ``x``.

    ``zp`` fixes the grid; the z values are recomputed in lockstep (they are
    bit-identical to ``zp`` because z does not depend on lambda).
    """
    if steps is None:
        steps = DEFAULT_STEPS if zp is None else len(zp.grid) - 1
    grid, z, lam = _run(problem, x, steps, with_lambda=True)
    if zp is not None and (len(zp.grid) != len(grid) or not np.array_equal(zp.z_values, z)):
        raise ValueError("z path does not belong to this problem/trajectory/grid")
    return LambdaPath(grid, lam)


def objective(problem, x: Trajectory, steps: int = DEFAULT_STEPS) -> float:
    """``z(b)`` for the trajectory ``x`` (no goal sign applied)."""
    return integrate_z(problem, x, steps).z_b
