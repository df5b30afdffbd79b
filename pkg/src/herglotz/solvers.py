"""Indirect (shooting) and direct (Ritz) solvers for Herglotz problems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BlowUp,
    DomainError,
    EvalOverflow,
    IllPosedBoundary,
    NoConvergence,
    NoDescent,
)
from .expr import Jet, compile_expr
from .functional import (
    BLOWUP_THRESHOLD,
    DEFAULT_STEPS,
    LambdaPath,
    ZPath,
    herglotz_rk4,
    step_grid,
)
from .optimality import HighestDerivativeSolver, residual_stats
from .problem import Problem
from .trajectory import (
    SampledTrajectory,
    Trajectory,
    constrained_basis,
    derivative_vandermonde,
)

__all__ = [
    "ShootingOptions", "DirectOptions", "Solution",
    "solve_shooting", "solve_direct", "cross_validate", "certify",
]


@dataclass
class ShootingOptions:
    steps: int = DEFAULT_STEPS
    newton_tol: float = 1e-10
    max_newton_iters: int = 30
    fd_step: float = 1e-6
    initial_guess: tuple | None = None  # n values of x^(n..2n-1)(a); zeros if None

    def __post_init__(self):
        if self.steps < 10:
            raise ValueError("steps must be >= 10")
        if not (self.newton_tol > 0 and self.fd_step > 0 and self.max_newton_iters > 0):
            raise ValueError("tolerances and iteration limits must be positive")


@dataclass
class DirectOptions:
    degree: int | None = None  # defaults to 2n + 3
    steps: int = DEFAULT_STEPS
    grad_fd_step: float = 1e-6
    armijo_c: float = 1e-4
    max_iters: int = 500
    converge_tol: float = 1e-8
    min_step: float = 1e-14
    initial_params: tuple | None = None  # basis parameters; zeros if None

    def __post_init__(self):
        if self.steps < 10:
            raise ValueError("steps must be >= 10")
        if not (self.grad_fd_step > 0 and self.armijo_c > 0 and self.converge_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass(eq=False)
class Solution:
    problem: Problem
    method: str
    trajectory: Trajectory
    zpath: ZPath
    lambdapath: LambdaPath
    x_jets: np.ndarray  # shape (N, 2n + 1): x^(0..2n) on the grid
    iterations: int = 0
    el_max_abs: float = math.nan
    el_rms: float = math.nan
    el_per_point: np.ndarray = None
    nbc_residuals: dict = field(default_factory=dict)  # (endpoint, k) -> value, free slots
    bc_residuals: dict = field(default_factory=dict)  # (endpoint, k) -> value, fixed slots
    warnings: list = field(default_factory=list)
    unknowns: tuple = ()

    @property
    def grid(self) -> np.ndarray:
        return self.zpath.grid

    @property
    def z_b(self) -> float:
        return self.zpath.z_b

    def jets(self):
        for t, xs, z in zip(self.grid, self.x_jets, self.zpath.z_values):
            yield Jet(float(t), tuple(xs), float(z))


def certify(problem: Problem, grid, x_jets, z_values) -> dict:
    """Euler-Lagrange and boundary residuals of sampled data.

    ``x_jets[i]`` carries ``x^(0..2n)`` at ``grid[i]``.  Used by both solvers
    and by the CSV checker so every route reports the same quantities.
    """
    system = problem.system
    x_jets = np.asarray(x_jets, dtype=float)
    jets = [Jet(float(t), tuple(xs), float(z)) for t, xs, z in zip(grid, x_jets, z_values)]
    stats = residual_stats(system, jets)
    nbc, bc = {}, {}
    for end, jet in (("a", jets[0]), ("b", jets[-1])):
        fixed = problem.bc(end)
        for k in range(problem.n):
            if k in fixed:
                bc[(end, k)] = jet.x_derivs[k] - fixed[k]
            else:
                f = compile_expr(system.nbc(end)[k])
                nbc[(end, k)] = f(jet.t, list(jet.x_derivs), jet.z)
    return {
        "el_max_abs": stats["max_abs"],
        "el_rms": stats["rms"],
        "el_per_point": stats["per_point"],
        "nbc_residuals": nbc,
        "bc_residuals": bc,
    }


# ---------------------------------------------------------------------------
# shooting

class _Shooter:
    """Integrates the Euler-Lagrange ODE coupled with z' = L and lam' = mu*lam."""

    def __init__(self, problem: Problem, steps: int):
        self.problem = problem
        n = problem.n
        self.n = n
        self.m = 2 * n
        system = problem.system
        self.hd = HighestDerivativeSolver(system.el, n)
        self.f_L = compile_expr(problem.lagrangian)
        self.f_mu = compile_expr(system.mu)
        self.nbc_b = {k: compile_expr(system.nbc_b[k]) for k in range(n)}
        self.grid, self.h = step_grid(problem.a, problem.b, steps)

    def _rhs(self, t, y, guess):
        m = self.m
        X = y[:m]
        z = y[m]
        v = self.hd(t, X, z, guess)
        X.append(v)
        dz = self.f_L(t, X, z)
        dlam = self.f_mu(t, X, z) * y[m + 1]
        dy = X[1:]
        dy.append(dz)
        dy.append(dlam)
        return dy, v

    def run(self, unknowns, store=False):
        p = self.problem
        n, m = self.n, self.m
        y = [p.bc_a[k] for k in range(n)] + [float(u) for u in unknowns] + [p.gamma, 1.0]
        grid, h = self.grid, self.h
        half, sixth = 0.5 * h, h / 6.0
        t_list = grid.tolist()
        steps = len(grid) - 1
        states = np.empty((steps + 1, m + 3)) if store else None  # x^(0..2n), z, lam
        guess = 0.0
        rhs = self._rhs
        for i in range(steps):
            t0 = t_list[i]
            t1 = t_list[i + 1]
            tm = t0 + half
            try:
                k1, guess = rhs(t0, list(y), guess)
                if store:
                    states[i, :m] = y[:m]
                    states[i, m] = guess
                    states[i, m + 1:] = y[m:]
                k2, guess = rhs(tm, [a + half * b for a, b in zip(y, k1)], guess)
                k3, guess = rhs(tm, [a + half * b for a, b in zip(y, k2)], guess)
                k4, guess = rhs(t1, [a + h * b for a, b in zip(y, k3)], guess)
            except (OverflowError, EvalOverflow):
                raise BlowUp(t1, math.inf) from None
            y = [a + sixth * (b + 2.0 * c + 2.0 * d + e) for a, b, c, d, e in zip(y, k1, k2, k3, k4)]
            if not abs(y[m]) <= BLOWUP_THRESHOLD or not all(math.isfinite(v) for v in y):
                raise BlowUp(t1, y[m])
        v_end = self.hd(t_list[-1], y[:m], y[m], guess)
        if store:
            states[-1, :m] = y[:m]
            states[-1, m] = v_end
            states[-1, m + 1:] = y[m:]
        return y, v_end, states

    def residuals(self, y_end, v_end):
        p = self.problem
        m = self.m
        X = y_end[:m] + [v_end]
        t, z = p.b, y_end[m]
        out = []
        for k in range(self.n):
            if k in p.bc_b:
                out.append(X[k] - p.bc_b[k])
            else:
                out.append(self.nbc_b[k](t, X, z))
        return np.array(out)

    def shoot(self, unknowns):
        y_end, v_end, _ = self.run(unknowns)
        return self.residuals(y_end, v_end)


def _check_shooting_pattern(problem: Problem):
    missing_a = [k for k in range(problem.n) if k not in problem.bc_a]
    if missing_a:
        raise IllPosedBoundary(
            "shooting needs every x^(k)(a), k < n, fixed; free slots at a: "
            + ", ".join(f"D{k}x(a)" for k in missing_a)
            + " (use the direct method)"
        )


def solve_shooting(problem: Problem, opts: ShootingOptions | None = None) -> Solution:
    """Newton shooting on the unknown initial values x^(n)(a), ..., x^(2n-1)(a).

    Terminal residuals are ``x^(k)(b) - beta_k`` for fixed slots and the
    natural boundary expression for free ones.  The Jacobian is a forward
    difference; steps are halved until the residual norm decreases.
    """
    opts = opts or ShootingOptions()
    _check_shooting_pattern(problem)
    n = problem.n
    shooter = _Shooter(problem, opts.steps)
    u = np.zeros(n) if opts.initial_guess is None else np.asarray(opts.initial_guess, dtype=float)
    if u.shape != (n,):
        raise IllPosedBoundary(f"initial guess must have {n} entries, got {u.size}")
    warnings = []

    r = shooter.shoot(u)
    norm = float(np.linalg.norm(r))
    iters = 0
    while norm > opts.newton_tol:
        if iters >= opts.max_newton_iters:
            raise NoConvergence(
                f"shooting Newton did not converge in {iters} iterations (|r| = {norm:.3e})"
            )
        iters += 1
        J = np.empty((n, n))
        for i in range(n):
            du = opts.fd_step * max(1.0, abs(u[i]))
            up = u.copy()
            up[i] += du
            J[:, i] = (shooter.shoot(up) - r) / du
        try:
            d = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            d = np.linalg.lstsq(J, -r, rcond=None)[0]
            warnings.append(f"singular shooting Jacobian at iteration {iters}")
        alpha = 1.0
        while True:
            trial = u + alpha * d
            try:
                r_trial = shooter.shoot(trial)
                norm_trial = float(np.linalg.norm(r_trial))
            except BlowUp:
                norm_trial = math.inf
            if norm_trial < norm or norm_trial <= opts.newton_tol:
                break
            alpha *= 0.5
            if alpha < 1e-10:
                raise NoConvergence(
                    f"shooting Newton stalled at iteration {iters} (|r| = {norm:.3e})"
                )
        if alpha < 1.0:
            warnings.append(f"damped Newton step {alpha:g} at iteration {iters}")
        u, r, norm = trial, r_trial, norm_trial

    shooter.hd.degenerate_steps = 0
    _, _, states = shooter.run(u, store=True)
    if shooter.hd.degenerate_steps:
        warnings.append(f"{shooter.hd.degenerate_steps} degenerate highest-derivative solves")
    m = 2 * n
    grid = shooter.grid
    x_jets = states[:, : m + 1]
    traj = SampledTrajectory(grid, x_jets)
    zp = ZPath(grid, states[:, m + 1].copy())
    lp = LambdaPath(grid, states[:, m + 2].copy())
    cert = certify(problem, grid, x_jets, zp.z_values)
    return Solution(
        problem=problem, method="shooting", trajectory=traj, zpath=zp, lambdapath=lp,
        x_jets=x_jets, iterations=iters, warnings=warnings, unknowns=tuple(u.tolist()),
        **cert,
    )


# ---------------------------------------------------------------------------
# direct method

class _RitzObjective:
    """Goal-signed z(b) as a function of the basis parameters."""

    def __init__(self, problem: Problem, basis, steps: int):
        self.problem = problem
        self.basis = basis
        self.sign = 1.0 if problem.goal == "min" else -1.0
        self.grid, self.h = step_grid(problem.a, problem.b, steps)
        a, b, n, d = problem.a, problem.b, problem.n, basis.degree
        self.V_nodes = derivative_vandermonde(self.grid, a, b, d, n)
        self.V_mids = derivative_vandermonde(self.grid[:-1] + 0.5 * self.h, a, b, d, n)
        self.f_L = compile_expr(problem.lagrangian)
        self.f_mu = compile_expr(problem.system.mu)
        self.evaluations = 0

    def zpath(self, theta, with_lambda=False):
        c = self.basis.coeffs(theta)
        nodes = np.einsum("jpi,i->pj", self.V_nodes, c).tolist()
        mids = np.einsum("jpi,i->pj", self.V_mids, c).tolist()
        self.evaluations += 1
        return herglotz_rk4(self.f_L, self.f_mu, self.grid, self.h, nodes, mids,
                            self.problem.gamma, with_lambda)

    def __call__(self, theta) -> float:
        z, _ = self.zpath(theta)
        return self.sign * float(z[-1])

    def safe(self, theta) -> float:
        try:
            return self(theta)
        except (BlowUp, DomainError):
            return math.inf


def _central_gradient(f, theta, step):
    g = np.zeros_like(theta)
    for i in range(theta.size):
        dh = step * max(1.0, abs(theta[i]))
        tp = theta.copy()
        tm = theta.copy()
        tp[i] += dh
        tm[i] -= dh
        g[i] = (f(tp) - f(tm)) / (2.0 * dh)
    return g


def solve_direct(problem: Problem, opts: DirectOptions | None = None) -> Solution:
    """Ritz method: minimise goal-signed z(b) over constrained polynomials.

    Steepest descent with a central-difference gradient and Armijo
    backtracking (step halving).  The first trial step of each line search is
    the Barzilai-Borwein step length from the previous iteration.  Trial
    points that blow up count as +inf.
    """
    opts = opts or DirectOptions()
    degree = opts.degree if opts.degree is not None else 2 * problem.n + 3
    basis = constrained_basis(problem, degree)
    obj = _RitzObjective(problem, basis, opts.steps)
    theta = np.zeros(basis.n_params)
    if opts.initial_params is not None:
        theta = np.asarray(opts.initial_params, dtype=float).reshape(basis.n_params)
    f = obj(theta)  # errors at the starting point propagate
    warnings = []
    iters = 0
    prev = None
    alpha0 = 1.0
    safe = obj.safe
    while basis.n_params and iters < opts.max_iters:
        g = _central_gradient(safe, theta, opts.grad_fd_step)
        if not np.all(np.isfinite(g)):
            raise NoDescent("gradient is not finite at the current iterate")
        gnorm = float(np.linalg.norm(g))
        if gnorm <= opts.converge_tol:
            break
        if prev is not None:
            s = theta - prev[0]
            y = g - prev[1]
            sy = float(s @ y)
            if sy > 0:
                alpha0 = float(s @ s) / sy
        d = -g
        slope = float(g @ d)
        alpha = alpha0
        while True:
            trial = theta + alpha * d
            f_trial = safe(trial)
            if f_trial <= f + opts.armijo_c * alpha * slope:
                break
            alpha *= 0.5
            if alpha * gnorm < opts.min_step:
                break
        if not f_trial <= f + opts.armijo_c * alpha * slope:
            if gnorm <= 1e-5:
                warnings.append(f"line search stalled at gradient norm {gnorm:.3e}")
                break
            raise NoDescent(f"no Armijo step found (gradient norm {gnorm:.3e})")
        prev = (theta, g)
        theta, f = trial, f_trial
        iters += 1
    else:
        if basis.n_params and iters >= opts.max_iters:
            warnings.append(f"stopped after max_iters = {opts.max_iters}")

    traj = basis.trajectory(theta)
    z, lam = obj.zpath(theta, with_lambda=True)
    grid = obj.grid
    x_jets = traj.derivs(grid, 2 * problem.n).T
    cert = certify(problem, grid, x_jets, z)
    return Solution(
        problem=problem, method="direct", trajectory=traj, zpath=ZPath(grid, z),
        lambdapath=LambdaPath(grid, lam), x_jets=x_jets, iterations=iters,
        warnings=warnings, unknowns=tuple(theta.tolist()), **cert,
    )


def cross_validate(problem: Problem, s1: Solution, s2: Solution, points: int = 101) -> dict:
    """Compare two solutions of the same problem on a common uniform grid."""
    t = np.linspace(problem.a, problem.b, points)
    x1 = np.array([s1.trajectory.deriv(0, ti) for ti in t])
    x2 = np.array([s2.trajectory.deriv(0, ti) for ti in t])
    return {
        "dz_b": abs(s1.z_b - s2.z_b),
        "max_dx": float(np.max(np.abs(x1 - x2))),
        "el_max_abs": (s1.el_max_abs, s2.el_max_abs),
        "nbc_residuals": (dict(s1.nbc_residuals), dict(s2.nbc_residuals)),
        "bc_residuals": (dict(s1.bc_residuals), dict(s2.bc_residuals)),
    }
