"""Candidate trajectories x(t) with evaluable derivatives.

Two representations:

* :class:`PolynomialTrajectory` -- Chebyshev coefficients in the normalised
  variable ``u = (2t - a - b) / (b - a)``; derivatives of every order are
  exact and coefficients stay small for well-scaled trajectories.
* :class:`SampledTrajectory` -- dense samples of ``x, x', ..., x^(m)`` on a
  grid (the state of an ODE integration).  Between two grid points each
  derivative is reconstructed by the two-point Hermite interpolant that
  matches all available higher derivatives at both ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy.linalg import null_space

from .errors import DegreeTooLow, OutOfRange

__all__ = [
    "Trajectory", "PolynomialTrajectory", "SampledTrajectory", "BasisMap",
    "eval_deriv", "constrained_basis", "polynomial_from_t", "derivative_vandermonde",
]

_RANGE_SLACK = 1e-12


class Trajectory:
    a: float
    b: float

    def deriv(self, j: int, t: float) -> float:
        raise NotImplementedError

    def derivs(self, t, order: int) -> np.ndarray:
        """Array of shape ``(order + 1, len(t))`` with x^(0..order) at times ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.array([[self.deriv(j, ti) for ti in t] for j in range(order + 1)])

    def _check(self, t: float):
        span = self.b - self.a
        if not (self.a - _RANGE_SLACK * span <= t <= self.b + _RANGE_SLACK * span):
            raise OutOfRange(f"t = {t!r} outside [{self.a}, {self.b}]")


def _to_unit(t, a: float, b: float):
    return (2.0 * np.asarray(t, dtype=float) - (a + b)) / (b - a)


@lru_cache(maxsize=32)
def _cheb_diff_matrix(degree: int) -> np.ndarray:
    # column i holds the Chebyshev coefficients of T_i'
    D = np.zeros((degree + 1, degree + 1))
    for i in range(1, degree + 1):
        unit = np.zeros(degree + 1)
        unit[i] = 1.0
        d = C.chebder(unit)
        D[: d.size, i] = d
    return D


def derivative_vandermonde(t, a: float, b: float, degree: int, order: int) -> np.ndarray:
    """``V[j, p, i] = d^j/dt^j T_i(u(t_p))`` for ``j = 0..order``."""
    V0 = C.chebvander(_to_unit(np.atleast_1d(t), a, b), degree)
    D = _cheb_diff_matrix(degree)
    scale = 2.0 / (b - a)
    out = np.empty((order + 1,) + V0.shape)
    M = np.eye(degree + 1)
    for j in range(order + 1):
        out[j] = V0 @ M * scale**j
        M = D @ M
    return out


@dataclass(frozen=True)
class PolynomialTrajectory(Trajectory):
    coeffs: tuple  # Chebyshev coefficients in u = (2t - a - b) / (b - a) on [-1, 1]
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def _deriv_coeffs(self, j: int) -> np.ndarray:
        c = np.asarray(self.coeffs, dtype=float)
        if j > 0:
            c = C.chebder(c, j) * (2.0 / (self.b - self.a)) ** j
        return c

    def deriv(self, j: int, t: float) -> float:
        if j < 0:
            raise ValueError("derivative order must be nonnegative")
        self._check(t)
        return float(C.chebval(_to_unit(t, self.a, self.b), self._deriv_coeffs(j)))

    def derivs(self, t, order: int) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        for ti in (t.min(), t.max()):
            self._check(ti)
        u = _to_unit(t, self.a, self.b)
        return np.array([C.chebval(u, self._deriv_coeffs(j)) for j in range(order + 1)])


def polynomial_from_t(coeffs_t, a: float, b: float) -> PolynomialTrajectory:
    """Build a trajectory from monomial coefficients in ``t`` (``sum c_i t^i``)."""
    # t = (a + b)/2 + (b - a)/2 u; compose, then change to the Chebyshev basis
    result = np.zeros(1)
    affine = np.array([(a + b) / 2, (b - a) / 2], dtype=float)
    power = np.ones(1)
    for c in coeffs_t:
        result = P.polyadd(result, c * power)
        power = P.polymul(power, affine)
    return PolynomialTrajectory(tuple(C.poly2cheb(result)), a, b)


@lru_cache(maxsize=16)
def _hermite_inverse(m: int) -> np.ndarray:
    # p(u) = sum_i c_i u^i on [0, 1]; rows impose p^(k)(0) and p^(k)(1), k = 0..m
    size = 2 * m + 2
    A = np.zeros((size, size))
    for k in range(m + 1):
        A[k, k] = math.factorial(k)
        for i in range(k, size):
            A[m + 1 + k, i] = math.factorial(i) / math.factorial(i - k)
    return np.linalg.inv(A)


@dataclass(frozen=True, eq=False)
class SampledTrajectory(Trajectory):
    grid: np.ndarray  # strictly increasing times, shape (N,)
    states: np.ndarray  # shape (N, m + 1): x^(0..m) at each grid point

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] != grid.size:
            raise ValueError("states must have one row per grid point")
        if grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing with at least two points")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "states", states)

    @property
    def a(self) -> float:
        return float(self.grid[0])

    @property
    def b(self) -> float:
        return float(self.grid[-1])

    @property
    def max_order(self) -> int:
        return self.states.shape[1] - 1

    def deriv(self, j: int, t: float) -> float:
        if not 0 <= j <= self.max_order:
            raise OutOfRange(f"derivative order {j} not stored (max {self.max_order})")
        self._check(t)
        grid = self.grid
        i = int(np.searchsorted(grid, t, side="right")) - 1
        i = min(max(i, 0), grid.size - 2)
        h = grid[i + 1] - grid[i]
        u = (t - grid[i]) / h
        if u == 0.0:
            return float(self.states[i, j])
        if u == 1.0:
            return float(self.states[i + 1, j])
        # interpolate g = x^(j) using g, g', ..., g^(m-j) at both ends
        m = self.max_order - j
        scale = h ** np.arange(m + 1)
        rhs = np.concatenate(
            [self.states[i, j:] * scale, self.states[i + 1, j:] * scale]
        )
        c = _hermite_inverse(m) @ rhs
        return float(P.polyval(u, c))


def eval_deriv(x: Trajectory, j: int, t: float) -> float:
    """``x^(j)(t)``."""
    return x.deriv(j, t)


@dataclass(frozen=True, eq=False)
class BasisMap:
    """Affine map ``theta -> coeffs = particular + nullspace @ theta``.

    Every induced polynomial satisfies the fixed boundary slots of the problem.
    """

    degree: int
    a: float
    b: float
    particular: np.ndarray
    nullspace: np.ndarray  # shape (degree + 1, n_params)

    @property
    def n_params(self) -> int:
        return self.nullspace.shape[1]

    def coeffs(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(self.n_params)
        return self.particular + self.nullspace @ theta

    def trajectory(self, theta) -> PolynomialTrajectory:
        return PolynomialTrajectory(tuple(self.coeffs(theta)), self.a, self.b)

    def project(self, coeffs) -> np.ndarray:
        """Least-squares parameters whose polynomial is closest to ``coeffs``."""
        if self.n_params == 0:
            return np.zeros(0)
        theta, *_ = np.linalg.lstsq(self.nullspace, np.asarray(coeffs) - self.particular, rcond=None)
        return theta


def constrained_basis(problem, degree: int) -> BasisMap:
    """Affine parametrisation of degree-``degree`` polynomials meeting every fixed slot."""
    n = problem.n
    fixed = [("a", k, v) for k, v in sorted(problem.bc_a.items())]
    fixed += [("b", k, v) for k, v in sorted(problem.bc_b.items())]
    if degree < 2 * n - 1 or degree + 1 < len(fixed):
        raise DegreeTooLow(
            f"degree {degree} too low for order {n} with {len(fixed)} fixed slots"
        )
    if fixed:
        V = derivative_vandermonde([problem.a, problem.b], problem.a, problem.b, degree, n - 1)
        A = np.array([V[k, 0 if end == "a" else 1] for end, k, _ in fixed])
        rhs = np.array([v for *_, v in fixed], dtype=float)
        if np.linalg.matrix_rank(A) < len(fixed):
            raise DegreeTooLow("boundary conditions are not independent at this degree")
        particular, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        # one refinement step pins the boundary rows to rounding level
        particular += np.linalg.lstsq(A, rhs - A @ particular, rcond=None)[0]
        nullspace = null_space(A)
    else:
        particular = np.zeros(degree + 1)
        nullspace = np.eye(degree + 1)
    if nullspace.shape[1]:
        # orthonormal columns w.r.t. the Sobolev product sum_j int p^(j) q^(j) du
        G_full = _sobolev_gram(degree, n)
        G = nullspace.T @ G_full @ nullspace
        R = np.linalg.cholesky(G).T
        nullspace = np.linalg.solve(R.T, nullspace.T).T
        # smoothest particular solution: remove its component along the nullspace
        particular = particular - nullspace @ (nullspace.T @ G_full @ particular)
        if fixed:
            particular += np.linalg.lstsq(A, rhs - A @ particular, rcond=None)[0]
    return BasisMap(degree, problem.a, problem.b, particular, nullspace)


def _sobolev_gram(degree: int, order: int) -> np.ndarray:
    nodes, weights = np.polynomial.legendre.leggauss(degree + 1)
    V = derivative_vandermonde(nodes, -1.0, 1.0, degree, order)
    return sum(Vj.T @ (weights[:, None] * Vj) for Vj in V)
