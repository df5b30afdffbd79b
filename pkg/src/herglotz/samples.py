"""CSV interchange of sampled solutions and residual checks on such samples.

Schema: ``t,x,D1x,...,D<2n-1>x,z,lambda,el_residual``, one row per grid point,
values written with 17 significant digits so that 64-bit floats round-trip.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .errors import HerglotzError
from .expr import compile_expr
from .problem import Problem
from .solvers import certify

__all__ = [
    "SchemaError", "csv_header", "write_csv", "format_csv", "read_csv",
    "fd_derivative", "check_samples",
]


class SchemaError(HerglotzError):
    pass


def csv_header(n: int) -> list:
    return ["t", "x"] + [f"D{k}x" for k in range(1, 2 * n)] + ["z", "lambda", "el_residual"]


def _fmt(v: float) -> str:
    return "%.17g" % v


def format_csv(solution) -> str:
    n = solution.problem.n
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_header(n))
    per_point = solution.el_per_point
    for i, t in enumerate(solution.grid):
        row = [t, *solution.x_jets[i, : 2 * n], solution.zpath.z_values[i],
               solution.lambdapath.lambda_values[i], per_point[i]]
        writer.writerow([_fmt(float(v)) for v in row])
    return buf.getvalue()


def write_csv(solution, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(solution))


def read_csv(path, n: int) -> dict:
    """Columns of a solution CSV as float arrays keyed by header name."""
    expected = csv_header(n)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    rows = [r for r in rows if r]
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header != expected:
        raise SchemaError(f"{path}: header {','.join(header)!r} != {','.join(expected)!r}")
    data = rows[1:]
    if len(data) < 5:
        raise SchemaError(f"{path}: need at least 5 data rows, got {len(data)}")
    try:
        values = np.array([[float(v) for v in r] for r in data])
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    if values.shape[1] != len(expected):
        raise SchemaError(f"{path}: ragged rows")
    if not np.all(np.isfinite(values)):
        raise SchemaError(f"{path}: non-finite values")
    if np.any(np.diff(values[:, 0]) <= 0):
        raise SchemaError(f"{path}: t column must be strictly increasing")
    return {name: values[:, i] for i, name in enumerate(expected)}


def fd_derivative(t: np.ndarray, f: np.ndarray, width: int = 5) -> np.ndarray:
    """First derivative of samples by local polynomial (finite-difference) stencils.

    Each point uses the ``width`` nearest grid indices (one-sided at the ends);
    the weights are exact for polynomials of degree ``width - 1`` on any grid.
    """
    N = t.size
    width = min(width, N)
    out = np.empty(N)
    for i in range(N):
        lo = min(max(i - width // 2, 0), N - width)
        idx = np.arange(lo, lo + width)
        scale = t[idx[-1]] - t[idx[0]]
        s = (t[idx] - t[i]) / scale
        # weights w with sum_j w_j s_j^p = [p == 1]
        V = np.vander(s, width, increasing=True).T
        rhs = np.zeros(width)
        rhs[1] = 1.0
        w = np.linalg.solve(V, rhs)
        out[i] = w @ f[idx] / scale
    return out


def check_samples(problem: Problem, columns: dict) -> dict:
    """Recompute residuals from sampled x^(0..2n-1), z.

    ``x^(2n)`` is reconstructed by finite differences of the ``D<2n-1>x``
    column.  Also reports how well the z column satisfies ``z' = L``.
    """
    n = problem.n
    t = columns["t"]
    names = ["x"] + [f"D{k}x" for k in range(1, 2 * n)]
    X = np.column_stack([columns[c] for c in names])
    top = fd_derivative(t, X[:, -1])
    x_jets = np.column_stack([X, top])
    z = columns["z"]
    cert = certify(problem, t, x_jets, z)

    f_L = compile_expr(problem.lagrangian)
    L_vals = np.array([f_L(float(ti), row.tolist(), float(zi)) for ti, row, zi in zip(t, x_jets, z)])
    z_ode = fd_derivative(t, z) - L_vals

    interval = [float(t[0]) - problem.a, float(t[-1]) - problem.b]
    stored = columns["el_residual"]
    return {
        **cert,
        "z_b": float(z[-1]),
        "z0_residual": float(z[0]) - problem.gamma,
        "z_ode_max_abs": float(np.max(np.abs(z_ode))),
        "interval_mismatch": max(abs(v) for v in interval),
        "stored_el_max_abs": float(np.max(np.abs(stored))),
        "el_stored_deviation": float(np.max(np.abs(stored - cert["el_per_point"]))),
        "rows": int(t.size),
    }
