"""Command-line front end: ``herglotz derive|solve|check|reproduce``.

Exit codes: 0 success, 2 input error, 3 solver failure, 4 ill-posed / blow-up.
Reports are ``key = value`` lines.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import benchmarks
from .errors import (
    BlowUp,
    DegreeTooLow,
    HerglotzError,
    IllPosedBoundary,
)
from .problemfile import ProblemFileError, load_problem
from .samples import SchemaError, check_samples, read_csv, write_csv
from .solvers import (
    DirectOptions,
    ShootingOptions,
    cross_validate,
    solve_direct,
    solve_shooting,
)

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_ILLPOSED = 0, 2, 3, 4


class Report:
    def __init__(self, out=None):
        self.out = out or sys.stdout

    def line(self, key: str, value) -> None:
        print(f"{key} = {_fmt(value)}", file=self.out)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.16g" % value
    return str(value)


def _slot(end: str, k: int) -> str:
    return f"{'x' if k == 0 else f'D{k}x'}({end})"


def _load(path, err):
    try:
        return load_problem(path)
    except ProblemFileError as exc:
        print(exc, file=err)
        return None


# ---------------------------------------------------------------------------
# derive

def cmd_derive(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    problem = _load(args.problem, err)
    if problem is None:
        return EXIT_INPUT
    system = problem.system
    print(f"lagrangian = {problem.lagrangian}", file=out)
    print(f"mu = {system.mu}", file=out)
    print(f"el = {system.el}", file=out)
    for end, k in problem.free_slots():
        print(f"nbc {end} k={k}: {system.nbc(end)[k]}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve

def _report_solution(rep: Report, sol, prefix: str = "") -> None:
    p = prefix
    rep.line(f"{p}method", sol.method)
    rep.line(f"{p}z_b", sol.z_b)
    rep.line(f"{p}iterations", sol.iterations)
    rep.line(f"{p}el_max_abs", sol.el_max_abs)
    rep.line(f"{p}el_rms", sol.el_rms)
    for (end, k), v in sorted(sol.bc_residuals.items()):
        rep.line(f"{p}bc_residual[{_slot(end, k)}]", v)
    for (end, k), v in sorted(sol.nbc_residuals.items()):
        rep.line(f"{p}nbc_residual[{_slot(end, k)}]", v)
    if sol.method == "shooting":
        for i, u in enumerate(sol.unknowns):
            rep.line(f"{p}initial[D{sol.problem.n + i}x(a)]", u)
    rep.line(f"{p}lambda_b", float(sol.lambdapath.lambda_values[-1]))
    for w in sol.warnings:
        rep.line(f"{p}warning", w)


def _csv_path(base: str, method: str, both: bool) -> Path:
    path = Path(base)
    if not both or method == "shooting":
        return path
    return path.with_name(f"{path.stem}.{method}{path.suffix or '.csv'}")


def cmd_solve(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    problem = _load(args.problem, err)
    if problem is None:
        return EXIT_INPUT
    rep = Report(out)
    rep.line("problem", problem.name or args.problem)
    both = args.method == "both"
    methods = ["shooting", "direct"] if both else [args.method]
    solutions = {}
    for method in methods:
        prefix = f"{method}." if both else ""
        try:
            if method == "shooting":
                opts = ShootingOptions(steps=args.steps)
                if args.tol is not None:
                    opts.newton_tol = args.tol
                sol = solve_shooting(problem, opts)
            else:
                opts = DirectOptions(steps=args.steps, degree=args.degree)
                if args.tol is not None:
                    opts.converge_tol = args.tol
                sol = solve_direct(problem, opts)
        except BlowUp as exc:
            rep.line(f"{prefix}status", "blowup")
            rep.line(f"{prefix}blowup_t", exc.t_star)
            print(f"error: {exc}", file=err)
            return EXIT_ILLPOSED
        except DegreeTooLow as exc:
            rep.line(f"{prefix}status", "invalid")
            print(f"error: {exc}", file=err)
            return EXIT_INPUT
        except IllPosedBoundary as exc:
            if both:
                rep.line(f"{prefix}status", "skipped")
                rep.line(f"{prefix}warning", str(exc))
                continue
            rep.line(f"{prefix}status", "ill-posed")
            print(f"error: {exc}", file=err)
            return EXIT_ILLPOSED
        except HerglotzError as exc:
            rep.line(f"{prefix}status", "failed")
            rep.line(f"{prefix}error", f"{type(exc).__name__}: {exc}")
            print(f"error: {exc}", file=err)
            return EXIT_SOLVER
        rep.line(f"{prefix}status", "ok")
        _report_solution(rep, sol, prefix)
        if args.csv:
            path = _csv_path(args.csv, method, both)
            write_csv(sol, path)
            rep.line(f"{prefix}csv", str(path))
        solutions[method] = sol
    if len(solutions) == 2:
        cv = cross_validate(problem, solutions["shooting"], solutions["direct"])
        rep.line("cross.dz_b", cv["dz_b"])
        rep.line("cross.max_dx", cv["max_dx"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# check

def cmd_check(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    problem = _load(args.problem, err)
    if problem is None:
        return EXIT_INPUT
    try:
        columns = read_csv(args.csv, problem.n)
    except SchemaError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    try:
        res = check_samples(problem, columns)
    except HerglotzError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    tol = 1e-6 if args.tol is None else args.tol
    rep = Report(out)
    rep.line("rows", res["rows"])
    rep.line("z_b", res["z_b"])
    rep.line("el_max_abs", res["el_max_abs"])
    rep.line("el_rms", res["el_rms"])
    rep.line("el_stored_deviation", res["el_stored_deviation"])
    rep.line("z0_residual", res["z0_residual"])
    rep.line("z_ode_max_abs", res["z_ode_max_abs"])
    for (end, k), v in sorted(res["bc_residuals"].items()):
        rep.line(f"bc_residual[{_slot(end, k)}]", v)
    for (end, k), v in sorted(res["nbc_residuals"].items()):
        rep.line(f"nbc_residual[{_slot(end, k)}]", v)
    boundary = [abs(v) for v in res["bc_residuals"].values()]
    boundary += [abs(v) for v in res["nbc_residuals"].values()]
    boundary_max = max(boundary, default=0.0)
    rep.line("boundary_max_abs", boundary_max)
    ok = bool(res["el_max_abs"] <= tol and boundary_max <= tol and res["interval_mismatch"] <= tol)
    rep.line("tolerance", tol)
    rep.line("pass", ok)
    return EXIT_OK


# ---------------------------------------------------------------------------
# reproduce

SWEEP_STEPS = 20000


def reproduce(rep: Report) -> bool:
    """Run the four built-in examples; returns True iff every row passes."""
    results = []

    def row(name, expected, computed, tol):
        ok = bool(abs(computed - expected) <= tol)
        rep.line(f"{name}.expected", expected)
        rep.line(f"{name}.computed", computed)
        rep.line(f"{name}.tolerance", tol)
        rep.line(f"{name}.pass", ok)
        results.append(ok)

    def failed(name, exc):
        rep.line(f"{name}.pass", False)
        rep.line(f"{name}.error", f"{type(exc).__name__}: {exc}")
        results.append(False)

    # Example 1
    p1 = benchmarks.example1()
    try:
        s = solve_shooting(p1)
        row("example1.z_b", 1.0, s.z_b, 1e-6)
        dev = max(abs(s.trajectory.deriv(0, t) - t) for t in s.grid)
        row("example1.max_abs_x_minus_t", 0.0, dev, 1e-6)
    except HerglotzError as exc:
        failed("example1", exc)

    # Example 2: gamma sweep along x = t
    for gamma in (0.9, 0.99):
        name = f"example2.gamma_{gamma}.z_b"
        try:
            s = solve_shooting(benchmarks.example2(gamma), ShootingOptions(steps=SWEEP_STEPS))
            row(name, gamma / (1 - gamma), s.z_b, 1e-6)
        except HerglotzError as exc:
            failed(name, exc)
    name = "example2.gamma_1.01"
    try:
        solve_shooting(benchmarks.example2(1.01), ShootingOptions(steps=SWEEP_STEPS))
        rep.line(f"{name}.blowup", False)
        results.append(False)
    except BlowUp as exc:
        ok = bool(0.985 < exc.t_star < 0.995)
        rep.line(f"{name}.blowup", True)
        rep.line(f"{name}.blowup_t", exc.t_star)
        rep.line(f"{name}.expected_pole", 1 / 1.01)
        rep.line(f"{name}.pass", ok)
        results.append(ok)
    except HerglotzError as exc:
        failed(name, exc)
    rep.line("example2.verdict", "ill-posed (unbounded below)" if all(results[-3:]) else "inconclusive")

    # Example 3
    p3 = benchmarks.example3()
    try:
        s = solve_shooting(p3)
        row("example3.z_b", benchmarks.EXAMPLE3_ZB, s.z_b, 1e-4)
        for t in (0.25, 0.5, 0.75):
            row(f"example3.x({t})", benchmarks.example3_x(t), s.trajectory.deriv(0, t), 1e-4)
    except HerglotzError as exc:
        failed("example3", exc)

    # Example 4
    p4 = benchmarks.example4()
    rep.line("example4.nbc[D1x(b)]", p4.system.nbc_b[1])
    try:
        s = solve_shooting(p4)
        row("example4.z_b", math.e, s.z_b, 1e-6)
        row("example4.D1x(1)", 1.0, s.trajectory.deriv(1, 1.0), 1e-5)
        row("example4.D2x(1)", 0.0, s.trajectory.deriv(2, 1.0), 1e-6)
    except HerglotzError as exc:
        failed("example4", exc)

    passed = all(results)
    rep.line("summary.rows", len(results))
    rep.line("summary.pass", passed)
    return passed


def cmd_reproduce(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    return EXIT_OK if reproduce(Report(out)) else EXIT_SOLVER


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="herglotz",
        description="Derive and solve higher-order variational problems of Herglotz type.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="print the Euler-Lagrange and natural boundary expressions")
    p.add_argument("problem")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("problem")
    p.add_argument("--method", choices=["shooting", "direct", "both"], default="shooting")
    p.add_argument("--csv", help="write the sampled solution to this CSV file")
    p.add_argument("--steps", type=int, default=1000, help="RK4 steps (default 1000)")
    p.add_argument("--degree", type=int, help="polynomial degree for the direct method (default 2n+3)")
    p.add_argument("--tol", type=float, help="Newton tolerance (shooting) / gradient tolerance (direct)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="recompute residuals of a solution CSV")
    p.add_argument("problem")
    p.add_argument("--csv", required=True)
    p.add_argument("--tol", type=float, help="pass threshold for residuals (default 1e-6)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reproduce", help="run the built-in examples and compare with known values")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "steps", 1000) < 10:
        print("error: --steps must be >= 10", file=sys.stderr)
        return EXIT_INPUT
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
