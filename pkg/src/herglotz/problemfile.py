"""Line-oriented problem files.

::

    # Example 1
    n: 2
    interval: 0 1
    lagrangian: D2x^2 + z^2
    z0: 0.5
    goal: min
    bc: x(a) = 0
    bc: D1x(b) = 1

Slots without a ``bc`` line are free.
"""

from __future__ import annotations

import re
from pathlib import Path

from .errors import HerglotzError
from .expr import max_jet_order, parse
from .problem import Problem

__all__ = ["ProblemFileError", "load_problem", "parse_problem", "dump_problem"]

_LINE_RE = re.compile(r"^\s*([A-Za-z0-9_]+)\s*:\s*(.*?)\s*$")
_BC_RE = re.compile(r"^(x|D([1-9])x)\(\s*([ab])\s*\)\s*=\s*(\S+)$")
_REQUIRED = ("n", "interval", "lagrangian", "z0")


class ProblemFileError(HerglotzError):
    def __init__(self, source: str, diagnostics: list):
        self.source = source
        self.diagnostics = diagnostics
        super().__init__("\n".join(f"{source}:{line}: {msg}" for line, msg in diagnostics))


def _real(text: str) -> float:
    value = float(text)
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError(f"not a finite real: {text!r}")
    return value


def parse_problem(text: str, source: str = "<string>", name: str = "") -> Problem:
    errors = []
    seen = {}
    given = {}  # key -> first line, valid or not
    bcs = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE_RE.match(line)
        if not m:
            errors.append((lineno, f"expected 'key: value', got {line!r}"))
            continue
        key, value = m.group(1), m.group(2)
        try:
            if key == "bc":
                bm = _BC_RE.match(value)
                if not bm:
                    raise ValueError(f"malformed boundary condition {value!r}")
                k = int(bm.group(2) or 0)
                slot = (bm.group(3), k)
                if slot in bcs:
                    raise ValueError(
                        f"duplicate boundary condition for {bm.group(1)}({slot[0]})"
                        f" (first given on line {bcs[slot][1]})"
                    )
                bcs[slot] = (_real(bm.group(4)), lineno)
                continue
            if key not in _REQUIRED and key != "goal":
                raise ValueError(f"unknown key {key!r}")
            if key in given:
                raise ValueError(f"duplicate key {key!r} (first given on line {given[key]})")
            given[key] = lineno
            if key == "n":
                if not re.fullmatch(r"[+-]?\d+", value):
                    raise ValueError(f"n must be an integer, got {value!r}")
                parsed = int(value)
                if parsed < 1:
                    raise ValueError(f"n must be >= 1, got {parsed}")
            elif key == "interval":
                parts = value.split()
                if len(parts) != 2:
                    raise ValueError("interval needs exactly two numbers: '<a> <b>'")
                parsed = (_real(parts[0]), _real(parts[1]))
                if not parsed[0] < parsed[1]:
                    raise ValueError(f"interval must satisfy a < b, got {value!r}")
            elif key == "lagrangian":
                parsed = parse(value)
            elif key == "z0":
                parsed = _real(value)
            else:
                if value not in ("min", "max"):
                    raise ValueError(f"goal must be 'min' or 'max', got {value!r}")
                parsed = value
            seen[key] = (parsed, lineno)
        except (ValueError, HerglotzError) as exc:
            errors.append((lineno, str(exc)))

    last = len(text.splitlines()) or 1
    for key in _REQUIRED:
        if key not in given:
            errors.append((last, f"missing required key {key!r}"))

    if "n" in seen:
        n = seen["n"][0]
        for (end, k), (_, lineno) in sorted(bcs.items(), key=lambda kv: kv[1][1]):
            if k > n - 1:
                errors.append((lineno, f"boundary slot D{k}x({end}) needs k <= n-1 = {n - 1}"))
        if "lagrangian" in seen:
            order = max_jet_order(seen["lagrangian"][0])
            if order > n:
                errors.append((seen["lagrangian"][1], f"Lagrangian uses D{order}x but n = {n}"))

    if errors:
        raise ProblemFileError(source, sorted(errors))

    a, b = seen["interval"][0]
    return Problem(
        n=seen["n"][0],
        a=a,
        b=b,
        lagrangian=seen["lagrangian"][0],
        gamma=seen["z0"][0],
        bc_a={k: v for (end, k), (v, _) in bcs.items() if end == "a"},
        bc_b={k: v for (end, k), (v, _) in bcs.items() if end == "b"},
        goal=seen.get("goal", ("min", 0))[0],
        name=name,
    )


def load_problem(path) -> Problem:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ProblemFileError(str(path), [(0, f"cannot read file: {exc}")]) from None
    return parse_problem(text, source=str(path), name=path.stem)


def dump_problem(problem: Problem, comment: str = "") -> str:
    lines = [f"# {comment}"] if comment else []
    lines += [
        f"n: {problem.n}",
        f"interval: {problem.a!r} {problem.b!r}",
        f"lagrangian: {problem.lagrangian}",
        f"z0: {problem.gamma!r}",
    ]
    if problem.goal != "min":
        lines.append(f"goal: {problem.goal}")
    for end in ("a", "b"):
        for k, v in sorted(problem.bc(end).items()):
            var = "x" if k == 0 else f"D{k}x"
            lines.append(f"bc: {var}({end}) = {v!r}")
    return "\n".join(lines) + "\n"
