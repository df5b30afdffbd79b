"""Problem definition: order, interval, Lagrangian, z(a) and boundary slots."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .expr import Z, Expr, max_jet_order, parse, variables
from .optimality import OptimalitySystem, derive

__all__ = ["Problem"]


@dataclass(frozen=True, eq=False)
class Problem:
    """Extremize ``z(b)`` subject to ``z' = L(t, x, ..., x^(n), z)``, ``z(a) = gamma``.

    ``bc_a`` / ``bc_b`` map a derivative order ``k`` in ``0..n-1`` to its fixed
    value; orders that are absent are free.
    """

    n: int
    a: float
    b: float
    lagrangian: Expr
    gamma: float
    bc_a: dict = field(default_factory=dict)
    bc_b: dict = field(default_factory=dict)
    goal: str = "min"
    name: str = ""

    def __post_init__(self):
        if isinstance(self.lagrangian, str):
            object.__setattr__(self, "lagrangian", parse(self.lagrangian))
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"order n must be an integer >= 1, got {self.n}")
        if not self.a < self.b:
            raise ValueError(f"interval must satisfy a < b, got [{self.a}, {self.b}]")
        if max_jet_order(self.lagrangian) > self.n:
            raise ValueError(
                f"Lagrangian uses D{max_jet_order(self.lagrangian)}x but n = {self.n}"
            )
        if self.goal not in ("min", "max"):
            raise ValueError(f"goal must be 'min' or 'max', got {self.goal!r}")
        for end, slots in (("a", self.bc_a), ("b", self.bc_b)):
            for k in slots:
                if not 0 <= k < self.n:
                    raise ValueError(f"boundary slot D{k}x({end}) outside 0..{self.n - 1}")
        object.__setattr__(self, "bc_a", {int(k): float(v) for k, v in self.bc_a.items()})
        object.__setattr__(self, "bc_b", {int(k): float(v) for k, v in self.bc_b.items()})
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "gamma", float(self.gamma))

    def bc(self, endpoint: str) -> dict:
        return self.bc_a if endpoint == "a" else self.bc_b

    def free_slots(self) -> list:
        """``(endpoint, k)`` pairs whose value is not prescribed."""
        return [(end, k) for end in ("a", "b") for k in range(self.n) if k not in self.bc(end)]

    @property
    def depends_on_z(self) -> bool:
        return Z in variables(self.lagrangian)

    @cached_property
    def system(self) -> OptimalitySystem:
        return derive(self.lagrangian, self.n)

    def with_gamma(self, gamma: float) -> "Problem":
        return Problem(self.n, self.a, self.b, self.lagrangian, gamma,
                       dict(self.bc_a), dict(self.bc_b), self.goal, self.name)
