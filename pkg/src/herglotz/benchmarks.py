"""Built-in second-order test problems with known extremals.

All four share the interval [0, 1], ``x(0) = 0`` and ``x'(0) = 1``.
"""

from __future__ import annotations

import math

from .problem import Problem

__all__ = [
    "example1", "example2", "example3", "example4", "EXAMPLES",
    "example3_x", "example3_z", "EXAMPLE3_ZB",
]

_E = math.e
_DEN = _E**2 - 3 * _E + 1

# z(1) of Example 3 in closed form: (e^2 - e - 4) e / (e^2 - 3e + 1)
EXAMPLE3_ZB = (_E**2 - _E - 4) * _E / _DEN


def example1() -> Problem:
    """z' = x''^2 + z^2, z(0) = 1/2, x(1) = x'(1) = 1; extremal x = t, z = 1/(2 - t)."""
    return Problem(2, 0.0, 1.0, "D2x^2 + z^2", 0.5, {0: 0.0, 1: 1.0}, {0: 1.0, 1: 1.0},
                   name="example1")


def example2(gamma: float) -> Problem:
    """Example 1 with z(0) left as a parameter; z = gamma / (1 - gamma t) along x = t."""
    return example1().with_gamma(gamma)


def example3() -> Problem:
    """z' = x''^2 + z, z(0) = 1, x(1) = 1, x'(1) = 0."""
    return Problem(2, 0.0, 1.0, "D2x^2 + z", 1.0, {0: 0.0, 1: 1.0}, {0: 1.0, 1: 0.0},
                   name="example3")


def example4() -> Problem:
    """Example 3 with x'(1) free; extremal x = t, z = e^t."""
    return Problem(2, 0.0, 1.0, "D2x^2 + z", 1.0, {0: 0.0, 1: 1.0}, {0: 1.0},
                   name="example4")


def example3_x(t: float) -> float:
    return ((1 - t) * math.exp(t + 1) + (2 * t - 1) * math.exp(t)
            + (_E - 3) * _E * t - _E + 1) / _DEN


def example3_z(t: float) -> float:
    bracket = ((1 + t * t) * math.exp(t + 2) - 2 * (2 * t * t + t + 2) * math.exp(t + 1)
               + (4 * t * t + 4 * t + 5) * math.exp(t)
               + _E**4 - 6 * _E**3 + 10 * _E**2 - 2 * _E - 4)
    return bracket * math.exp(t) / _DEN**2


EXAMPLES = {
    "example1": example1,
    "example3": example3,
    "example4": example4,
}
