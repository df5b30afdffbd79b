"""Higher-order variational problems of Herglotz type.

Derive the generalized Euler-Lagrange equation and natural boundary
conditions symbolically, then solve the optimality boundary-value problem by
shooting or minimise z(b) directly over polynomial trajectories.
"""

from .errors import (
    BlowUp,
    DegreeTooLow,
    DomainError,
    ExprSyntaxError,
    HerglotzError,
    IllPosedBoundary,
    MissingDerivative,
    NoConvergence,
    NoDescent,
    OrderMismatch,
    OutOfRange,
    SingularEL,
    UnknownIdentifier,
)
from .expr import (
    Jet,
    T,
    Z,
    evaluate,
    max_jet_order,
    parse,
    partial,
    simplify,
    total_derivative,
    unparse,
    xd,
)
from .functional import integrate_z, lambda_path, objective
from .optimality import (
    d_mu,
    derive,
    el_expression,
    mu_expression,
    nbc_expression,
    residual_stats,
    solve_highest_derivative,
)
from .problem import Problem
from .problemfile import load_problem, parse_problem
from .solvers import (
    DirectOptions,
    ShootingOptions,
    Solution,
    cross_validate,
    solve_direct,
    solve_shooting,
)
from .trajectory import (
    PolynomialTrajectory,
    SampledTrajectory,
    constrained_basis,
    eval_deriv,
    polynomial_from_t,
)

__all__ = [
    "BlowUp",
    "constrained_basis",
    "cross_validate",
    "d_mu",
    "DegreeTooLow",
    "derive",
    "DirectOptions",
    "DomainError",
    "el_expression",
    "eval_deriv",
    "evaluate",
    "ExprSyntaxError",
    "HerglotzError",
    "IllPosedBoundary",
    "integrate_z",
    "Jet",
    "lambda_path",
    "load_problem",
    "max_jet_order",
    "MissingDerivative",
    "mu_expression",
    "nbc_expression",
    "NoConvergence",
    "NoDescent",
    "objective",
    "OrderMismatch",
    "OutOfRange",
    "parse",
    "parse_problem",
    "partial",
    "polynomial_from_t",
    "PolynomialTrajectory",
    "Problem",
    "residual_stats",
    "SampledTrajectory",
    "ShootingOptions",
    "simplify",
    "SingularEL",
    "Solution",
    "solve_direct",
    "solve_highest_derivative",
    "solve_shooting",
    "T",
    "total_derivative",
    "UnknownIdentifier",
    "unparse",
    "xd",
    "Z",
]

__version__ = "0.1.0"
