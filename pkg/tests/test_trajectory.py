import numpy as np
import pytest

from herglotz import (
    DegreeTooLow,
    OutOfRange,
    PolynomialTrajectory,
    Problem,
    SampledTrajectory,
    constrained_basis,
    eval_deriv,
    polynomial_from_t,
)
from herglotz.benchmarks import example1, example3, example4


def test_eval_deriv_examples():
    x = polynomial_from_t([0.0, 1.0], 0.0, 1.0)
    assert eval_deriv(x, 1, 0.3) == pytest.approx(1.0, abs=1e-15)
    assert eval_deriv(x, 2, 0.77) == 0.0
    cube = polynomial_from_t([0, 0, 0, 1], 0.0, 1.0)
    assert eval_deriv(cube, 3, 0.5) == pytest.approx(6.0, abs=1e-13)


def test_polynomial_on_general_interval():
    # x = t^3 - 2t on [-1, 3] represented in the normalised variable
    x = polynomial_from_t([0, -2, 0, 1], -1.0, 3.0)
    for t in (-1.0, 0.4, 3.0):
        assert eval_deriv(x, 0, t) == pytest.approx(t**3 - 2 * t, abs=1e-12)
        assert eval_deriv(x, 1, t) == pytest.approx(3 * t * t - 2, abs=1e-12)
        assert eval_deriv(x, 2, t) == pytest.approx(6 * t, abs=1e-12)
    d = x.derivs(np.array([0.0, 1.0]), 4)
    assert d.shape == (5, 2)
    assert np.all(d[4] == 0)


def test_out_of_range():
    x = PolynomialTrajectory((0.0, 1.0), 0.0, 1.0)
    with pytest.raises(OutOfRange):
        eval_deriv(x, 0, 1.5)
    s = SampledTrajectory(np.linspace(0, 1, 5), np.zeros((5, 2)))
    with pytest.raises(OutOfRange):
        s.deriv(0, -0.1)
    with pytest.raises(OutOfRange):
        s.deriv(2, 0.5)


def test_basis_example1_is_unique_cubic():
    basis = constrained_basis(example1(), 3)
    assert basis.n_params == 0
    x = basis.trajectory([])
    for t in np.linspace(0, 1, 11):
        assert eval_deriv(x, 0, t) == pytest.approx(t, abs=1e-13)


def test_basis_parameter_counts():
    assert constrained_basis(example4(), 3).n_params == 1
    free = Problem(2, 0.0, 1.0, "D2x^2", 0.0, {}, {})
    for d in (3, 5, 8):
        assert constrained_basis(free, d).n_params == d + 1
    assert constrained_basis(example3(), 7).n_params == 4


def test_basis_degree_too_low():
    with pytest.raises(DegreeTooLow):
        constrained_basis(example1(), 2)
    p = Problem(1, 0.0, 1.0, "D1x^2", 0.0, {0: 0.0}, {0: 1.0})
    assert constrained_basis(p, 1).n_params == 0


@pytest.mark.parametrize("problem", [example1(), example3(), example4(),
                                     Problem(3, -1.0, 2.0, "D3x^2 + z", 1.0, {0: 1.0, 2: -2.0}, {0: 0.5, 1: 3.0, 2: 0.0})])
def test_basis_exactness(problem):
    rng = np.random.default_rng(0)
    basis = constrained_basis(problem, 2 * problem.n + 3)
    for _ in range(100):
        x = basis.trajectory(rng.normal(size=basis.n_params) * 3)
        for end, t in (("a", problem.a), ("b", problem.b)):
            for k, v in problem.bc(end).items():
                assert abs(eval_deriv(x, k, t) - v) <= 1e-12


def test_basis_project_round_trip():
    basis = constrained_basis(example4(), 7)
    theta = np.arange(basis.n_params) * 0.1 - 0.2
    assert np.allclose(basis.project(basis.coeffs(theta)), theta, atol=1e-12)


def test_sampled_reproduces_cubic():
    grid = np.linspace(0, 1, 1000)
    states = np.column_stack([grid**3, 3 * grid**2, 6 * grid, 6 * np.ones_like(grid)])
    s = SampledTrajectory(grid, states)
    mids = (grid[:-1] + grid[1:]) / 2
    for j, exact in enumerate([mids**3, 3 * mids**2, 6 * mids]):
        approx = np.array([s.deriv(j, t) for t in mids])
        assert np.max(np.abs(approx - exact)) <= 1e-9


def test_sampled_hits_nodes_exactly():
    grid = np.linspace(0, 2, 7)
    states = np.column_stack([np.sin(grid), np.cos(grid)])
    s = SampledTrajectory(grid, states)
    assert s.deriv(0, grid[3]) == states[3, 0]
    assert s.deriv(1, 2.0) == states[-1, 1]


def test_sampled_validation():
    with pytest.raises(ValueError):
        SampledTrajectory(np.array([0.0, 0.0, 1.0]), np.zeros((3, 1)))
    with pytest.raises(ValueError):
        SampledTrajectory(np.array([0.0, 1.0]), np.zeros((3, 1)))
