from fractions import Fraction

import numpy as np
import pytest

from corpus import exact_reduced, random_convex, random_linear
from nltrans.errors import DimensionMismatchError, NotATreeError, RowSumViolationError
from nltrans.kkt import check_kkt, reduced_derivatives
from nltrans.oracle import convex_reference
from nltrans.problem import Linear, PowerConcave, Problem, Quadratic, derivative_matrix, total_cost
from nltrans.solvers import solve_convex, solve_linear
from nltrans.tableau import Duals, apply_theta, compute_duals, find_loop, max_theta


def linear_2x2():
    return Problem([1, 1], [1, 1], [[Linear(1.0), Linear(2.0)], [Linear(2.0), Linear(1.0)]])


def test_reduced_derivatives_example():
    w = reduced_derivatives(linear_2x2(), [[1, 0], [0, 1]], Duals((0, -1), (1, 2)))
    assert w.tolist() == [[0, 0], [2, 0]]


def test_reduced_derivatives_zero_duals_give_gradient():
    p = Problem([2, 2], [2, 2], [[Quadratic(1.0, 1.0), PowerConcave(2.0, 0.5)],
                                 [Linear(3.0), Quadratic(0.0, 2.0)]])
    x = np.array([[1.0, 1.0], [1.0, 1.0]])
    w = reduced_derivatives(p, x, Duals((Fraction(0),) * 2, (Fraction(0),) * 2))
    assert np.array_equal(w, derivative_matrix(p, x))


def test_reduced_derivatives_single_cell():
    p = Problem([3], [3], [[Quadratic(1.0, 1.0)]])
    assert reduced_derivatives(p, [[3]], compute_duals(p, [[3]], [(0, 0)])).tolist() == [[0]]


def test_reduced_derivatives_shape_checked():
    with pytest.raises(DimensionMismatchError):
        reduced_derivatives(linear_2x2(), np.zeros((2, 2)), Duals((0,), (0, 0)))


def test_check_kkt_optimal_vertex():
    report = check_kkt(linear_2x2(), [[1, 0], [0, 1]], [(0, 0), (0, 1), (1, 1)])
    assert report.satisfied
    assert report.w.tolist() == [[0, 0], [2, 0]]
    assert not report.cs.any()
    assert report.max_stationarity_violation == 0.0


def test_check_kkt_suboptimal_vertex():
    report = check_kkt(linear_2x2(), [[0, 1], [1, 0]], [(0, 0), (0, 1), (1, 0)])
    assert not report.satisfied
    assert report.w[1, 1] < 0
    assert report.max_nonneg_violation == pytest.approx(2.0)


def test_check_kkt_forced_problem():
    p = Problem([4], [4], [[PowerConcave(1.0, 0.3)]])
    assert check_kkt(p, [[4]], [(0, 0)]).satisfied


def test_check_kkt_rejects_bad_input():
    with pytest.raises(RowSumViolationError):
        check_kkt(linear_2x2(), [[1, 1], [0, 0]], [(0, 0), (0, 1), (1, 1)])
    with pytest.raises(NotATreeError):
        check_kkt(linear_2x2(), [[1, 0], [0, 1]], [(0, 0), (1, 1)])


def test_report_serializes_listed_fields():
    doc = check_kkt(linear_2x2(), [[1, 0], [0, 1]], [(0, 0), (0, 1), (1, 1)]).to_dict()
    assert list(doc) == ["w", "cs", "max_stationarity_violation", "max_nonneg_violation",
                         "max_cs_violation", "satisfied"]


def test_basic_cells_exactly_stationary_and_match_rational_check():
    rng = np.random.default_rng(21)
    for _ in range(40):
        p = random_convex(rng)
        sol, _ = solve_convex(p)
        report = check_kkt(p, sol.x, sol.basis)
        assert report.max_stationarity_violation == 0.0
        assert np.array_equal(report.w, exact_reduced(p, sol.x, sol.basis))


def test_satisfied_vertex_has_no_improving_neighbour():
    rng = np.random.default_rng(22)
    for _ in range(60):
        p = random_linear(rng, max_dim=4)
        sol, _ = solve_linear(p)
        assert sol.kkt.satisfied
        m, n = p.shape
        for cell in np.argwhere(sol.nonbasic_mask()):
            loop = find_loop(m, n, sol.basis, tuple(cell))
            theta, _ = max_theta(sol.x, loop)
            neighbour = apply_theta(sol.x, loop, theta)
            assert total_cost(p, neighbour) >= sol.objective - 1e-9 * max(1.0, sol.objective)


def test_satisfied_convex_point_is_global():
    rng = np.random.default_rng(23)
    for _ in range(15):
        p = random_convex(rng, max_dim=3)
        sol, _ = solve_convex(p)
        assert sol.kkt.satisfied
        ref = convex_reference(p)
        assert abs(sol.objective - ref) <= 1e-6 * max(1.0, abs(ref))
