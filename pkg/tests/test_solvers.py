import math

import numpy as np
import pytest

from corpus import random_concave, random_convex, random_linear
from nltrans.errors import InfeasibleEndpointError, WrongCostClassError
from nltrans.oracle import global_min_vertex
from nltrans.problem import Linear, PiecewiseLinearDiscount, PowerConcave, Problem, Quadratic, total_cost
from nltrans.solvers import (
    SolverOptions,
    Status,
    line_search,
    solve,
    solve_concave,
    solve_convex,
    solve_linear,
)
from nltrans.tableau import check_feasible, is_spanning_tree


def linear_2x2():
    return Problem([1, 1], [1, 1], [[Linear(1.0), Linear(2.0)], [Linear(2.0), Linear(1.0)]])


def quad_2x2():
    sq, lin = Quadratic(0.0, 1.0), Linear(1.0)
    return Problem([2, 2], [2, 2], [[sq, lin], [lin, sq]])


def power_2x2():
    return Problem([2, 2], [2, 2], [[PowerConcave(1.0, 0.5)] * 2] * 2)


def scale(value):
    return max(1.0, abs(value))


# dispatch examples

def test_solve_linear_example():
    sol, _ = solve(linear_2x2())
    assert sol.objective == 2.0 and sol.status is Status.OPTIMAL


def test_solve_convex_example():
    sol, _ = solve(quad_2x2())
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(3.5, abs=1e-6)
    assert np.allclose(sol.x, [[0.5, 1.5], [1.5, 0.5]], atol=1e-6)


def test_solve_concave_example():
    sol, trace = solve(power_2x2(), SolverOptions(trace=True))
    assert sol.status is Status.KKT_POINT
    assert sol.objective == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    assert sol.iterations == 0 and trace == []
    assert np.array_equal(sol.x, [[2, 0], [0, 2]])


def test_mixed_problem_never_optimal():
    p = Problem([2, 2], [2, 2], [[Quadratic(0.0, 1.0), PowerConcave(1.0, 0.5)],
                                 [Linear(1.0), Quadratic(1.0, 0.5)]])
    sol, _ = solve(p)
    assert sol.status is Status.KKT_POINT
    check_feasible(p, sol.x)


def test_wrong_class_rejected():
    with pytest.raises(WrongCostClassError):
        solve_linear(quad_2x2())
    with pytest.raises(WrongCostClassError):
        solve_concave(quad_2x2())
    with pytest.raises(WrongCostClassError):
        solve_convex(power_2x2())


def test_options_validated():
    with pytest.raises(ValueError):
        SolverOptions(tol=0)
    with pytest.raises(ValueError):
        SolverOptions(max_iterations=0)


# solve_linear

def test_single_row_is_already_optimal():
    p = Problem([6], [1, 2, 3], [[Linear(4.0), Linear(1.0), Linear(2.0)]])
    sol, _ = solve_linear(p)
    assert sol.iterations == 0 and sol.status is Status.OPTIMAL
    assert sol.x.tolist() == [[1, 2, 3]]


def test_linear_from_worse_start():
    sol, trace = solve_linear(Problem([1, 1], [1, 1], [[Linear(2.0), Linear(1.0)],
                                                       [Linear(1.0), Linear(2.0)]]),
                              SolverOptions(trace=True))
    assert sol.objective == 2.0 and sol.iterations == 1
    assert trace[0].objective_before == 4.0 and trace[0].objective_after == 2.0


def test_iteration_limit_status():
    p = Problem([1, 1], [1, 1], [[Linear(2.0), Linear(1.0)], [Linear(1.0), Linear(2.0)]])
    sol, _ = solve_linear(p, SolverOptions(max_iterations=1))
    assert sol.status is Status.OPTIMAL
    rng = np.random.default_rng(4)
    limited = 0
    for _ in range(20):
        sol, _ = solve_linear(random_linear(rng), SolverOptions(max_iterations=1))
        limited += sol.status is Status.ITERATION_LIMIT
        assert sol.iterations <= 1
    assert limited > 0


# solve_concave

def test_discount_schedule_example():
    # incremental pricing: the first two units on (0, 0) cost 3 each, so the
    # vertex costs are 9 at x00 = 1 and 10 at x00 = 2
    disc = PiecewiseLinearDiscount([0, 2], [3, 1])
    p = Problem([3, 1], [2, 2], [[disc, Linear(2.0)], [Linear(2.0), Linear(2.0)]])
    sol, _ = solve_concave(p)
    assert sol.x[0, 0] == 1 and sol.objective == 9
    _, best = global_min_vertex(p)
    assert sol.objective == best


def test_concave_iterates_are_vertices_and_descend():
    rng = np.random.default_rng(31)
    for _ in range(10):
        p = random_concave(rng, max_dim=3)
        full, trace = solve_concave(p, SolverOptions(trace=True))
        for record in trace:
            assert record.objective_after <= record.objective_before
        # replaying with a shorter budget reproduces each intermediate iterate
        for k in range(1, full.iterations + 1):
            sol, _ = solve_concave(p, SolverOptions(max_iterations=k))
            check_feasible(p, sol.x)
            assert is_spanning_tree(*p.shape, sol.basis)
            assert not sol.x[sol.nonbasic_mask()].any()


# solve_convex

def test_convex_already_optimal_start():
    diag, off = Quadratic(0.0, 1.0), Quadratic(10.0, 1.0)
    p = Problem([1, 1], [1, 1], [[diag, off], [off, diag]])
    sol, _ = solve_convex(p)
    assert sol.iterations == 0 and sol.status is Status.OPTIMAL


def test_convex_trace_fields():
    sol, trace = solve_convex(quad_2x2(), SolverOptions(trace=True))
    assert len(trace) == sol.iterations
    for record in trace:
        assert record.case in (1, 2, 3)
        assert 0.0 <= record.step <= 1.0
        assert record.objective_after <= record.objective_before + 1e-9 * scale(record.objective_before)


def test_convex_iterates_feasible():
    rng = np.random.default_rng(32)
    p = random_convex(rng, max_dim=3)
    full, _ = solve_convex(p)
    for k in range(1, min(full.iterations, 30) + 1):
        sol, _ = solve_convex(p, SolverOptions(max_iterations=k))
        check_feasible(p, sol.x)
        assert is_spanning_tree(*p.shape, sol.basis)


def test_linear_equivalence_across_solvers():
    rng = np.random.default_rng(33)
    for _ in range(40):
        p = random_linear(rng, max_dim=4)
        _, best = global_min_vertex(p)
        for solver in (solve_linear, solve_concave, solve_convex):
            sol, _ = solver(p)
            assert abs(sol.objective - best) <= 1e-9 * scale(best), solver.__name__


@pytest.mark.parametrize("rule", ["northwest", "vogel", "rowmin", "leastcost"])
def test_convex_result_independent_of_start(rule):
    sol, _ = solve_convex(quad_2x2(), SolverOptions(ibfs_rule=rule))
    assert sol.objective == pytest.approx(3.5, abs=1e-6)


# line_search

def test_line_search_affine_picks_endpoint():
    lam, x = line_search(linear_2x2(), [[0, 1], [1, 0]], [[1, 0], [0, 1]])
    assert lam == 0.0 and np.array_equal(x, [[1, 0], [0, 1]])
    lam, x = line_search(linear_2x2(), [[1, 0], [0, 1]], [[0, 1], [1, 0]])
    assert lam == 1.0


def test_line_search_quadratic_segment():
    # x_k at t=2, y_k at t=0; the point lam*x_k + (1-lam)*y_k sits at t = 2*lam
    p = quad_2x2()
    lam, x = line_search(p, [[2, 0], [0, 2]], [[0, 2], [2, 0]])
    assert lam == pytest.approx(0.25, abs=1e-9)
    assert np.allclose(x, [[0.5, 1.5], [1.5, 0.5]])
    assert total_cost(p, x) == pytest.approx(3.5, abs=1e-12)
    grid = [total_cost(p, [[2 * g, 2 - 2 * g], [2 - 2 * g, 2 * g]]) for g in np.linspace(0, 1, 1001)]
    assert min(grid) >= total_cost(p, x) - 1e-12


def test_line_search_degenerate_segment():
    x0 = np.array([[0.5, 1.5], [1.5, 0.5]])
    lam, x = line_search(quad_2x2(), x0, x0)
    assert np.array_equal(x, x0)


def test_line_search_concave_segment_checks_endpoints():
    p = power_2x2()
    lam, x = line_search(p, [[1, 1], [1, 1]], [[2, 0], [0, 2]])
    assert total_cost(p, x) <= min(total_cost(p, [[1, 1], [1, 1]]), total_cost(p, [[2, 0], [0, 2]]))
    assert lam == 0.0


def test_line_search_rejects_infeasible_endpoint():
    with pytest.raises(InfeasibleEndpointError):
        line_search(quad_2x2(), [[2, 0], [0, 2]], [[1, 0], [0, 1]])
