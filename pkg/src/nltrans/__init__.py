"""Transportation problems with nonlinear separable costs.

The solvers cover linear, convex (e.g. quadratic congestion) and concave
(volume discount) cell costs, and every result carries a KKT certificate.
"""

from .errors import TransportError
from .ibfs import IbfsRule, initial_solution
from .kkt import KktReport, check_kkt, reduced_derivatives
from .problem import (
    CostClass,
    Linear,
    PiecewiseLinearDiscount,
    PowerConcave,
    Problem,
    Quadratic,
    balance,
    cell_cost,
    cell_derivative,
    classify,
    total_cost,
    validate,
)
from .solvers import (
    Solution,
    SolverOptions,
    Status,
    TraceRecord,
    line_search,
    solve,
    solve_concave,
    solve_convex,
    solve_linear,
)
from .tableau import Duals, apply_theta, check_feasible, compute_duals, find_loop, is_spanning_tree, max_theta

__version__ = "0.1.0"

__all__ = [
    "CostClass", "Duals", "IbfsRule", "KktReport", "Linear", "PiecewiseLinearDiscount",
    "PowerConcave", "Problem", "Quadratic", "Solution", "SolverOptions", "Status",
    "TraceRecord", "TransportError", "apply_theta", "balance", "cell_cost",
    "cell_derivative", "check_feasible", "check_kkt", "classify", "compute_duals",
    "find_loop", "initial_solution", "is_spanning_tree", "line_search", "max_theta",
    "reduced_derivatives", "solve", "solve_concave", "solve_convex", "solve_linear",
    "total_cost", "validate",
]
