"""First-order optimality certificate for a basic solution.

With row potentials u and column potentials v taken from the basic cells,
the reduced derivative ``w_ij = f'_ij(x_ij) - u_i - v_j`` is the gradient
of the Lagrangian with respect to x_ij and doubles as the multiplier of the
bound x_ij >= 0.  A feasible x is a KKT point when every w_ij >= 0 and every
product x_ij * w_ij vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatchError
from .problem import derivative_matrix, total_cost
from .tableau import check_feasible, compute_duals

DEFAULT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class KktReport:
    w: np.ndarray
    cs: np.ndarray
    max_stationarity_violation: float
    max_nonneg_violation: float
    max_cs_violation: float
    satisfied: bool
    tol: float = DEFAULT_TOL
    scale: float = 1.0

    def to_dict(self):
        return {
            "w": self.w.tolist(),
            "cs": self.cs.tolist(),
            "max_stationarity_violation": self.max_stationarity_violation,
            "max_nonneg_violation": self.max_nonneg_violation,
            "max_cs_violation": self.max_cs_violation,
            "satisfied": self.satisfied,
        }


def _exact_reduced(d, u, v):
    return float(Fraction(d) - Fraction(u) - Fraction(v))


def reduced_derivatives(problem, x, duals):
    """``w_ij = f'_ij(x_ij) - u_i - v_j`` for every cell, evaluated exactly then rounded."""
    x = np.asarray(x, dtype=float)
    if x.shape != problem.shape or len(duals.u) != problem.m or len(duals.v) != problem.n:
        raise DimensionMismatchError("allocation, duals and problem disagree in shape")
    d = derivative_matrix(problem, x)
    w = np.empty(problem.shape)
    for i in range(problem.m):
        for j in range(problem.n):
            w[i, j] = _exact_reduced(d[i, j], duals.u[i], duals.v[j])
    return w


def cost_scale(problem, x):
    return max(1.0, abs(total_cost(problem, x)))


def check_kkt(problem, x, basis, tol=DEFAULT_TOL):
    x = np.asarray(x, dtype=float)
    check_feasible(problem, x)
    duals = compute_duals(problem, x, basis)
    w = reduced_derivatives(problem, x, duals)
    cs = x * w
    basic = np.zeros(problem.shape, dtype=bool)
    for cell in basis:
        basic[cell] = True
    stationarity = float(np.max(np.abs(w[basic])))
    nonneg = max(0.0, float(-np.min(w)))
    comp = float(np.max(np.abs(cs[~basic]))) if np.any(~basic) else 0.0
    scale = cost_scale(problem, x)
    satisfied = stationarity <= tol and nonneg <= tol and float(np.max(np.abs(cs))) <= tol * scale
    return KktReport(w, cs, stationarity, nonneg, comp, bool(satisfied), tol, scale)
