"""Initial basic feasible solutions.

All four rules share one cross-out loop: pick an active cell, ship as much
as the tighter of its row and column allows, and retire one exhausted line.
When both lines run out together the column is retired (unless it is the
last active column), leaving a zero-valued basic cell in the row.  Each
picked cell retires a line that never appears again, so the picked cells
always form a spanning tree of m+n-1 cells.
"""

from __future__ import annotations

import enum

import numpy as np

from .problem import cell_derivative, validate


class IbfsRule(enum.Enum):
    NORTHWEST = "northwest"
    VOGEL = "vogel"
    ROWMIN = "rowmin"
    LEASTCOST = "leastcost"


def _northwest(rows, cols, cost):
    return min(rows), min(cols)


def _least_cost(rows, cols, cost):
    return min(((i, j) for i in rows for j in cols), key=lambda c: (cost[c], c))


def _row_minima(rows, cols, cost):
    i = min(rows)
    return i, min(cols, key=lambda j: (cost[i, j], j))


def _penalty(values):
    values = sorted(values)
    if len(values) == 1:
        return values[0]
    return values[1] - values[0]


def _vogel(rows, cols, cost):
    # rows outrank columns on equal penalty, then lower index
    best = None
    for i in sorted(rows):
        key = (-_penalty([cost[i, j] for j in cols]), 0, i)
        if best is None or key < best[0]:
            best = (key, ("row", i))
    for j in sorted(cols):
        key = (-_penalty([cost[i, j] for i in rows]), 1, j)
        if key < best[0]:
            best = (key, ("col", j))
    kind, k = best[1]
    if kind == "row":
        return k, min(cols, key=lambda j: (cost[k, j], j))
    return min(rows, key=lambda i: (cost[i, k], i)), k


_PICKERS = {
    IbfsRule.NORTHWEST: _northwest,
    IbfsRule.VOGEL: _vogel,
    IbfsRule.ROWMIN: _row_minima,
    IbfsRule.LEASTCOST: _least_cost,
}


def initial_solution(problem, rule=IbfsRule.NORTHWEST):
    """Return ``(x, basis)`` for a validated, balanced problem.

    Nonlinear cells are ranked by their marginal cost at zero.
    """
    validate(problem)
    rule = IbfsRule(rule)
    m, n = problem.shape
    cost = np.array([[cell_derivative(model, 0.0) for model in row] for row in problem.costs])
    rs = problem.supply.astype(float)
    rd = problem.demand.astype(float)
    eps = problem.feas_tol
    rows, cols = set(range(m)), set(range(n))
    x = np.zeros((m, n))
    basis = []
    pick = _PICKERS[rule]
    while rows and cols:
        i, j = pick(rows, cols, cost)
        q = min(rs[i], rd[j])
        x[i, j] += q
        basis.append((i, j))
        rs[i] -= q
        rd[j] -= q
        if len(rows) == 1 and len(cols) == 1:
            break
        row_done = rs[i] <= eps
        col_done = rd[j] <= eps
        if col_done and (not row_done or len(cols) > 1):
            cols.discard(j)
            rd[j] = 0.0
        else:
            rows.discard(i)
            rs[i] = 0.0
    return x, tuple(basis)
