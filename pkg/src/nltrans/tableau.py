"""Transportation tableau: allocations, spanning-tree bases, potentials, loops.

Rows and columns are the two node classes of a bipartite graph; a basis is
a set of m+n-1 cells whose edges form a spanning tree of that graph.  Node
ids are ``i`` for row i and ``m + j`` for column j.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    ColSumViolationError,
    DimensionMismatchError,
    EmptyLoopError,
    EnteringIsBasicError,
    NegativeCellError,
    NotATreeError,
    OutOfRangeCellError,
    RowSumViolationError,
    ThetaTooLargeError,
)
from .problem import cell_derivative


@dataclass(frozen=True)
class Duals:
    """Row potentials ``u`` and column potentials ``v`` with ``u[0] == 0``.

    Values are exact ``Fraction`` objects: they are sums and differences of
    float marginal costs along tree paths, so reduced derivatives on basic
    cells come out as exact zeros.
    """

    u: tuple
    v: tuple

    def as_arrays(self):
        return np.array([float(a) for a in self.u]), np.array([float(b) for b in self.v])


def check_feasible(problem, x):
    x = np.asarray(x, dtype=float)
    if x.shape != problem.shape:
        raise DimensionMismatchError(f"allocation shape {x.shape} != problem shape {problem.shape}")
    if np.any(x < 0):
        i, j = np.argwhere(x < 0)[0]
        raise NegativeCellError((int(i), int(j)), float(x[i, j]))
    tol = problem.feas_tol
    row_gap = x.sum(axis=1) - problem.supply
    for i, gap in enumerate(row_gap):
        if abs(gap) > tol:
            raise RowSumViolationError(i, float(gap))
    col_gap = x.sum(axis=0) - problem.demand
    for j, gap in enumerate(col_gap):
        if abs(gap) > tol:
            raise ColSumViolationError(j, float(gap))


def _check_range(m, n, cells):
    for i, j in cells:
        if not (0 <= i < m and 0 <= j < n):
            raise OutOfRangeCellError(f"cell {(i, j)} outside a {m}x{n} tableau")


def is_spanning_tree(m, n, basis):
    basis = list(basis)
    _check_range(m, n, basis)
    if len(basis) != m + n - 1:
        return False
    parent = list(range(m + n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in basis:
        ra, rb = find(i), find(m + j)
        if ra == rb:
            return False
        parent[ra] = rb
    # m+n-1 edges without a cycle on m+n nodes are necessarily connected
    return True


def _adjacency(m, n, basis):
    adj = [[] for _ in range(m + n)]
    for i, j in sorted(basis):
        adj[i].append(m + j)
        adj[m + j].append(i)
    return adj


def compute_duals(problem, x, basis):
    """Solve ``f'_ij(x_ij) - u_i - v_j = 0`` over the basic cells, anchored at u[0] = 0."""
    m, n = problem.shape
    if not is_spanning_tree(m, n, basis):
        raise NotATreeError(f"basis {sorted(basis)} is not a spanning tree of K({m},{n})")
    x = np.asarray(x, dtype=float)
    marginal = {
        (i, j): Fraction(cell_derivative(problem.costs[i][j], x[i, j])) for i, j in basis
    }
    pot = [None] * (m + n)
    pot[0] = Fraction(0)
    adj = _adjacency(m, n, basis)
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if pot[b] is None:
                cell = (a, b - m) if a < m else (b, a - m)
                pot[b] = marginal[cell] - pot[a]
                queue.append(b)
    return Duals(tuple(pot[:m]), tuple(pot[m:]))


def _tree_path(m, n, basis, start, goal):
    adj = _adjacency(m, n, basis)
    prev = {start: None}
    queue = deque([start])
    while queue:
        a = queue.popleft()
        if a == goal:
            break
        for b in adj[a]:
            if b not in prev:
                prev[b] = a
                queue.append(b)
    path = [goal]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def find_loop(m, n, basis, entering):
    """Cycle closed by ``entering`` with the basis tree.

    Position 0 is the entering cell, position 1 shares its column, and the
    cycle then alternates row and column moves.  Even positions gain theta,
    odd positions lose it.
    """
    basis = list(basis)
    _check_range(m, n, basis + [entering])
    entering = (int(entering[0]), int(entering[1]))
    if entering in set(basis):
        raise EnteringIsBasicError(f"cell {entering} is already basic")
    if not is_spanning_tree(m, n, basis):
        raise NotATreeError(f"basis {sorted(basis)} is not a spanning tree of K({m},{n})")
    i, j = entering
    path = _tree_path(m, n, basis, m + j, i)
    loop = [entering]
    for a, b in zip(path, path[1:]):
        loop.append((b, a - m) if a >= m else (a, b - m))
    return loop


def reversed_loop(loop):
    """Re-index ``loop`` so that its first cell moves in the opposite direction.

    The original entering cell lands at position 1, the first theta-losing
    slot, so it wins ties when picking the blocking cell.
    """
    return loop[-1:] + loop[:-1]


def max_theta(x, loop):
    """Largest feasible shift around ``loop`` and the first cell that blocks it."""
    if len(loop) < 2:
        raise EmptyLoopError("loop has no theta-losing cells")
    x = np.asarray(x, dtype=float)
    theta, blocking = None, None
    for cell in loop[1::2]:
        if theta is None or x[cell] < theta:
            theta, blocking = float(x[cell]), cell
    return max(theta, 0.0), blocking


def apply_theta(x, loop, theta):
    limit, _ = max_theta(x, loop)
    if theta < 0 or theta > limit + 1e-12 * max(1.0, limit):
        raise ThetaTooLargeError(f"theta {theta:g} outside [0, {limit:g}]")
    y = np.array(x, dtype=float)
    if theta == 0:
        return y
    for k, cell in enumerate(loop):
        if k % 2 == 0:
            y[cell] += theta
        elif y[cell] <= theta:
            y[cell] = 0.0
        else:
            y[cell] -= theta
    return y
