"""Brute-force references for checking the solvers.

Nothing here is used by the solvers themselves.  ``enumerate_vertices`` and
``global_min_vertex`` are exhaustive over the vertices of the transportation
polytope (the exact optimum for linear and concave costs).
``convex_reference`` is an independent Frank-Wolfe minimizer for convex
costs whose only shared piece is ``solve_linear`` as the linear oracle.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import NotConcaveError, NotConvexError, TooLargeError
from .ibfs import IbfsRule, initial_solution
from .problem import CostClass, Linear, Problem, classify, derivative_matrix, total_cost, validate
from .solvers import SolverOptions, solve_linear

DEFAULT_CAP = 100_000
CLAMP = -1e-9


def default_cap():
    return int(os.environ.get("NLTRANS_ORACLE_CAP", DEFAULT_CAP))


@dataclass(frozen=True, eq=False)
class Vertex:
    basis: tuple
    x: np.ndarray
    objective: float


def spanning_tree_count(m, n):
    """Number of spanning trees of the complete bipartite graph K(m, n)."""
    return m ** (n - 1) * n ** (m - 1)


def spanning_trees(m, n):
    """Yield every spanning tree of K(m, n) as a tuple of cells.

    Edges are decided in row-major order: include when it joins two
    components, exclude when the remaining edges can still connect the graph.
    """
    edges = [(i, j) for i in range(m) for j in range(n)]
    need = m + n - 1

    def find(parent, a):
        while parent[a] != a:
            a = parent[a]
        return a

    def connectable(parent, k):
        p = list(parent)
        for i, j in edges[k:]:
            ra, rb = find(p, i), find(p, m + j)
            if ra != rb:
                p[ra] = rb
        root = find(p, 0)
        return all(find(p, a) == root for a in range(m + n))

    def rec(k, parent, chosen):
        if len(chosen) == need:
            yield tuple(chosen)
            return
        if len(chosen) + len(edges) - k < need:
            return
        i, j = edges[k]
        ra, rb = find(parent, i), find(parent, m + j)
        if ra != rb:
            joined = list(parent)
            joined[ra] = rb
            chosen.append((i, j))
            yield from rec(k + 1, joined, chosen)
            chosen.pop()
        if connectable(parent, k + 1):
            yield from rec(k + 1, parent, chosen)

    yield from rec(0, list(range(m + n)), [])


def tree_flows(supply, demand, tree):
    """Flows on the cells of ``tree`` that meet every margin (may be negative)."""
    m, n = len(supply), len(demand)
    rest = [float(s) for s in supply] + [float(d) for d in demand]
    incident = [set() for _ in range(m + n)]
    for k, (i, j) in enumerate(tree):
        incident[i].add(k)
        incident[m + j].add(k)
    flows = [0.0] * len(tree)
    leaves = [a for a in range(m + n) if len(incident[a]) == 1]
    while leaves:
        a = leaves.pop()
        if len(incident[a]) != 1:
            continue
        k = incident[a].pop()
        i, j = tree[k]
        b = m + j if a == i else i
        flows[k] = rest[a]
        rest[b] -= rest[a]
        rest[a] = 0.0
        incident[b].discard(k)
        if len(incident[b]) == 1:
            leaves.append(b)
    return flows


def enumerate_vertices(problem, cap=None):
    """Every feasible basic solution, one entry per spanning-tree basis."""
    validate(problem)
    m, n = problem.shape
    cap = default_cap() if cap is None else cap
    count = spanning_tree_count(m, n)
    if count > cap:
        raise TooLargeError(count, cap)
    catalog = []
    for tree in spanning_trees(m, n):
        flows = tree_flows(problem.supply, problem.demand, tree)
        if min(flows) < CLAMP * max(1.0, float(np.sum(problem.supply))):
            continue
        x = np.zeros(problem.shape)
        for cell, q in zip(tree, flows):
            x[cell] = max(q, 0.0)
        catalog.append(Vertex(tree, x, total_cost(problem, x)))
    return catalog


def global_min_vertex(problem):
    """Cheapest vertex of the transportation polytope, by exhaustive search.

    Every vertex is reachable by repeatedly picking a cell (i, j), shipping
    min(remaining supply i, remaining demand j) and retiring the exhausted
    line(s).  Costs are separable, so the cheapest completion depends only
    on the remaining margins; the search is memoized on them and pruned by
    a lower bound that holds for linear and concave cells (f(q)/q does not
    increase in q when f is concave with f(0) = 0).  Returns
    ``(x, objective)``.
    """
    validate(problem)
    cls = classify(problem)
    if cls not in (CostClass.LINEAR, CostClass.CONCAVE):
        raise NotConcaveError("vertex optimum is only guaranteed for linear or concave costs")
    costs = problem.costs
    exact = {}
    floor = {}
    bounds = {}

    def lower_bound(rows, cols):
        key = (rows, cols)
        if key not in bounds:
            if not rows or not cols:
                bounds[key] = 0.0
            else:
                slopes = [[costs[i][j].value(min(s, d)) / min(s, d) for j, d in cols]
                          for i, s in rows]
                by_row = sum(s * min(r) for (_, s), r in zip(rows, slopes))
                by_col = sum(d * min(col) for (_, d), col in zip(cols, zip(*slopes)))
                bounds[key] = max(by_row, by_col)
        return bounds[key]

    def children(rows, cols):
        for a, (i, s) in enumerate(rows):
            for b, (j, d) in enumerate(cols):
                q = min(s, d)
                nr = rows[:a] + rows[a + 1:] if s <= d else rows[:a] + ((i, s - q),) + rows[a + 1:]
                nc = cols[:b] + cols[b + 1:] if d <= s else cols[:b] + ((j, d - q),) + cols[b + 1:]
                c = costs[i][j].value(q)
                yield c + lower_bound(nr, nc), c, (i, j, q), (nr, nc)

    def search(state, bound):
        # exact (value, cells) when value < bound, else (lower bound >= bound, None)
        if state in exact:
            return exact[state]
        rows, cols = state
        if not rows or not cols:
            exact[state] = (0.0, ())
            return exact[state]
        lb = max(floor.get(state, -math.inf), lower_bound(rows, cols))
        if lb >= bound:
            return lb, None
        best_value, best_cells = math.inf, None
        for estimate, c, cell, child in sorted(children(rows, cols), key=lambda t: t[0]):
            limit = min(bound, best_value)
            if estimate >= limit:
                break
            value, cells = search(child, limit - c)
            if cells is not None and c + value < best_value:
                best_value, best_cells = c + value, (cell,) + cells
        if best_cells is not None and best_value < bound:
            exact[state] = (best_value, best_cells)
            return exact[state]
        floor[state] = bound
        return bound, None

    rows = tuple((i, float(s)) for i, s in enumerate(problem.supply) if s > 0)
    cols = tuple((j, float(d)) for j, d in enumerate(problem.demand) if d > 0)
    _, cells = search((rows, cols), math.inf)
    x = np.zeros(problem.shape)
    for i, j, q in cells:
        x[i, j] = q
    return x, total_cost(problem, x)


def _segment_min(problem, x, d, gmax):
    """argmin over g in [0, gmax] of total_cost(x + g*d) for convex costs."""
    cells = [tuple(c) for c in np.argwhere(d != 0)]

    def slope(g):
        return math.fsum(problem.costs[i][j].derivative(max(0.0, x[i, j] + g * d[i, j])) * d[i, j]
                         for i, j in cells)

    if not cells:
        return 0.0
    g0 = slope(0.0)
    if g0 >= 0:
        return 0.0
    g1 = slope(gmax)
    if g1 <= 0:
        return gmax
    # exact when every cell is linear or quadratic; bisection otherwise
    guess = gmax * g0 / (g0 - g1)
    if abs(slope(guess)) <= 1e-12 * (abs(g0) + abs(g1)):
        return guess
    lo, hi = 0.0, gmax
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            return lo
        if slope(mid) > 0:
            hi = mid
        else:
            lo = mid


def convex_reference(problem, tol=1e-9, ibfs_rule=IbfsRule.NORTHWEST, max_iterations=1000,
                     inner_iterations=2000):
    """Minimum of a convex problem by Frank-Wolfe with pairwise corrections.

    Each outer iteration linearizes the cost at the current point and solves
    that linear transportation problem for the Frank-Wolfe vertex.  The
    point is kept as a convex combination of the vertices found so far;
    between linear solves, weight is shifted from the worst to the best
    active vertex with exact line searches.  Stops when the Frank-Wolfe
    duality gap, an upper bound on the distance to the optimum, falls below
    ``tol * max(1, |cost|)``.
    """
    validate(problem)
    if classify(problem) not in (CostClass.LINEAR, CostClass.CONVEX):
        raise NotConvexError("convex_reference needs linear or convex cell costs")
    x0, _ = initial_solution(problem, ibfs_rule)
    vertices, weights = [x0], [1.0]
    x = x0.copy()
    lp_options = SolverOptions(ibfs_rule=ibfs_rule)
    for _ in range(max_iterations):
        grad = derivative_matrix(problem, x)
        linear = Problem(problem.supply, problem.demand,
                         [[Linear(float(g)) for g in row] for row in grad])
        s = solve_linear(linear, lp_options)[0].x
        threshold = tol * max(1.0, abs(total_cost(problem, x)))
        if float(np.sum(grad * (x - s))) <= threshold:
            break
        if not any(np.array_equal(s, v) for v in vertices):
            vertices.append(s)
            weights.append(0.0)
        for _ in range(inner_iterations):
            grad = derivative_matrix(problem, x)
            scores = [float(np.sum(grad * v)) for v in vertices]
            to = min(range(len(vertices)), key=scores.__getitem__)
            away = max((k for k in range(len(vertices)) if weights[k] > 0), key=scores.__getitem__)
            if scores[away] - scores[to] <= 0.1 * threshold:
                break
            step = _segment_min(problem, x, vertices[to] - vertices[away], weights[away])
            if step <= 0:
                break
            weights[to] += step
            weights[away] -= step
            x = np.maximum(x + step * (vertices[to] - vertices[away]), 0.0)
        keep = [k for k, wt in enumerate(weights) if wt > 1e-15]
        vertices = [vertices[k] for k in keep]
        weights = [weights[k] for k in keep]
    return total_cost(problem, x)
