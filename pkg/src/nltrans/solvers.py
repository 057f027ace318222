"""Solution algorithms for separable-cost transportation problems.

``solve_linear``
    Transportation simplex (MODI): pivot on the most negative reduced cost.
``solve_concave``
    Extreme-point descent.  A concave objective attains its minimum at a
    vertex, so iterates stay on vertices and pivot along improving edges.
``solve_convex``
    Transportation convex simplex.  Nonbasic cells may carry flow; each
    iteration either raises the nonbasic cell with the most negative reduced
    derivative or lowers the positive nonbasic cell with the largest
    ``x * w`` product, then line-searches between the current point and the
    full-pivot point.

All three start from an initial basic feasible solution and stop when the
KKT conditions hold at tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InfeasibleEndpointError, TransportError, WrongCostClassError
from .ibfs import IbfsRule, initial_solution
from .kkt import DEFAULT_TOL, KktReport, check_kkt, cost_scale, reduced_derivatives
from .problem import CostClass, classify, total_cost, validate
from .tableau import apply_theta, check_feasible, compute_duals, find_loop, max_theta, reversed_loop

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Status(enum.Enum):
    OPTIMAL = "optimal"
    KKT_POINT = "kkt_point"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class SolverOptions:
    tol: float = DEFAULT_TOL
    max_iterations: int = 10000
    ibfs_rule: IbfsRule = IbfsRule.NORTHWEST
    line_search_tol: float = 1e-10
    trace: bool = False

    def __post_init__(self):
        object.__setattr__(self, "ibfs_rule", IbfsRule(self.ibfs_rule))
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.line_search_tol > 0:
            raise ValueError("line_search_tol must be positive")


@dataclass(frozen=True, eq=False)
class Solution:
    x: np.ndarray
    basis: tuple
    objective: float
    kkt: KktReport
    status: Status
    iterations: int

    def nonbasic_mask(self):
        mask = np.ones(self.x.shape, dtype=bool)
        for cell in self.basis:
            mask[cell] = False
        return mask


@dataclass(frozen=True)
class TraceRecord:
    """One iteration.

    ``step`` is the line-search weight on the *current* point: 1 keeps x^k,
    0 moves all the way to the full-pivot point y^k.  It is ``None`` for
    pure vertex pivots.
    """

    iteration: int
    entering: tuple
    theta: float
    objective_before: float
    objective_after: float
    basis_changed: bool
    leaving: tuple | None = None
    case: int | None = None
    step: float | None = None

    def to_dict(self):
        return {
            "iteration": self.iteration,
            "entering": list(self.entering),
            "leaving": list(self.leaving) if self.leaving is not None else None,
            "case": self.case,
            "theta": self.theta,
            "step": self.step,
            "objective_before": self.objective_before,
            "objective_after": self.objective_after,
            "basis_changed": self.basis_changed,
        }


@dataclass
class _Run:
    """Mutable bookkeeping for one solve call."""

    problem: object
    options: SolverOptions
    x: np.ndarray = None
    basis: list = None
    trace: list = field(default_factory=list)
    iterations: int = 0

    def __post_init__(self):
        x, basis = initial_solution(self.problem, self.options.ibfs_rule)
        self.x, self.basis = x, list(basis)

    def pivot(self, entering, leaving):
        self.basis[self.basis.index(leaving)] = entering

    def record(self, **kwargs):
        if self.options.trace:
            self.trace.append(TraceRecord(iteration=self.iterations, **kwargs))

    def nonbasic(self):
        basic = set(self.basis)
        m, n = self.problem.shape
        return [(i, j) for i in range(m) for j in range(n) if (i, j) not in basic]

    def reduced(self):
        duals = compute_duals(self.problem, self.x, self.basis)
        return reduced_derivatives(self.problem, self.x, duals)

    def finish(self, status):
        kkt = check_kkt(self.problem, self.x, self.basis, self.options.tol)
        solution = Solution(
            x=self.x,
            basis=tuple(self.basis),
            objective=total_cost(self.problem, self.x),
            kkt=kkt,
            status=status,
            iterations=self.iterations,
        )
        return solution, list(self.trace)


def _require(problem, allowed, name):
    validate(problem)
    cls = classify(problem)
    if cls not in allowed:
        raise WrongCostClassError(f"{name} cannot handle a {cls.value} problem")
    return cls


def _bland_leaving(x, loop):
    theta, _ = max_theta(x, loop)
    return min(cell for cell in loop[1::2] if x[cell] <= theta)


def solve(problem, options=None):
    """Dispatch on the cost class of ``problem``.

    Mixed problems run the convex simplex iteration, but without convexity
    a stop only certifies a KKT point.
    """
    options = options or SolverOptions()
    validate(problem)
    cls = classify(problem)
    if cls is CostClass.LINEAR:
        return solve_linear(problem, options)
    if cls is CostClass.CONVEX:
        return solve_convex(problem, options)
    if cls is CostClass.CONCAVE:
        return solve_concave(problem, options)
    return _convex_simplex(problem, options, certify=False)


def solve_linear(problem, options=None):
    options = options or SolverOptions()
    _require(problem, {CostClass.LINEAR}, "solve_linear")
    run = _Run(problem, options)
    tol = options.tol
    m, n = problem.shape
    while True:
        w = run.reduced()
        nonbasic = run.nonbasic()
        if not nonbasic:
            return run.finish(Status.OPTIMAL)
        entering = min(nonbasic, key=lambda c: (w[c], c))
        if w[entering] >= -tol:
            return run.finish(Status.OPTIMAL)
        if run.iterations >= options.max_iterations:
            return run.finish(Status.ITERATION_LIMIT)
        loop = find_loop(m, n, run.basis, entering)
        theta, leaving = max_theta(run.x, loop)
        if theta == 0:
            # degenerate: Bland's rule until the vertex is left
            entering = min(c for c in nonbasic if w[c] < -tol)
            loop = find_loop(m, n, run.basis, entering)
            theta, _ = max_theta(run.x, loop)
            leaving = _bland_leaving(run.x, loop)
        before = total_cost(problem, run.x)
        run.x = apply_theta(run.x, loop, theta)
        run.pivot(entering, leaving)
        run.iterations += 1
        run.record(entering=entering, leaving=leaving, theta=theta,
                   objective_before=before, objective_after=total_cost(problem, run.x),
                   basis_changed=True)


def solve_concave(problem, options=None):
    """Vertex-to-vertex descent for concave (or linear) costs.

    Nonbasic cells are tried in order of increasing reduced derivative; the
    first full pivot that lowers the cost by more than ``tol * scale`` is
    taken.  Cells with a nonnegative reduced derivative are tried too: a
    concave edge can rise before it falls, and cells at zero flow with an
    unbounded marginal cost would otherwise never enter.  If nothing
    improves but a degenerate candidate remains, a zero-length pivot by
    Bland's rule changes the basis without moving.
    """
    options = options or SolverOptions()
    _require(problem, {CostClass.LINEAR, CostClass.CONCAVE}, "solve_concave")
    run = _Run(problem, options)
    tol = options.tol
    m, n = problem.shape
    while True:
        w = run.reduced()
        nonbasic = sorted(run.nonbasic(), key=lambda c: (w[c], c))
        candidates = [c for c in nonbasic if w[c] < -tol]
        before = total_cost(problem, run.x)
        threshold = before - tol * max(1.0, abs(before))
        move = None
        for cell in nonbasic:
            loop = find_loop(m, n, run.basis, cell)
            theta, leaving = max_theta(run.x, loop)
            if theta == 0:
                continue
            y = apply_theta(run.x, loop, theta)
            after = total_cost(problem, y)
            if after < threshold:
                move = (cell, leaving, theta, y, after)
                break
        if move is None:
            if not candidates:
                return run.finish(Status.KKT_POINT)
            cell = min(candidates)
            loop = find_loop(m, n, run.basis, cell)
            theta, _ = max_theta(run.x, loop)
            leaving = _bland_leaving(run.x, loop)
            y = apply_theta(run.x, loop, theta)
            after = total_cost(problem, y)
            if theta > 0 and not after < before:
                return run.finish(Status.KKT_POINT)
            move = (cell, leaving, theta, y, after)
        if run.iterations >= options.max_iterations:
            return run.finish(Status.ITERATION_LIMIT)
        cell, leaving, theta, y, after = move
        run.x = y
        run.pivot(cell, leaving)
        run.iterations += 1
        run.record(entering=cell, leaving=leaving, theta=theta, objective_before=before,
                   objective_after=after, basis_changed=True)


def _segment(problem, x, y):
    delta = y - x
    cells = [tuple(c) for c in np.argwhere(delta != 0)]
    models = [problem.costs[i][j] for i, j in cells]
    xs = np.array([x[c] for c in cells])
    ys = np.array([y[c] for c in cells])
    return cells, models, xs, ys


def line_search(problem, x_k, y_k, tol=1e-10):
    """Minimize ``total_cost(lam * x_k + (1 - lam) * y_k)`` over ``lam`` in [0, 1].

    Returns ``(lam, x_next)``.  ``lam = 1`` keeps x_k and ``lam = 0`` is the
    full move to y_k.  Segments whose moving cells are all convex are
    searched by bisection on the directional derivative, which resolves the
    minimizer to machine precision; other segments use golden-section search
    on the cost itself, checked against both endpoints.
    """
    x_k = np.asarray(x_k, dtype=float)
    y_k = np.asarray(y_k, dtype=float)
    for point in (x_k, y_k):
        try:
            check_feasible(problem, point)
        except TransportError as exc:
            raise InfeasibleEndpointError(str(exc)) from exc
    cells, models, xs, ys = _segment(problem, x_k, y_k)
    if not cells:
        return 1.0, x_k.copy()
    dx = ys - xs

    def point(s):
        return (1.0 - s) * xs + s * ys

    def psi(s):
        return math.fsum(f.value(q) for f, q in zip(models, point(s)))

    def dpsi(s):
        return math.fsum(f.derivative(q) * d for f, q, d in zip(models, point(s), dx))

    if all(f.is_convex for f in models):
        # the slope bracket is authoritative; cost values cannot resolve it
        s = _bisect_slope(dpsi, tol)
    else:
        s = _golden(psi, tol)
        value, s = min((psi(t), t) for t in (s, 0.0, 1.0))
    lam = 1.0 - s
    return lam, lam * x_k + (1.0 - lam) * y_k


def _bisect_slope(dpsi, tol):
    g_lo = dpsi(0.0)
    if g_lo >= 0:
        return 0.0
    g_hi = dpsi(1.0)
    if g_hi <= 0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g = dpsi(mid)
        if g > 0:
            hi, g_hi = mid, g
        elif g < 0:
            lo, g_lo = mid, g
        else:
            return mid
    # secant on the final bracket; exact when the slope is affine
    return min(hi, max(lo, lo - g_lo * (hi - lo) / (g_hi - g_lo)))


def _golden(psi, tol):
    a, b = 0.0, 1.0
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = psi(c), psi(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = psi(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = psi(d)
    return c if fc <= fd else d


def solve_convex(problem, options=None):
    options = options or SolverOptions()
    _require(problem, {CostClass.LINEAR, CostClass.CONVEX}, "solve_convex")
    return _convex_simplex(problem, options, certify=True)


def _convex_simplex(problem, options, certify):
    run = _Run(problem, options)
    tol = options.tol
    m, n = problem.shape
    stalls = 0
    stall_limit = 10 * m * n
    while True:
        x = run.x
        w = run.reduced()
        nonbasic = run.nonbasic()
        if not nonbasic:
            break
        before = total_cost(problem, x)
        tol_cs = tol * max(1.0, abs(before))
        rl = min(nonbasic, key=lambda c: (w[c], c))
        st = min(nonbasic, key=lambda c: (-x[c] * w[c], c))
        d_rl, g_st = w[rl], x[st] * w[st]
        increase, decrease = d_rl < -tol, g_st > tol_cs
        if not (increase or decrease):
            break
        if run.iterations >= options.max_iterations:
            return run.finish(Status.ITERATION_LIMIT)

        moves = {}
        if increase:
            loop = find_loop(m, n, run.basis, rl)
            moves[2] = (rl, loop) + max_theta(x, loop)
        if decrease:
            loop = reversed_loop(find_loop(m, n, run.basis, st))
            moves[1] = (st, loop) + max_theta(x, loop)
        if increase and decrease:
            case = 3
            # larger first-order gain wins; ties go to the increase
            pick = 1 if g_st > abs(d_rl) * moves[2][2] else 2
        else:
            case = pick = 2 if increase else 1
        cell, loop, theta, blocking = moves[pick]

        if theta == 0:
            stalls += 1
            if stalls > stall_limit:
                break
            # degenerate: smallest eligible cell, smallest blocking cell
            eligible = [c for c in nonbasic if w[c] < -tol or x[c] * w[c] > tol_cs]
            cell = min(eligible)
            loop = find_loop(m, n, run.basis, cell)
            if not w[cell] < -tol:
                loop = reversed_loop(loop)
            theta, _ = max_theta(x, loop)
            blocking = _bland_leaving(x, loop)
        else:
            stalls = 0

        y = apply_theta(x, loop, theta)
        lam, x_next = line_search(problem, x, y, options.line_search_tol)
        full = bool(np.all(np.abs(x_next - y) <= 1e-9 * max(1.0, theta)))
        if full:
            x_next = y
        changed = full and blocking != cell
        if changed:
            run.pivot(cell, blocking)
        run.x = x_next
        run.iterations += 1
        run.record(entering=cell, leaving=blocking if changed else None, case=case,
                   theta=theta, step=lam, objective_before=before,
                   objective_after=total_cost(problem, x_next), basis_changed=changed)
    solution, trace = run.finish(Status.KKT_POINT)
    if certify and solution.kkt.satisfied:
        solution = replace(solution, status=Status.OPTIMAL)
    return solution, trace
