"""Transportation problems with separable per-cell shipping costs.

Each cell (i, j) carries its own cost function f_ij of the shipped quantity
x_ij.  The objective is the sum of all cell costs, subject to row sums equal
to the supplies and column sums equal to the demands.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidCostModelError,
    NegativeArgumentError,
    NegativeQuantityError,
    UnbalancedError,
)

DEFAULT_DERIVATIVE_CAP = 1e12


@dataclass(frozen=True)
class Linear:
    """f(x) = c*x"""

    c: float

    kind = "linear"

    def value(self, x):
        return self.c * x

    def derivative(self, x):
        return self.c

    def check(self):
        if not math.isfinite(self.c):
            return "rate must be finite"
        return None

    @property
    def is_linear(self):
        return True

    @property
    def is_convex(self):
        return True

    @property
    def is_concave(self):
        return True

    def to_dict(self):
        return {"kind": self.kind, "c": self.c}


@dataclass(frozen=True)
class Quadratic:
    """f(x) = c*x + q*x**2; convex for q >= 0, concave for q <= 0."""

    c: float
    q: float

    kind = "quadratic"

    def value(self, x):
        return self.c * x + self.q * x * x

    def derivative(self, x):
        return self.c + 2.0 * self.q * x

    def check(self):
        if not (math.isfinite(self.c) and math.isfinite(self.q)):
            return "coefficients must be finite"
        return None

    @property
    def is_linear(self):
        return self.q == 0

    @property
    def is_convex(self):
        return self.q >= 0

    @property
    def is_concave(self):
        return self.q <= 0

    def to_dict(self):
        return {"kind": self.kind, "c": self.c, "q": self.q}


@dataclass(frozen=True)
class PowerConcave:
    """f(x) = c * x**p with c >= 0 and 0 < p <= 1.

    The derivative is unbounded at zero for p < 1; it is clipped to ``cap``
    so that dual arithmetic stays finite.
    """

    c: float
    p: float
    cap: float = DEFAULT_DERIVATIVE_CAP

    kind = "power"

    def value(self, x):
        if x == 0:
            return 0.0
        return self.c * x**self.p

    def derivative(self, x):
        if self.c == 0:
            return 0.0
        if self.p == 1:
            return self.c
        if x == 0:
            return self.cap
        return min(self.cap, self.c * self.p * x ** (self.p - 1.0))

    def check(self):
        if not (math.isfinite(self.c) and self.c >= 0):
            return "coefficient c must be finite and >= 0"
        if not (0 < self.p <= 1):
            return "exponent p must lie in (0, 1]"
        if not self.cap > 0:
            return "derivative cap must be positive"
        return None

    @property
    def is_linear(self):
        return self.p == 1 or self.c == 0

    @property
    def is_convex(self):
        return self.is_linear

    @property
    def is_concave(self):
        return True

    def to_dict(self):
        d = {"kind": self.kind, "c": self.c, "p": self.p}
        if self.cap != DEFAULT_DERIVATIVE_CAP:
            d["cap"] = self.cap
        return d


@dataclass(frozen=True)
class PiecewiseLinearDiscount:
    """Incremental volume-discount schedule.

    Units in ``[breaks[k], breaks[k+1])`` are charged ``rates[k]`` each; the
    last segment is unbounded.  ``breaks[0]`` must be 0 and the rates must be
    positive and strictly decreasing, which makes f continuous and concave.
    """

    breaks: tuple
    rates: tuple

    kind = "discount"

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))

    def _segment(self, x):
        # right-continuous segment lookup: a breakpoint belongs to the segment it starts
        k = 0
        while k + 1 < len(self.breaks) and x >= self.breaks[k + 1]:
            k += 1
        return k

    def value(self, x):
        total = 0.0
        for k, rate in enumerate(self.rates):
            lo = self.breaks[k]
            if x <= lo:
                break
            hi = self.breaks[k + 1] if k + 1 < len(self.breaks) else math.inf
            total += rate * (min(x, hi) - lo)
        return total

    def derivative(self, x):
        return self.rates[self._segment(x)]

    def left_derivative(self, x):
        if x == 0:
            return self.rates[0]
        k = 0
        while k + 1 < len(self.breaks) and x > self.breaks[k + 1]:
            k += 1
        return self.rates[k]

    def check(self):
        if len(self.breaks) == 0 or len(self.breaks) != len(self.rates):
            return "breaks and rates must be non-empty and of equal length"
        if self.breaks[0] != 0:
            return "first breakpoint must be 0"
        if any(b1 <= b0 for b0, b1 in zip(self.breaks, self.breaks[1:])):
            return "breakpoints must be strictly increasing"
        if any(not math.isfinite(b) for b in self.breaks):
            return "breakpoints must be finite"
        if any(not (math.isfinite(r) and r > 0) for r in self.rates):
            return "rates must be finite and positive"
        if any(r1 >= r0 for r0, r1 in zip(self.rates, self.rates[1:])):
            return "rates must be strictly decreasing"
        return None

    @property
    def is_linear(self):
        return len(self.rates) == 1

    @property
    def is_convex(self):
        return self.is_linear

    @property
    def is_concave(self):
        return True

    def to_dict(self):
        return {"kind": self.kind, "breaks": list(self.breaks), "rates": list(self.rates)}


COST_MODELS = {cls.kind: cls for cls in (Linear, Quadratic, PowerConcave, PiecewiseLinearDiscount)}


class CostClass(enum.Enum):
    LINEAR = "linear"
    CONVEX = "convex"
    CONCAVE = "concave"
    MIXED = "mixed"


def _as_vector(values):
    return np.asarray(values, dtype=float).reshape(-1)


@dataclass(frozen=True, eq=False)
class Problem:
    """A transportation problem.

    Parameters
    ----------
    supply : sequence of float
        Quantity available at each of the m sources.
    demand : sequence of float
        Quantity required at each of the n destinations.
    costs : m x n nested sequence of cost models
        ``costs[i][j]`` prices the flow from source i to destination j.
    """

    supply: np.ndarray
    demand: np.ndarray
    costs: tuple = field(repr=False)

    def __post_init__(self):
        supply = _as_vector(self.supply)
        demand = _as_vector(self.demand)
        supply.setflags(write=False)
        demand.setflags(write=False)
        object.__setattr__(self, "supply", supply)
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "costs", tuple(tuple(row) for row in self.costs))

    @property
    def m(self):
        return len(self.supply)

    @property
    def n(self):
        return len(self.demand)

    @property
    def shape(self):
        return (self.m, self.n)

    @property
    def feas_tol(self):
        return 1e-9 * max(1.0, float(np.sum(self.supply)))

    def __eq__(self, other):
        if not isinstance(other, Problem):
            return NotImplemented
        return (
            np.array_equal(self.supply, other.supply)
            and np.array_equal(self.demand, other.demand)
            and self.costs == other.costs
        )

    __hash__ = None

    @classmethod
    def from_dict(cls, doc):
        """Build a problem from the JSON document layout (see README)."""
        try:
            supply = doc["supply"]
            demand = doc["demand"]
            rows = doc["costs"]
        except (KeyError, TypeError) as exc:
            raise DimensionMismatchError(f"problem document lacks field {exc}") from None
        costs = []
        for i, row in enumerate(rows):
            costs.append([cost_model_from_dict(cell, (i, j)) for j, cell in enumerate(row)])
        return cls(supply, demand, costs)

    def to_dict(self):
        return {
            "supply": [float(s) for s in self.supply],
            "demand": [float(d) for d in self.demand],
            "costs": [[model.to_dict() for model in row] for row in self.costs],
        }


def cost_model_from_dict(doc, cell=None):
    if not isinstance(doc, dict) or doc.get("kind") not in COST_MODELS:
        kind = doc.get("kind") if isinstance(doc, dict) else doc
        raise InvalidCostModelError(cell, f"unknown cost kind {kind!r}")
    params = {k: v for k, v in doc.items() if k != "kind"}
    try:
        return COST_MODELS[doc["kind"]](**params)
    except TypeError as exc:
        raise InvalidCostModelError(cell, str(exc)) from None


def _validate_structure(problem):
    m, n = problem.shape
    if m < 1 or n < 1:
        raise DimensionMismatchError("need at least one source and one destination")
    if len(problem.costs) != m or any(len(row) != n for row in problem.costs):
        raise DimensionMismatchError(
            f"cost grid must be {m}x{n} to match supply and demand")
    for name, vec in (("supply", problem.supply), ("demand", problem.demand)):
        if not np.all(np.isfinite(vec)):
            raise NegativeQuantityError(f"{name} contains a non-finite value")
        if np.any(vec < 0):
            k = int(np.argmax(vec < 0))
            raise NegativeQuantityError(f"{name}[{k}] = {vec[k]:g} is negative")
    for i, row in enumerate(problem.costs):
        for j, model in enumerate(row):
            if type(model) not in COST_MODELS.values():
                raise InvalidCostModelError((i, j), f"not a cost model: {model!r}")
            rule = model.check()
            if rule is not None:
                raise InvalidCostModelError((i, j), rule)


def validate(problem):
    """Raise unless ``problem`` is well formed and balanced."""
    _validate_structure(problem)
    gap = float(np.sum(problem.supply) - np.sum(problem.demand))
    if abs(gap) > problem.feas_tol:
        raise UnbalancedError(gap)


def balance(problem):
    """Close a supply/demand gap with a zero-cost dummy destination or source."""
    _validate_structure(problem)
    gap = float(np.sum(problem.supply) - np.sum(problem.demand))
    if abs(gap) <= problem.feas_tol:
        return problem
    zero = Linear(0.0)
    if gap > 0:
        costs = [list(row) + [zero] for row in problem.costs]
        return Problem(problem.supply, np.append(problem.demand, gap), costs)
    costs = [list(row) for row in problem.costs] + [[zero] * problem.n]
    return Problem(np.append(problem.supply, -gap), problem.demand, costs)


def cell_cost(model, x):
    if x < 0:
        raise NegativeArgumentError(f"cost evaluated at negative quantity {x:g}")
    return model.value(x)


def cell_derivative(model, x):
    """Marginal cost of ``model`` at ``x`` (right-hand derivative at kinks)."""
    if x < 0:
        raise NegativeArgumentError(f"derivative evaluated at negative quantity {x:g}")
    return model.derivative(x)


def _check_shape(problem, x):
    x = np.asarray(x, dtype=float)
    if x.shape != problem.shape:
        raise DimensionMismatchError(f"allocation shape {x.shape} != problem shape {problem.shape}")
    return x


def total_cost(problem, x):
    x = _check_shape(problem, x)
    return math.fsum(
        cell_cost(model, x[i, j])
        for i, row in enumerate(problem.costs)
        for j, model in enumerate(row)
    )


def derivative_matrix(problem, x):
    x = _check_shape(problem, x)
    out = np.empty(problem.shape)
    for i, row in enumerate(problem.costs):
        for j, model in enumerate(row):
            out[i, j] = cell_derivative(model, x[i, j])
    return out


def classify(problem):
    cells = [model for row in problem.costs for model in row]
    if all(model.is_linear for model in cells):
        return CostClass.LINEAR
    if all(model.is_convex for model in cells):
        return CostClass.CONVEX
    if all(model.is_concave for model in cells):
        return CostClass.CONCAVE
    return CostClass.MIXED
