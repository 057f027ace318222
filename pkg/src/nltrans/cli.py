"""Command-line front end: ``nltrans solve problem.json [options]``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import TooLargeError, TransportError
from .ibfs import IbfsRule
from .problem import CostClass, Problem, balance, cell_derivative, classify
from .solvers import SolverOptions, Status, solve, solve_concave, solve_convex, solve_linear

ALGORITHMS = {
    "auto": solve,
    "linear": solve_linear,
    "concave": solve_concave,
    "convex": solve_convex,
}

SIGNIFICANT_DIGITS = 12

_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
_cell = {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}
_nullable_number = {"type": ["number", "null"]}

OUTPUT_SCHEMA = {
    "type": "object",
    "required": ["status", "objective", "iterations", "cost_class", "algorithm",
                 "dummy", "allocation", "basis"],
    "properties": {
        "status": {"enum": [s.value for s in Status]},
        "objective": {"type": "number"},
        "iterations": {"type": "integer", "minimum": 0},
        "cost_class": {"enum": [c.value for c in CostClass]},
        "algorithm": {"enum": list(ALGORITHMS)},
        "dummy": {"enum": [None, "row", "column"]},
        "allocation": _matrix,
        "basis": {"type": "array", "items": _cell},
        "kkt": {
            "type": "object",
            "required": ["w", "cs", "max_stationarity_violation", "max_nonneg_violation",
                         "max_cs_violation", "satisfied"],
            "properties": {
                "w": _matrix,
                "cs": _matrix,
                "max_stationarity_violation": {"type": "number"},
                "max_nonneg_violation": {"type": "number"},
                "max_cs_violation": {"type": "number"},
                "satisfied": {"type": "boolean"},
            },
        },
        "trace": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["iteration", "entering", "leaving", "case", "theta", "step",
                             "objective_before", "objective_after", "basis_changed"],
                "properties": {
                    "iteration": {"type": "integer"},
                    "entering": _cell,
                    "leaving": {"anyOf": [_cell, {"type": "null"}]},
                    "case": {"enum": [None, 1, 2, 3]},
                    "theta": {"type": "number"},
                    "step": _nullable_number,
                    "objective_before": {"type": "number"},
                    "objective_after": {"type": "number"},
                    "basis_changed": {"type": "boolean"},
                },
            },
        },
        "oracle_method": {"enum": ["vertex_search", "frank_wolfe", None]},
        "oracle_vertices": {"type": ["integer", "null"]},
        "oracle_objective": _nullable_number,
        "oracle_gap": _nullable_number,
    },
}


def _round(value):
    if isinstance(value, float):
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, dict):
        return {k: _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    return value


def render_tableau(problem, x, basis):
    """Fixed-width tableau: ``*`` marks basic cells, each cell shows ``x @ marginal cost``."""
    m, n = problem.shape
    x = np.asarray(x, dtype=float)
    basic = set(map(tuple, basis))
    body = [
        [f"{'*' if (i, j) in basic else ' '}{x[i, j]:.6g} @ {cell_derivative(problem.costs[i][j], x[i, j]):.6g}"
         for j in range(n)]
        for i in range(m)
    ]
    header = [f"D{j + 1}" for j in range(n)]
    demand = [f"{d:.6g}" for d in problem.demand]
    supply = [f"{s:.6g}" for s in problem.supply]
    labels = [f"S{i + 1}" for i in range(m)]
    width = max(len(t) for t in header + demand + [c for row in body for c in row])
    label_w = max(len(t) for t in labels + ["demand"])
    supply_w = max(len(t) for t in supply + ["supply"])

    def line(label, cells, margin):
        cells = " | ".join(c.ljust(width) for c in cells)
        return f"{label.ljust(label_w)} | {cells} | {margin.ljust(supply_w)}".rstrip()

    rule = "-" * label_w + "-+-" + "-+-".join("-" * width for _ in range(n)) + "-+-" + "-" * supply_w
    out = [line("", header, "supply"), rule]
    out += [line(labels[i], body[i], supply[i]) for i in range(m)]
    out += [rule, line("demand", demand, "")]
    return "\n".join(out) + "\n"


def _oracle(problem, objective):
    from . import oracle

    cls = classify(problem)
    if cls is CostClass.CONVEX:
        ref = oracle.convex_reference(problem)
        return {"oracle_method": "frank_wolfe", "oracle_vertices": None,
                "oracle_objective": ref, "oracle_gap": objective - ref}
    if cls is CostClass.MIXED:
        return {"oracle_method": None, "oracle_vertices": None,
                "oracle_objective": None, "oracle_gap": None}
    try:
        count = len(oracle.enumerate_vertices(problem))
    except TooLargeError:
        count = None
    _, best = oracle.global_min_vertex(problem)
    return {"oracle_method": "vertex_search", "oracle_vertices": count,
            "oracle_objective": best, "oracle_gap": objective - best}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nltrans",
        description="Transportation problems with linear, convex, concave or volume-discount costs.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("input", help="problem document (JSON)")
    p.add_argument("--algorithm", choices=list(ALGORITHMS), default="auto")
    p.add_argument("--ibfs", choices=[r.value for r in IbfsRule], default="northwest")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--trace", action="store_true", help="include per-iteration records")
    p.add_argument("--emit-kkt", action="store_true", help="include the KKT report")
    p.add_argument("--oracle", action="store_true",
                   help="compare with a brute-force reference (small instances only)")
    p.add_argument("--format", choices=["json", "text"], default="json")
    return parser


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise SystemExit(_fail(f"file not found: {path}"))
    except json.JSONDecodeError as exc:
        raise SystemExit(_fail(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"))
    except OSError as exc:
        raise SystemExit(_fail(f"{path}: {exc.strerror}"))
    return Problem.from_dict(doc)


def _fail(message):
    print(f"nltrans: error: {message}", file=sys.stderr)
    return 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    if not args.tol > 0:
        return _fail("--tol must be positive")
    if args.max_iters < 1:
        return _fail("--max-iters must be at least 1")
    try:
        problem = _load(args.input)
        balanced = balance(problem)
        dummy = None
        if balanced.m > problem.m:
            dummy = "row"
        elif balanced.n > problem.n:
            dummy = "column"
        options = SolverOptions(tol=args.tol, max_iterations=args.max_iters,
                                ibfs_rule=args.ibfs, trace=args.trace)
        solution, trace = ALGORITHMS[args.algorithm](balanced, options)
        doc = {
            "status": solution.status.value,
            "objective": solution.objective,
            "iterations": solution.iterations,
            "cost_class": classify(balanced).value,
            "algorithm": args.algorithm,
            "dummy": dummy,
            "allocation": solution.x.tolist(),
            "basis": [list(cell) for cell in sorted(solution.basis)],
        }
        if args.emit_kkt:
            doc["kkt"] = solution.kkt.to_dict()
        if args.trace:
            doc["trace"] = [record.to_dict() for record in trace]
        if args.oracle:
            doc.update(_oracle(balanced, solution.objective))
    except SystemExit as exc:
        return exc.code
    except (TransportError, TypeError, ValueError) as exc:
        return _fail(str(exc))

    if args.format == "json":
        print(json.dumps(_round(doc), indent=2))
    else:
        print(render_tableau(balanced, solution.x, solution.basis), end="")
        for key in ("status", "objective", "iterations", "cost_class", "dummy",
                    "oracle_objective", "oracle_gap"):
            if key in doc:
                print(f"{key}: {_round(doc[key])}")
    return 2 if solution.status is Status.ITERATION_LIMIT else 0


if __name__ == "__main__":
    sys.exit(main())
