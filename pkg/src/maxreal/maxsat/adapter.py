"""Command-line MaxSAT solver speaking the usual `s`/`o`/`v` output protocol.

    python -m maxreal.maxsat.adapter [--backend cpsat|builtin] FILE.wcnf

The cpsat backend needs the optional `ortools` dependency.
"""

from __future__ import annotations

import argparse
import os
import sys

from ..cnf import Status, WcnfInstance, parse_wcnf
from .builtin import Budget, solve_builtin


def solve_cpsat(inst: WcnfInstance, time_limit=None, workers: int = 8):
    from ortools.sat.python import cp_model

    model = cp_model.CpModel()
    xs = [model.NewBoolVar(f"x{v}") for v in range(1, inst.num_vars + 1)]

    def lit(l):
        return xs[l - 1] if l > 0 else xs[-l - 1].Not()

    for cl in inst.hard:
        model.AddBoolOr([lit(l) for l in cl])
    terms = []
    for w, cl in inst.soft:
        if len(cl) == 1:
            terms.append((w, lit(-cl[0])))
        else:
            r = model.NewBoolVar("")
            model.AddBoolOr([lit(l) for l in cl] + [r])
            terms.append((w, r))
    model.Minimize(sum(w * v for w, v in terms))
    solver = cp_model.CpSolver()
    solver.parameters.num_workers = workers
    if time_limit is not None:
        solver.parameters.max_time_in_seconds = float(time_limit)
    status = solver.Solve(model)
    if status == cp_model.OPTIMAL:
        st = Status.OPTIMUM
    elif status == cp_model.FEASIBLE:
        st = Status.SATISFIABLE
    elif status == cp_model.INFEASIBLE:
        return Status.UNSAT, None
    else:
        return Status.UNKNOWN, None
    assignment = {v: bool(solver.BooleanValue(xs[v - 1])) for v in range(1, inst.num_vars + 1)}
    return st, assignment


_LINES = {
    Status.OPTIMUM: "s OPTIMUM FOUND",
    Status.SATISFIABLE: "s SATISFIABLE",
    Status.UNSAT: "s UNSATISFIABLE",
    Status.UNKNOWN: "s UNKNOWN",
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m maxreal.maxsat.adapter")
    ap.add_argument("wcnf")
    ap.add_argument("--backend", choices=("cpsat", "builtin"), default="cpsat")
    ap.add_argument("--time-limit", type=float, default=None)
    args = ap.parse_args(argv)
    limit = args.time_limit
    if limit is None and os.environ.get("MAXREAL_TIME_LIMIT"):
        limit = float(os.environ["MAXREAL_TIME_LIMIT"])
    with open(args.wcnf, encoding="ascii") as fh:
        inst = parse_wcnf(fh.read())
    if args.backend == "cpsat":
        try:
            status, model = solve_cpsat(inst, limit)
        except ImportError:
            print("c ortools is not installed; use --backend builtin", file=sys.stderr)
            return 2
    else:
        v = solve_builtin(inst, Budget(time_limit=limit))
        status, model = v.status, v.model
    out = []
    if model is not None:
        cost = inst.total_soft_weight - inst.soft_weight(model)
        out.append(f"o {cost}")
    out.append(_LINES[status])
    if model is not None:
        lits = [str(v if model[v] else -v) for v in range(1, inst.num_vars + 1)]
        for k in range(0, len(lits), 20):
            out.append("v " + " ".join(lits[k:k + 20]))
    sys.stdout.write("\n".join(out) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
