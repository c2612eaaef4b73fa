"""Linear SAT-UNSAT search for partial weighted MaxSAT.

Each soft clause gets a violation indicator; a generalized totalizer over
the weighted indicators exposes "cost >= v" outputs for every attainable
partial sum v.  After each model of cost C, the outputs for all v >= C are
forced false and the search continues until the formula becomes
unsatisfiable, at which point the last model is optimal.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from ..cnf import SolverVerdict, Status, WcnfInstance
from .cdcl import Solver


@dataclass
class Budget:
    time_limit: Optional[float] = None      # seconds of wall clock
    conflict_limit: Optional[int] = None    # total conflicts over the whole search

    def deadline(self) -> Optional[float]:
        return None if self.time_limit is None else time.monotonic() + self.time_limit


class BudgetExhausted(Exception):
    def __init__(self, verdict: SolverVerdict):
        self.verdict = verdict
        super().__init__(f"budget exhausted ({verdict.status.value})")


class _Totalizer:
    """Generalized totalizer: node outputs map each attainable weight sum to
    a variable that is forced true when the sum of true inputs reaches it."""

    def __init__(self, solver: Solver, leaves: Sequence[Tuple[int, int]]):
        self.solver = solver
        self.clauses = 0
        self.outputs = self._build(list(leaves))

    def _build(self, leaves: List[Tuple[int, int]]) -> Dict[int, int]:
        if len(leaves) == 1:
            w, lit = leaves[0]
            return {w: lit}
        mid = len(leaves) // 2
        left = self._build(leaves[:mid])
        right = self._build(leaves[mid:])
        out: Dict[int, int] = {}
        sums = sorted({a for a in left} | {b for b in right} | {a + b for a in left for b in right})
        for s in sums:
            out[s] = self.solver.new_var()
        for a, la in left.items():
            self._clause([-la, out[a]])
            for b, lb in right.items():
                self._clause([-la, -lb, out[a + b]])
        for b, lb in right.items():
            self._clause([-lb, out[b]])
        return out

    def _clause(self, lits):
        self.clauses += 1
        self.solver.add_clause(lits)


def solve_builtin(inst: WcnfInstance, budget: Optional[Budget] = None) -> SolverVerdict:
    budget = budget or Budget()
    deadline = budget.deadline()
    t0 = time.monotonic()
    solver = Solver(inst.num_vars)
    for cl in inst.hard:
        solver.add_clause(cl)
    # violation indicator per soft clause: the negated literal for units,
    # a fresh relaxation variable otherwise
    indicators: List[Tuple[int, int]] = []
    for w, cl in inst.soft:
        if len(cl) == 1:
            ind = -cl[0]
        else:
            ind = solver.new_var()
            solver.add_clause(list(cl) + [ind])
        solver.set_phase(-ind)
        indicators.append((w, ind))

    def remaining_conflicts():
        if budget.conflict_limit is None:
            return None
        return max(0, budget.conflict_limit - solver.conflicts)

    def stats():
        return {"time": time.monotonic() - t0, "conflicts": solver.conflicts,
                "decisions": solver.decisions, "iterations": iterations}

    iterations = 0
    best: Optional[Dict[int, bool]] = None
    best_cost = None
    totalizer: Optional[_Totalizer] = None
    while True:
        iterations += 1
        res = solver.solve(conflict_limit=remaining_conflicts(), deadline=deadline)
        if res is None:
            if best is None:
                return SolverVerdict(Status.UNKNOWN, None, None, None, stats())
            return _verdict(inst, Status.SATISFIABLE, best, stats())
        if res is False:
            if best is None:
                return SolverVerdict(Status.UNSAT, None, None, None, stats())
            return _verdict(inst, Status.OPTIMUM, best, stats())
        full = solver.model()
        model = {v: full.get(v, False) for v in range(1, inst.num_vars + 1)}
        cost = inst.total_soft_weight - inst.soft_weight(model)
        if best_cost is None or cost < best_cost:
            best, best_cost = model, cost
        if best_cost == 0:
            return _verdict(inst, Status.OPTIMUM, best, stats())
        if totalizer is None:
            live = [(w, ind) for w, ind in indicators]
            totalizer = _Totalizer(solver, live)
        # forbid every cost >= best_cost
        for s, lit in totalizer.outputs.items():
            if s >= best_cost:
                solver.add_clause([-lit])
        if not solver.ok:
            return _verdict(inst, Status.OPTIMUM, best, stats())


def _verdict(inst: WcnfInstance, status: Status, model: Dict[int, bool], stats) -> SolverVerdict:
    bad = inst.violated_hard(model)
    if bad is not None:
        raise AssertionError(f"internal solver produced a model violating hard clause {bad}")
    achieved = inst.soft_weight(model)
    return SolverVerdict(status, model, achieved, inst.total_soft_weight - achieved, stats)
