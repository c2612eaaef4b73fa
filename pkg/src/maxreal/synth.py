"""Bound-by-bound maximum realizability search."""

from __future__ import annotations

import concurrent.futures
import json
import os
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from . import ltl
from .automata import (Automaton, SoftAutomata, accepts, ltl_to_ucw, soft_automata,
                       ucw_for_conjunction)
from .cnf import SolverVerdict, Status, tseitin, write_wcnf
from .encoding import (Mode, VarMap, encode_bounded_synthesis, encode_generalized,
                       encode_soft_annotations)
from .extraction import (ValueVector, compute_value, completeness_parameters, extract,
                         reachable_part, verify_hard)
from .maxsat import Budget, solve_builtin, solve_external
from .problem import SynthesisProblem
from .system import TransitionSystem

REPORT_SCHEMA = 1


class UnrealizableAtAllTestedBounds(Exception):
    pass


class ConsistencyError(AssertionError):
    pass


@dataclass
class SynthOptions:
    bounds: Sequence[int] = (1,)
    solver: str = "builtin"            # builtin | external
    solver_cmd: Optional[object] = None
    mode: Mode = Mode.EQUAL
    timeout: Optional[float] = None    # per bound, seconds
    conflict_limit: Optional[int] = None
    emit_wcnf: Optional[str] = None    # path; "{bound}" is substituted
    dump_automata: Optional[str] = None
    compact: bool = True
    all_bounds: bool = False           # keep going after the first realizable bound
    jobs: int = 1


@dataclass
class BoundResult:
    bound: int
    status: str                        # optimum | satisfiable | unsat | unknown
    weight_bound: int
    achieved_weight: Optional[int] = None
    value_vector: Optional[ValueVector] = None
    relax_levels: Optional[List[Optional[int]]] = None
    psi_v: Optional[str] = None
    machine: Optional[TransitionSystem] = None
    hard_verified: Optional[bool] = None
    num_vars: int = 0
    num_clauses: int = 0
    encode_time: float = 0.0
    solve_time: float = 0.0
    solver_stats: Dict[str, float] = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status in ("optimum", "satisfiable")

    def to_json(self) -> dict:
        vv = None
        if self.value_vector is not None:
            vv = {"aggregate": list(self.value_vector.aggregate),
                  "per_soft": [list(t) for t in self.value_vector.triples]}
        return {
            "bound": self.bound,
            "status": self.status,
            "achieved_weight": self.achieved_weight,
            "weight_bound": self.weight_bound,
            "value_vector": vv,
            "relax_levels": self.relax_levels,
            "psi_v": self.psi_v,
            "hard_verified": self.hard_verified,
            "machine": None if self.machine is None else self.machine.to_json(),
            "num_vars": self.num_vars,
            "num_clauses": self.num_clauses,
            "encode_time": round(self.encode_time, 3),
            "solve_time": round(self.solve_time, 3),
        }


@dataclass
class Report:
    problem: str
    mode: str
    n_softs: int
    results: List[BoundResult]
    completeness: Optional[Dict[str, int]] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def best(self) -> Optional[BoundResult]:
        sat = [r for r in self.results if r.sat]
        if not sat:
            return None
        return max(sat, key=lambda r: (r.achieved_weight, -r.bound))

    def exit_code(self) -> int:
        if any(r.status == "optimum" for r in self.results):
            return 0
        if any(r.status in ("unknown", "satisfiable") for r in self.results):
            return 3
        return 1

    def require_sat(self) -> BoundResult:
        b = self.best
        if b is None:
            raise UnrealizableAtAllTestedBounds(
                "no implementation found at bounds " + ", ".join(str(r.bound) for r in self.results))
        return b


class _Automata:
    """Everything the encoder needs that does not depend on the bound."""

    def __init__(self, problem: SynthesisProblem, generalized: bool):
        self.hard = ucw_for_conjunction(problem.hard_parts)
        self.softs: List[SoftAutomata] = [soft_automata(sp.body) for sp in problem.softs]
        self.relax: Optional[List[List[Automaton]]] = None
        if generalized:
            self.relax = [[ltl_to_ucw(f) for f in sp.relax_vector()] for sp in problem.softs]

    def dump(self, directory: str):
        os.makedirs(directory, exist_ok=True)

        def put(name, aut):
            with open(os.path.join(directory, name), "w", encoding="utf-8") as fh:
                fh.write(aut.to_dot(name.split(".")[0].replace("-", "_")))

        put("hard.dot", self.hard)
        for j, sa in enumerate(self.softs, start=1):
            put(f"soft{j}-bg.dot", sa.b_g)
            put(f"soft{j}-relaxed.dot", sa.relaxed)
            put(f"soft{j}-gf.dot", sa.gf)
        for j, vec in enumerate(self.relax or (), start=1):
            for k, aut in enumerate(vec):
                put(f"soft{j}-relax{k}.dot", aut)


def _uses_generalized(problem: SynthesisProblem, mode: Mode) -> bool:
    return mode is not Mode.EQUAL or problem.has_generalized_softs()


def weight_table(problem: SynthesisProblem, mode: Mode) -> List[List[int]]:
    from .encoding import relax_weights
    sizes = [len(sp.relax_vector()) for sp in problem.softs]
    user = None
    if mode is Mode.WEIGHTED:
        user = [sp.weights if sp.weights is not None else [1] * m for sp, m in zip(problem.softs, sizes)]
    return relax_weights(sizes, mode, user)


def encode(problem: SynthesisProblem, bound: int, mode: Mode = Mode.EQUAL, compact: bool = True,
           automata: Optional[_Automata] = None):
    """Constraint set, variable map and weight table for one bound."""
    generalized = _uses_generalized(problem, mode)
    automata = automata or _Automata(problem, generalized)
    cs, vm = encode_bounded_synthesis(automata.hard, bound, problem.inputs, problem.outputs,
                                      compact=compact)
    n = problem.n
    weights = None
    if generalized:
        gcs, weights = encode_generalized(automata.relax, mode, bound, vm,
                                          weight_table(problem, mode) if mode is Mode.WEIGHTED else None,
                                          compact=compact)
        cs.extend(gcs)
    else:
        for j, sa in enumerate(automata.softs, start=1):
            cs.extend(encode_soft_annotations(sa.relaxed, sa.gf, n, j, bound, vm, compact=compact))
    cs.check()
    return cs, vm, weights


def _solve_bound(problem: SynthesisProblem, bound: int, opts: SynthOptions,
                 automata: Optional[_Automata] = None) -> BoundResult:
    generalized = _uses_generalized(problem, opts.mode)
    automata = automata or _Automata(problem, generalized)
    t0 = time.monotonic()
    cs, vm, weights = encode(problem, bound, opts.mode, opts.compact, automata)
    inst = tseitin(cs, vm)
    encode_time = time.monotonic() - t0
    if opts.emit_wcnf:
        path = opts.emit_wcnf.replace("{bound}", str(bound))
        if path == opts.emit_wcnf and len(opts.bounds) > 1:
            root, ext = os.path.splitext(path)
            path = f"{root}.b{bound}{ext or '.wcnf'}"
        write_wcnf(inst, path)
    budget = Budget(time_limit=opts.timeout, conflict_limit=opts.conflict_limit)
    t1 = time.monotonic()
    if opts.solver == "external":
        verdict = solve_external(inst, opts.solver_cmd, budget)
    elif opts.solver == "builtin":
        verdict = solve_builtin(inst, budget)
    else:
        raise ValueError(f"unknown solver {opts.solver!r}")
    solve_time = time.monotonic() - t1
    result = BoundResult(bound, verdict.status.value, cs.total_weight, num_vars=inst.num_vars,
                         num_clauses=inst.num_clauses, encode_time=encode_time, solve_time=solve_time,
                         solver_stats=dict(verdict.stats))
    if verdict.model is None:
        return result
    machine = extract(verdict.model, vm)
    result.hard_verified = verify_hard(machine, automata.hard)
    if not result.hard_verified:
        raise ConsistencyError(f"bound {bound}: extracted machine violates the hard specification")
    result.machine = reachable_part(machine)
    result.achieved_weight = verdict.achieved_weight
    value = compute_value(machine, automata.softs)
    result.value_vector = value
    optimal = verdict.status is Status.OPTIMUM
    bodies = [sp.body for sp in problem.softs]
    if generalized:
        levels, expected, psi = _relax_outcome(machine, automata.relax, weights, problem)
        result.relax_levels = levels
        result.psi_v = ltl.render(psi)
    else:
        expected = value.weight(problem.n)
        result.psi_v = ltl.render(value.realized_formula(bodies))
    if optimal and verdict.achieved_weight != expected:
        raise ConsistencyError(f"bound {bound}: solver weight {verdict.achieved_weight} but the "
                               f"machine's recomputed value gives {expected}")
    if not optimal and verdict.achieved_weight > expected:
        raise ConsistencyError(f"bound {bound}: incumbent weight {verdict.achieved_weight} exceeds "
                               f"the recomputed value {expected}")
    return result


def _relax_outcome(machine, relax, weights, problem):
    levels: List[Optional[int]] = []
    total = 0
    parts = []
    for j, vec in enumerate(relax):
        sat = [accepts(aut, machine) for aut in vec]
        first = next((k for k, ok in enumerate(sat) if ok), None)
        levels.append(first)
        if first is not None:
            total += sum(weights[j][first:])
            parts.append(problem.softs[j].relax_vector()[first])
        else:
            parts.append(ltl.TRUE)
    return levels, total, ltl.conjoin(parts)


def synthesize_max(problem: SynthesisProblem, opts: SynthOptions) -> Report:
    generalized = _uses_generalized(problem, opts.mode)
    automata = _Automata(problem, generalized)
    if opts.dump_automata:
        automata.dump(opts.dump_automata)
    bounds = sorted(set(opts.bounds))
    results: List[BoundResult] = []
    if opts.jobs > 1 and len(bounds) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=opts.jobs) as pool:
            futures = {b: pool.submit(_solve_bound, problem, b, opts) for b in bounds}
            for b in bounds:
                results.append(futures[b].result())
        if not opts.all_bounds:
            first = next((k for k, r in enumerate(results) if r.sat), None)
            if first is not None:
                results = results[:first + 1]
    else:
        for b in bounds:
            r = _solve_bound(problem, b, opts, automata)
            results.append(r)
            if r.sat and not opts.all_bounds:
                break
    report = Report(problem.name, opts.mode.value, problem.n, results)
    try:
        b, n = completeness_parameters(problem.hard, [sp.body for sp in problem.softs])
        report.completeness = {"subformula_bound": b, "factorial_argument_log2": n.bit_length() - 1}
    except RecursionError:
        pass
    return report


# ---------------------------------------------------------------------------
# rendering


def report_to_json(r: Report) -> dict:
    return {
        "schema_version": REPORT_SCHEMA,
        "problem": r.problem,
        "mode": r.mode,
        "n_softs": r.n_softs,
        "completeness": r.completeness,
        "warnings": r.warnings,
        "results": [x.to_json() for x in r.results],
    }


def report_render(r: Report, fmt: str = "text") -> bytes:
    if fmt == "json":
        return (json.dumps(report_to_json(r), indent=2, sort_keys=True) + "\n").encode()
    if fmt == "dot":
        best = r.best
        if best is None or best.machine is None:
            return b"digraph machine {\n}\n"
        return best.machine.to_dot().encode()
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"problem {r.problem} ({r.n_softs} soft, mode {r.mode})",
             f"{'|T|':>4}  {'result':<11} {'weight':>12}  {'vars':>8} {'clauses':>9} {'enc s':>7} {'solve s':>8}"]
    for x in r.results:
        w = "-" if x.achieved_weight is None else f"{x.achieved_weight} ({x.weight_bound})"
        lines.append(f"{x.bound:>4}  {x.status:<11} {w:>12}  {x.num_vars:>8} {x.num_clauses:>9} "
                     f"{x.encode_time:>7.2f} {x.solve_time:>8.2f}")
    best = r.best
    if best is not None:
        lines.append("")
        lines.append(f"best machine: bound {best.bound}, {best.machine.n_states} reachable states")
        if best.value_vector is not None:
            lines.append(f"value (GF, FG, G counts): {best.value_vector.aggregate}")
            lines.append("per soft (G, FG, GF): " + " ".join(str(t) for t in best.value_vector.triples))
        if best.relax_levels is not None:
            lines.append("strongest relaxation per soft: " +
                         " ".join("-" if k is None else str(k) for k in best.relax_levels))
        lines.append(f"realized: {best.psi_v}")
    for w in r.warnings:
        lines.append(f"warning: {w}")
    return ("\n".join(lines) + "\n").encode()
