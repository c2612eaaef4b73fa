"""From solver models to machines, and independent checks of what the
machines achieve."""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import ltl
from .automata import (AccKind, Automaton, SoftAutomata, accepts, run_graph)
from .encoding import VarMap, ceil_log2
from .system import TransitionSystem, input_valuations

__all__ = [
    "Annotation", "DomainMismatch", "MissingTransition", "RejMode", "SoftAutomata", "TransitionSystem",
    "ValueVector", "completeness_bound", "completeness_parameters", "compute_value", "decode_annotation",
    "extract", "find_fg_annotation", "validate_annotation", "verify_hard",
]


class MissingTransition(Exception):
    pass


class DomainMismatch(ValueError):
    pass


def extract(model: Mapping[int, bool], vm: VarMap, bound: Optional[int] = None) -> TransitionSystem:
    """Machine read off the transition and output variables.  When several
    successors are enabled the smallest index wins."""
    b = vm.bound if bound is None else bound
    succ, out = [], []
    for s in range(b):
        srow, orow = [], []
        for i in range(vm.n_inputs):
            target = None
            for t in range(b):
                v = vm.tau.get((s, i, t))
                if v is not None and model.get(v, False):
                    target = t
                    break
            if target is None:
                raise MissingTransition(f"no successor for state {s} on input {i}")
            srow.append(target)
            orow.append(frozenset(o for o in vm.outputs
                                  if (o, s, i) in vm.out and model.get(vm.out[(o, s, i)], False)))
        succ.append(tuple(srow))
        out.append(tuple(orow))
    return TransitionSystem(vm.inputs, vm.outputs, tuple(succ), tuple(out), 0)


def reachable_part(t: TransitionSystem) -> TransitionSystem:
    """Restriction to states reachable from the initial one, renumbered in
    order of first discovery."""
    order = [t.initial]
    seen = {t.initial}
    k = 0
    while k < len(order):
        for nxt in t.succ[order[k]]:
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
        k += 1
    renum = {s: n for n, s in enumerate(order)}
    succ = tuple(tuple(renum[x] for x in t.succ[s]) for s in order)
    out = tuple(t.out[s] for s in order)
    return TransitionSystem(t.inputs, t.outputs, succ, out, 0)


def verify_hard(t: TransitionSystem, ucw: Automaton) -> bool:
    return accepts(ucw, t)


@functools.total_ordering
@dataclass(frozen=True)
class ValueVector:
    """Per-soft (G, FG, GF) satisfaction bits and their aggregate."""

    triples: Tuple[Tuple[int, int, int], ...]

    def __post_init__(self):
        for v1, v2, v3 in self.triples:
            if not (v1 <= v2 <= v3):
                raise ValueError(f"non-monotone value triple {(v1, v2, v3)}")

    @property
    def n(self) -> int:
        return len(self.triples)

    @property
    def aggregate(self) -> Tuple[int, int, int]:
        return (sum(t[2] for t in self.triples), sum(t[1] for t in self.triples),
                sum(t[0] for t in self.triples))

    def weight(self, n: Optional[int] = None) -> int:
        n = self.n if n is None else n
        v3, v2, v1 = self.aggregate
        return v1 + v2 * n + v3 * n * n

    def __lt__(self, other):
        return self.aggregate < other.aggregate

    def __eq__(self, other):
        return isinstance(other, ValueVector) and self.aggregate == other.aggregate

    def __hash__(self):
        return hash(self.aggregate)

    def realized_formula(self, softs: Sequence[ltl.Formula]) -> ltl.Formula:
        """Conjunction over softs of the strongest of G, FG, GF (or true)
        that holds, given the soft bodies phi_j."""
        parts = []
        for (v1, v2, v3), phi in zip(self.triples, softs):
            if v1:
                parts.append(ltl.Globally(phi))
            elif v2:
                parts.append(ltl.Finally(ltl.Globally(phi)))
            elif v3:
                parts.append(ltl.Globally(ltl.Finally(phi)))
            else:
                parts.append(ltl.TRUE)
        return ltl.conjoin(parts)


def compute_value(t: TransitionSystem, softs: Sequence[SoftAutomata]) -> ValueVector:
    triples = []
    for sa in softs:
        g = run_graph(sa.relaxed, t)
        v1 = int(not g.has_rejecting_edge())
        v2 = int(not g.has_rejecting_cycle())
        v3 = int(accepts(sa.gf, t))
        triples.append((v1, v2, v3))
    return ValueVector(tuple(triples))


# ---------------------------------------------------------------------------
# annotations


class RejMode(enum.Enum):
    CO_BUCHI_STATES = "co-buchi"
    REJ_EDGES = "rej-edges"


@dataclass
class Annotation:
    values: Dict[Tuple[int, int], Optional[int]]
    bound: int

    def get(self, key, default=None):
        return self.values.get(key, default)

    def labelled(self, s: int, q: int) -> bool:
        return self.values.get((s, q)) is not None


def validate_annotation(t: TransitionSystem, aut: Automaton, ann: Annotation, rej_mode: RejMode) -> bool:
    for (s, q) in ann.values:
        if not (0 <= s < t.n_states and 0 <= q < aut.n_states):
            raise DomainMismatch(f"annotation entry {(s, q)} outside the product domain")
    if not ann.labelled(t.initial, aut.initial):
        return False
    for key, v in ann.values.items():
        if v is not None and not 0 <= v <= ann.bound:
            return False
    ins = input_valuations(t.inputs)
    for (s, q), v in ann.values.items():
        if v is None:
            continue
        for i, val in enumerate(ins):
            s2, outs = t.succ[s][i], t.out[s][i]
            letter = val | outs
            for e in aut.edges:
                if e.src != q or not ltl.evaluate(e.label, letter):
                    continue
                w = ann.values.get((s2, e.dst))
                if w is None:
                    return False
                strict = e.rej if rej_mode is RejMode.REJ_EDGES else e.dst in aut.marked
                if strict and not w > v:
                    return False
                if not strict and not w >= v:
                    return False
    return True


def find_fg_annotation(t: TransitionSystem, relaxed: Automaton) -> Optional[Annotation]:
    """An FG-valid annotation bounded by the machine size, if one exists.

    Reachable nodes get the largest number of Rej edges on a path from the
    initial node; this is finite exactly when no reachable cycle uses a Rej
    edge.
    """
    g = run_graph(relaxed, t)
    if g.has_rejecting_cycle():
        return None
    comps = g.sccs()  # reverse topological order
    comp_of = {v: k for k, comp in enumerate(comps) for v in comp}
    best = {v: None for v in range(len(g.nodes))}
    best[g.initial] = 0
    out_edges: Dict[int, List[Tuple[int, bool]]] = {}
    for u, _, v, flag, _ in g.edges:
        out_edges.setdefault(u, []).append((v, flag))
    for comp in reversed(comps):
        # inside an SCC there are no Rej edges, so all members share one value
        entry = [best[v] for v in comp if best[v] is not None]
        if not entry:
            continue
        m = max(entry)
        for v in comp:
            best[v] = m
        for v in comp:
            for w, flag in out_edges.get(v, ()):
                if comp_of[w] == comp_of[v]:
                    continue
                cand = m + (1 if flag else 0)
                if best[w] is None or cand > best[w]:
                    best[w] = cand
    values = {}
    for s in range(t.n_states):
        for q in relaxed.states:
            values[(s, q)] = None
    for k, node in enumerate(g.nodes):
        values[node] = best[k]
    return Annotation(values, t.n_states)


def decode_annotation(model: Mapping[int, bool], vm: VarMap, tag: tuple) -> Annotation:
    inst = vm.instances[tag]
    values = {}
    for s in range(vm.bound):
        for q in inst.aut.states:
            rv = vm.reach.get((tag, s, q))
            if rv is None or not model.get(rv, False):
                values[(s, q)] = None
                continue
            bits = vm.counter.get((tag, s, q), ())
            v = 0
            for b in bits:
                v = (v << 1) | int(bool(model.get(b, False)))
            values[(s, q)] = v
    return Annotation(values, (1 << inst.width) - 1)


# ---------------------------------------------------------------------------
# theoretical size bound


def _variants(phi: ltl.Formula) -> List[ltl.Formula]:
    return [ltl.Globally(phi), ltl.Finally(ltl.Globally(phi)), ltl.Globally(ltl.Finally(phi))]


def completeness_parameters(hard: ltl.Formula, soft_bodies: Sequence[ltl.Formula],
                            exhaustive_limit: int = 10) -> Tuple[int, int]:
    """(b, N) where b is the largest subformula count of the hard spec
    conjoined with one G/FG/GF variant per soft, and N = 2**(b + ceil(log2 b)).

    The maximum is found by enumeration for up to `exhaustive_limit` softs
    and by coordinate ascent beyond that.
    """
    choices = [_variants(phi) for phi in soft_bodies]

    def size(pick):
        return len(ltl.subformulas(ltl.conjoin([hard] + [c[k] for c, k in zip(choices, pick)])))

    if len(choices) <= exhaustive_limit:
        b = max(size(p) for p in itertools.product(range(3), repeat=len(choices)))
    else:
        pick = [0] * len(choices)
        b = size(pick)
        improved = True
        while improved:
            improved = False
            for j in range(len(pick)):
                for k in range(3):
                    trial = pick[:j] + [k] + pick[j + 1:]
                    s = size(trial)
                    if s > b:
                        b, pick, improved = s, trial, True
    return b, 1 << (b + ceil_log2(b))


def completeness_bound(hard: ltl.Formula, soft_bodies: Sequence[ltl.Formula],
                       max_factorial_arg: int = 1 << 16) -> int:
    """((2**(b + ceil(log2 b)))!)**2.  Raises OverflowError when the factorial
    argument exceeds `max_factorial_arg`; `completeness_parameters` still
    describes the bound in that case."""
    b, n = completeness_parameters(hard, soft_bodies)
    if n > max_factorial_arg:
        raise OverflowError(f"bound is (({n})!)^2, too large to expand")
    return math.factorial(n) ** 2
