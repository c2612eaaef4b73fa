"""Propositional constraints for bounded synthesis with soft specifications.

Variables describe a machine with `bound` states (transition and output
variables) together with annotations of its run graph with each automaton:
a reachability bit and a binary counter per (machine state, automaton state).
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import boolexpr as bx
from . import ltl
from .automata import AccKind, Automaton, CapacityError
from .boolexpr import Expr
from .system import input_valuations

MAX_WEIGHT = (1 << 63) - 1
DEFAULT_INPUT_LIMIT = 12


class EncodingError(Exception):
    pass


class BoundTooSmall(EncodingError, ValueError):
    pass


class IndexOutOfRange(EncodingError, IndexError):
    pass


class WeightOverflow(EncodingError, OverflowError):
    pass


class EmptyRelaxVector(EncodingError, ValueError):
    pass


class NonPositiveWeight(EncodingError, ValueError):
    pass


class Mode(enum.Enum):
    EQUAL = "equal"
    PRIORITY = "priority"
    WEIGHTED = "weighted"


def ceil_log2(x: int) -> int:
    """Number of bits needed to represent 0..x-1 (0 for x <= 1)."""
    return (x - 1).bit_length() if x > 1 else 0


def counter_width(max_value: int) -> int:
    """Bits needed to hold every integer in 0..max_value."""
    return ceil_log2(max_value + 1)


class VarMap:
    """Allocator for propositional variables with their semantic roles.

    Allocation is guarded by a lock so that independent encoders may share
    one map.
    """

    def __init__(self, bound: int, inputs: Sequence[str], outputs: Sequence[str]):
        if bound < 1:
            raise BoundTooSmall(f"bound must be at least 1, got {bound}")
        self.bound = bound
        self.inputs = tuple(inputs)
        self.outputs = tuple(outputs)
        self.num_vars = 0
        self.roles: Dict[int, tuple] = {}
        self.tau: Dict[Tuple[int, int, int], int] = {}
        self.out: Dict[Tuple[str, int, int], int] = {}
        self.reach: Dict[Tuple[tuple, int, int], int] = {}
        self.counter: Dict[Tuple[tuple, int, int], Tuple[int, ...]] = {}
        # per annotation tag: the automaton it annotates and its counter width
        self.instances: Dict[tuple, "AnnotationInstance"] = {}
        self._lock = threading.Lock()
        self._role_index: Dict[tuple, int] = {}

    @property
    def n_inputs(self) -> int:
        return 1 << len(self.inputs)

    def new_var(self, role: tuple) -> int:
        with self._lock:
            v = self._role_index.get(role)
            if v is not None:
                return v
            self.num_vars += 1
            v = self.num_vars
            self.roles[v] = role
            self._role_index[role] = v
            return v

    def fresh(self) -> int:
        """Anonymous auxiliary variable (no semantic role)."""
        with self._lock:
            self.num_vars += 1
            return self.num_vars

    def tau_var(self, s: int, i: int, t: int) -> int:
        key = (s, i, t)
        v = self.tau.get(key)
        if v is None:
            v = self.tau[key] = self.new_var(("tau", s, i, t))
        return v

    def out_var(self, o: str, s: int, i: int) -> int:
        key = (o, s, i)
        v = self.out.get(key)
        if v is None:
            v = self.out[key] = self.new_var(("out", o, s, i))
        return v

    def reach_var(self, tag: tuple, s: int, q: int) -> int:
        key = (tag, s, q)
        v = self.reach.get(key)
        if v is None:
            v = self.reach[key] = self.new_var(("reach", tag, s, q))
        return v

    def counter_vars(self, tag: tuple, s: int, q: int, width: int) -> Tuple[int, ...]:
        key = (tag, s, q)
        vs = self.counter.get(key)
        if vs is None:
            vs = self.counter[key] = tuple(self.new_var(("count", tag, s, q, k)) for k in range(width))
        return vs

    def name(self, v: int) -> str:
        role = self.roles.get(v)
        if role is None:
            return f"aux{v}"
        kind = role[0]
        if kind == "tau":
            return "tau_{}_{}_{}".format(*role[1:])
        if kind == "out":
            return "out_{}_{}_{}".format(*role[1:])
        tag = "_".join(str(x) for x in role[1])
        if kind == "reach":
            return f"reach[{tag}]_{role[2]}_{role[3]}"
        return f"count[{tag}]_{role[2]}_{role[3]}_b{role[4]}"


@dataclass
class AnnotationInstance:
    tag: tuple
    aut: Automaton
    width: int
    counted: frozenset       # automaton states that carry a counter
    strict_mode: str         # "marked" (co-Buchi) or "rej" (Rej edges)
    skipped: frozenset = frozenset()  # states without reach variables (true sinks)


@dataclass(frozen=True)
class SoftConstraint:
    formula: Expr
    weight: int
    tag: tuple


@dataclass
class ConstraintSet:
    hard: List[Expr] = field(default_factory=list)
    soft: List[SoftConstraint] = field(default_factory=list)

    def extend(self, other: "ConstraintSet") -> "ConstraintSet":
        self.hard.extend(other.hard)
        self.soft.extend(other.soft)
        return self

    def check(self):
        tags = set()
        for sc in self.soft:
            if sc.weight <= 0:
                raise NonPositiveWeight(f"soft constraint {sc.tag} has weight {sc.weight}")
            if sc.tag in tags:
                raise EncodingError(f"duplicate soft tag {sc.tag}")
            tags.add(sc.tag)
        if sum(sc.weight for sc in self.soft) > MAX_WEIGHT:
            raise WeightOverflow("total soft weight exceeds 64-bit range")

    @property
    def total_weight(self) -> int:
        return sum(sc.weight for sc in self.soft)

    def to_sexpr(self, vm: Optional[VarMap] = None) -> str:
        names = _NameView(vm) if vm is not None else None
        lines = [f"(hard {bx.to_sexpr(h, names)})" for h in self.hard]
        for sc in self.soft:
            tag = " ".join(str(x) for x in sc.tag)
            lines.append(f"(soft (tag {tag}) (weight {sc.weight}) {bx.to_sexpr(sc.formula, names)})")
        return "\n".join(lines) + "\n"


class _NameView(Mapping):
    def __init__(self, vm: VarMap):
        self.vm = vm

    def __getitem__(self, v):
        return self.vm.name(v)

    def get(self, v, default=None):
        return self.vm.name(v)

    def __iter__(self):
        return iter(range(1, self.vm.num_vars + 1))

    def __len__(self):
        return self.vm.num_vars


# ---------------------------------------------------------------------------
# transition relation


class _Labels:
    """Edge labels specialised to (machine state, input valuation)."""

    def __init__(self, vm: VarMap):
        self.vm = vm
        self.vals = input_valuations(vm.inputs)
        self.in_set = set(vm.inputs)
        self.out_set = set(vm.outputs)
        self._restricted: Dict[Tuple[ltl.Formula, int], ltl.Formula] = {}
        self._expr: Dict[Tuple[ltl.Formula, int, int], Expr] = {}

    def restricted(self, label: ltl.Formula, i: int) -> ltl.Formula:
        key = (label, i)
        r = self._restricted.get(key)
        if r is None:
            val = self.vals[i]
            assignment = {p: (p in val) for p in self.in_set}
            r = self._restricted[key] = ltl.restrict(label, assignment)
            unknown = ltl.atoms(r) - self.out_set
            if unknown:
                raise EncodingError(f"label mentions undeclared propositions {sorted(unknown)}")
        return r

    def delta(self, label: ltl.Formula, s: int, i: int) -> Expr:
        key = (label, s, i)
        e = self._expr.get(key)
        if e is None:
            e = self._expr[key] = self._convert(self.restricted(label, i), s, i)
        return e

    def _convert(self, f: ltl.Formula, s: int, i: int) -> Expr:
        op = f.op
        if op == ltl.TRUE_OP:
            return bx.TRUE
        if op == ltl.FALSE_OP:
            return bx.FALSE
        if op == ltl.ATOM:
            return bx.var(self.vm.out_var(f.name, s, i))
        if op == ltl.NOT:
            return bx.neg(self._convert(f.args[0], s, i))
        if op == ltl.AND:
            return bx.conj(self._convert(f.args[0], s, i), self._convert(f.args[1], s, i))
        if op == ltl.OR:
            return bx.disj(self._convert(f.args[0], s, i), self._convert(f.args[1], s, i))
        raise EncodingError(f"temporal operator in edge label: {ltl.render(f)}")


def _check_inputs(vm: VarMap, limit: int):
    if len(vm.inputs) > limit:
        raise CapacityError(f"{len(vm.inputs)} inputs exceed the enumeration limit of {limit}",
                            len(vm.inputs))


def transition_constraints(vm: VarMap) -> List[Expr]:
    """Input-enabledness: every (state, input) has some successor.  Also
    allocates all output variables so extraction sees a complete table."""
    hard = []
    b = vm.bound
    for s in range(b):
        for i in range(vm.n_inputs):
            hard.append(bx.disj_all(bx.var(vm.tau_var(s, i, t)) for t in range(b)))
            for o in vm.outputs:
                vm.out_var(o, s, i)
    return hard


# ---------------------------------------------------------------------------
# annotations


def _counted_states(aut: Automaton, strict_mode: str, compact: bool, skipped) -> frozenset:
    if not compact:
        return frozenset(q for q in aut.states if q not in skipped)
    comps = aut.sccs()
    comp_of = {q: k for k, comp in enumerate(comps) for q in comp}
    hot = set()
    for e in aut.edges:
        if comp_of[e.src] != comp_of[e.dst] or e.dst in skipped:
            continue
        strict = e.rej if strict_mode == "rej" else e.dst in aut.marked
        if strict:
            hot.add(comp_of[e.src])
    return frozenset(q for q in aut.states if comp_of[q] in hot)


def _sinks(aut: Automaton, compact: bool) -> Tuple[frozenset, frozenset]:
    """(rejecting true-sinks, harmless true-sinks) of a co-Buchi automaton."""
    if not compact or aut.acc_kind is not AccKind.UNIVERSAL_CO_BUCHI:
        return frozenset(), frozenset()
    bad, good = set(), set()
    for q in aut.states:
        if q == aut.initial or not aut.is_true_sink(q):
            continue
        (bad if q in aut.marked else good).add(q)
    return frozenset(bad), frozenset(good)


def annotation_constraints(aut: Automaton, tag: tuple, vm: VarMap, width: int,
                           strict_mode: str, compact: bool = False,
                           labels: Optional[_Labels] = None) -> List[Expr]:
    """Validity of an annotation of the run graph of `aut` with the machine.

    Whenever (s, q) is labelled and the machine can move from s to s' on
    input i while the automaton moves from q to q', then (s', q') is
    labelled and its counter is at least (strictly above, on rejecting moves)
    the counter of (s, q).
    """
    if tag in vm.instances:
        raise EncodingError(f"annotation tag {tag} used twice")
    labels = labels or _Labels(vm)
    bad_sinks, good_sinks = _sinks(aut, compact)
    skipped = bad_sinks | good_sinks
    counted = _counted_states(aut, strict_mode, compact, skipped)
    vm.instances[tag] = AnnotationInstance(tag, aut, width, counted, strict_mode, skipped)
    comps = aut.sccs()
    comp_of = {q: k for k, comp in enumerate(comps) for q in comp}

    b = vm.bound
    reach = {}
    cnt = {}
    for s in range(b):
        for q in aut.states:
            if q in skipped:
                continue
            reach[s, q] = bx.var(vm.reach_var(tag, s, q))
            if q in counted:
                cnt[s, q] = [bx.var(v) for v in vm.counter_vars(tag, s, q, width)]

    # merge parallel edges with the same endpoints and strictness
    grouped: Dict[Tuple[int, int, bool], List[ltl.Formula]] = {}
    for e in aut.edges:
        if e.src in skipped:
            continue
        strict = e.rej if strict_mode == "rej" else e.dst in aut.marked
        grouped.setdefault((e.src, e.dst, strict), []).append(e.label)

    hard: List[Expr] = []
    for (q, q2, strict), labs in sorted(grouped.items()):
        label = labs[0] if len(labs) == 1 else ltl.disjoin(labs)
        for s in range(b):
            for i in range(vm.n_inputs):
                delta = labels.delta(label, s, i)
                if delta is bx.FALSE:
                    continue
                for s2 in range(b):
                    pre = bx.conj(reach[s, q], delta, bx.var(vm.tau_var(s, i, s2)))
                    if q2 in bad_sinks:
                        hard.append(bx.neg(pre))
                        continue
                    if q2 in good_sinks:
                        continue
                    post = reach[s2, q2]
                    if compact:
                        same = comp_of[q] == comp_of[q2] and q in counted
                        if same:
                            post = bx.conj(post, bx.comparator(cnt[s2, q2], cnt[s, q], strict))
                    else:
                        post = bx.conj(post, bx.comparator(cnt[s2, q2], cnt[s, q], strict))
                    hard.append(bx.implies(pre, post))
    return hard


def initial_reach(vm: VarMap, tag: tuple) -> Expr:
    inst = vm.instances[tag]
    return bx.var(vm.reach_var(tag, 0, inst.aut.initial))


def initial_counter(vm: VarMap, tag: tuple) -> Optional[List[Expr]]:
    inst = vm.instances[tag]
    q0 = inst.aut.initial
    if q0 not in inst.counted:
        return None
    return [bx.var(v) for v in vm.counter[(tag, 0, q0)]]


HARD_TAG = ("hard",)


def encode_bounded_synthesis(ucw: Automaton, bound: int, inputs: Sequence[str], outputs: Sequence[str],
                             varmap: Optional[VarMap] = None, compact: bool = False,
                             input_limit: int = DEFAULT_INPUT_LIMIT) -> Tuple[ConstraintSet, VarMap]:
    """Machine shape plus a valid annotation for the hard specification."""
    if bound < 1:
        raise BoundTooSmall(f"bound must be at least 1, got {bound}")
    if ucw.acc_kind is not AccKind.UNIVERSAL_CO_BUCHI:
        raise EncodingError("hard specification automaton must be universal co-Buchi")
    vm = varmap or VarMap(bound, inputs, outputs)
    _check_inputs(vm, input_limit)
    cs = ConstraintSet()
    cs.hard.extend(transition_constraints(vm))
    width = counter_width(bound * len(ucw.marked))
    cs.hard.extend(annotation_constraints(ucw, HARD_TAG, vm, width, "marked", compact))
    cs.hard.append(initial_reach(vm, HARD_TAG))
    return cs, vm


def soft_tags(j: int) -> Tuple[tuple, tuple]:
    return ("fg", j), ("gf", j)


def encode_soft_annotations(b_j: Automaton, a_j: Automaton, n: int, j: int, bound: int,
                            vm: VarMap, compact: bool = False) -> ConstraintSet:
    """Annotations for soft specification j and its three soft constraints.

    b_j is the relaxed automaton for G phi_j with its Rej edges, a_j a
    universal co-Buchi automaton for GF phi_j.
    """
    if not 1 <= j <= n:
        raise IndexOutOfRange(f"soft index {j} outside 1..{n}")
    if bound != vm.bound:
        raise EncodingError("bound differs from the variable map's bound")
    if not b_j.rej_edges and any(e.rej for e in b_j.edges):
        raise EncodingError("inconsistent Rej edges")
    if a_j.acc_kind is not AccKind.UNIVERSAL_CO_BUCHI:
        raise EncodingError("GF automaton must be universal co-Buchi")
    w_fg, w_gf = n, n * n
    if 1 + w_fg + w_gf > MAX_WEIGHT:
        raise WeightOverflow("soft weights exceed 64-bit range")
    tag_fg, tag_gf = soft_tags(j)
    cs = ConstraintSet()
    width_fg = counter_width(bound)
    cs.hard.extend(annotation_constraints(b_j, tag_fg, vm, width_fg, "rej", compact))
    # keep counters within 0..bound so that "initial counter = bound" rules out Rej edges
    if (1 << width_fg) - 1 > bound:
        for (tag, s, q), bits in sorted(vm.counter.items()):
            if tag == tag_fg:
                cs.hard.append(bx.at_most_const([bx.var(v) for v in bits], bound))
    width_gf = counter_width(bound * len(a_j.marked))
    cs.hard.extend(annotation_constraints(a_j, tag_gf, vm, width_gf, "marked", compact))

    reach_fg = initial_reach(vm, tag_fg)
    c0 = initial_counter(vm, tag_fg)
    soft_g = reach_fg if c0 is None else bx.conj(reach_fg, bx.equals_const(c0, bound))
    cs.soft.append(SoftConstraint(soft_g, 1, ("G", j)))
    cs.soft.append(SoftConstraint(reach_fg, w_fg, ("FG", j)))
    cs.soft.append(SoftConstraint(bx.disj(reach_fg, initial_reach(vm, tag_gf)), w_gf, ("GF", j)))
    return cs


# ---------------------------------------------------------------------------
# strength-ordered relaxation vectors


def relax_weights(sizes: Sequence[int], mode: Mode,
                  user: Optional[Sequence[Sequence[int]]] = None) -> List[List[int]]:
    """Weight table w[j][k] (0-based) for relax vectors of the given lengths.

    Equal: n**k.  Priority: 1 for the last soft and for every level below
    the strongest; the strongest level of soft j weighs one more than all
    levels of all later softs together.  Weighted: user supplied.
    """
    n = len(sizes)
    if any(m < 1 for m in sizes):
        raise EmptyRelaxVector("every relax vector needs at least one formula")
    if mode is Mode.EQUAL:
        w = [[n ** k for k in range(m)] for m in sizes]
    elif mode is Mode.PRIORITY:
        w = [[0] * m for m in sizes]
        below = 0
        for j in reversed(range(n)):
            top = sizes[j] - 1
            for k in range(sizes[j]):
                w[j][k] = 1 if (j == n - 1 or k < top) else below + 1
            below += sum(w[j])
    elif mode is Mode.WEIGHTED:
        if user is None:
            raise NonPositiveWeight("weighted mode needs explicit weights")
        if len(user) != n or any(len(u) != m for u, m in zip(user, sizes)):
            raise EncodingError("weight table shape does not match the relax vectors")
        w = [[int(x) for x in row] for row in user]
        for j, row in enumerate(w):
            for k, x in enumerate(row):
                if x <= 0:
                    raise NonPositiveWeight(f"weight for soft {j + 1} level {k} is {x}")
    else:
        raise ValueError(mode)
    if sum(map(sum, w)) > MAX_WEIGHT:
        raise WeightOverflow("relaxation weights exceed 64-bit range; use weighted mode")
    return w


def gen_tag(j: int, k: int) -> tuple:
    return ("gen", j, k)


def encode_generalized(relax: Sequence[Sequence[Automaton]], mode: Mode, bound: int, vm: VarMap,
                       weights: Optional[Sequence[Sequence[int]]] = None,
                       compact: bool = False) -> Tuple[ConstraintSet, List[List[int]]]:
    """One annotation per relaxation level; soft constraint (j, k) holds when
    any level up to k is certified."""
    if bound != vm.bound:
        raise EncodingError("bound differs from the variable map's bound")
    sizes = [len(r) for r in relax]
    w = relax_weights(sizes, mode, weights)
    cs = ConstraintSet()
    for j, vec in enumerate(relax, start=1):
        reaches = []
        for k, aut in enumerate(vec):
            if aut.acc_kind is not AccKind.UNIVERSAL_CO_BUCHI:
                raise EncodingError("relaxation automata must be universal co-Buchi")
            tag = gen_tag(j, k)
            width = counter_width(bound * len(aut.marked))
            cs.hard.extend(annotation_constraints(aut, tag, vm, width, "marked", compact))
            reaches.append(initial_reach(vm, tag))
            cs.soft.append(SoftConstraint(bx.disj_all(reaches), w[j - 1][k], ("gen", j, k)))
    return cs, w


def comparator(x: Sequence[Expr], y: Sequence[Expr], strict: bool) -> Expr:
    return bx.comparator(x, y, strict)
