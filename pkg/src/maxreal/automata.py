"""Universal automata consumed by the encodings.

All constructions share one tableau expansion over NNF obligation sets.
Propositional subformulas are kept whole as edge labels instead of being
split into cubes, which keeps invariants such as mutual exclusion over many
outputs from exploding into exponentially many edges.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from . import ltl
from .ltl import (AND, ATOM, FALSE, NEXT, NOT, OR, RELEASE, TRUE, UNTIL, Formula,
                  NotSyntacticallySafe)
from .system import TransitionSystem, input_valuations


class AccKind(enum.Enum):
    UNIVERSAL_BUCHI = "universal-buchi"
    UNIVERSAL_CO_BUCHI = "universal-co-buchi"
    FINITE = "finite"  # nondeterministic finite-word automaton


class AutomatonError(Exception):
    pass


class MalformedSinkAutomaton(AutomatonError):
    pass


class PropositionMismatch(AutomatonError):
    pass


class CapacityError(AutomatonError):
    def __init__(self, message: str, reached: int):
        self.reached = reached
        super().__init__(message)


@dataclass(frozen=True)
class Edge:
    src: int
    label: Formula
    dst: int
    rej: bool = False


@dataclass(frozen=True)
class Automaton:
    n_states: int
    initial: int
    edges: Tuple[Edge, ...]
    acc_kind: AccKind
    marked: FrozenSet[int]
    props: FrozenSet[str]
    state_names: Tuple[str, ...] = ()

    def __post_init__(self):
        if not 0 <= self.initial < self.n_states:
            raise AutomatonError("initial state out of range")
        for e in self.edges:
            if not (0 <= e.src < self.n_states and 0 <= e.dst < self.n_states):
                raise AutomatonError(f"edge {e} has an endpoint out of range")
        if not self.marked <= set(range(self.n_states)):
            raise AutomatonError("marked set out of range")

    @property
    def states(self) -> range:
        return range(self.n_states)

    @property
    def rej_edges(self) -> FrozenSet[int]:
        return frozenset(k for k, e in enumerate(self.edges) if e.rej)

    def out_edges(self, q: int) -> List[Edge]:
        return [e for e in self.edges if e.src == q]

    def name(self, q: int) -> str:
        return self.state_names[q] if self.state_names else str(q)

    def is_true_sink(self, q: int) -> bool:
        """q has a true self-loop and no other outgoing edge."""
        outs = self.out_edges(q)
        return bool(outs) and all(e.dst == q for e in outs) and any(e.label is TRUE for e in outs)

    def sccs(self) -> List[List[int]]:
        succ = [[] for _ in self.states]
        for e in self.edges:
            succ[e.src].append(e.dst)
        return _tarjan(self.n_states, succ)

    def to_dot(self, name: str = "automaton") -> str:
        lines = [f"digraph {name} {{", "  rankdir=LR;", "  init [shape=point];",
                 f"  init -> q{self.initial};"]
        for q in self.states:
            shape = "doublecircle" if q in self.marked else "circle"
            label = _dot_escape(self.name(q))
            lines.append(f'  q{q} [shape={shape}, label="{label}"];')
        for e in self.edges:
            style = ', style=dashed, color=red' if e.rej else ""
            lines.append(f'  q{e.src} -> q{e.dst} [label="{_dot_escape(ltl.render(e.label))}"{style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _tarjan(n: int, succ: Sequence[Sequence[int]]) -> List[List[int]]:
    """Iterative Tarjan; returns SCCs in reverse topological order."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: List[int] = []
    out: List[List[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            if k < len(succ[v]):
                work[-1] = (v, k + 1)
                w = succ[v][k]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    out.append(comp)
    return out


# ---------------------------------------------------------------------------
# Tableau


@dataclass(frozen=True)
class _Cover:
    props: FrozenSet[Formula]     # propositional constraints on the current letter
    nxt: FrozenSet[Formula]       # obligations for the next position
    pending: FrozenSet[Formula]   # until formulas postponed on this step

    def label(self) -> Formula:
        if not self.props:
            return TRUE
        return ltl.conjoin(sorted(self.props))

    def dominates(self, other: "_Cover") -> bool:
        return (self.props <= other.props and self.nxt <= other.nxt
                and self.pending <= other.pending)


def _expand(obligations: FrozenSet[Formula], prop_cache: Dict[Formula, bool]) -> List[_Cover]:
    def propositional(f):
        r = prop_cache.get(f)
        if r is None:
            r = prop_cache[f] = ltl.is_propositional(f)
        return r

    covers: List[_Cover] = []
    # each frame: (todo, processed, props, nxt, pending)
    frames = [(tuple(sorted(obligations)), frozenset(), frozenset(), frozenset(), frozenset())]
    while frames:
        todo, done, props, nxt, pending = frames.pop()
        dead = False
        while todo:
            f, todo = todo[0], todo[1:]
            if f in done or f is TRUE:
                continue
            done = done | {f}
            if f is FALSE:
                dead = True
                break
            if propositional(f):
                if f.op == ATOM and ltl.Not(f) in props or f.op == NOT and f.args[0] in props:
                    dead = True
                    break
                props = props | {f}
                continue
            op = f.op
            if op == AND:
                todo = f.args + todo
            elif op == OR:
                frames.append(((f.args[1],) + todo, done, props, nxt, pending))
                todo = (f.args[0],) + todo
            elif op == NEXT:
                nxt = nxt | {f.args[0]}
            elif op == UNTIL:
                a, b = f.args
                frames.append(((a,) + todo, done, props, nxt | {f}, pending | {f}))
                todo = (b,) + todo
            elif op == RELEASE:
                a, b = f.args
                if a is not FALSE:
                    frames.append(((a, b) + todo, done, props, nxt, pending))
                todo = (b,) + todo
                nxt = nxt | {f}
            else:
                raise AssertionError(op)
        if not dead:
            covers.append(_Cover(props, nxt, pending))
    # drop covers subsumed by another one
    covers = sorted(set(covers), key=lambda c: (len(c.props) + len(c.nxt) + len(c.pending),
                                                sorted(c.props), sorted(c.nxt), sorted(c.pending)))
    kept: List[_Cover] = []
    for c in covers:
        if not any(k.dominates(c) for k in kept):
            kept.append(c)
    return kept


def _set_name(s: FrozenSet[Formula]) -> str:
    if not s:
        return "{}"
    return "{" + ", ".join(ltl.render(f) for f in sorted(s)) + "}"


DEFAULT_MAX_STATES = 20000


def bad_prefix_nfa(phi: Formula, max_states: int = DEFAULT_MAX_STATES) -> Automaton:
    """Finite-word automaton accepting bad prefixes of a safe formula.

    States are obligation sets of the co-safety formula NNF(!phi); a word is
    accepted when every obligation has been discharged.
    """
    if not ltl.is_syntactically_safe(phi):
        raise NotSyntacticallySafe(ltl.render(phi))
    psi = ltl.to_nnf(ltl.Not(phi))
    start = frozenset([psi])
    final = frozenset()
    index: Dict[FrozenSet[Formula], int] = {start: 0}
    order = [start]
    edges: List[Edge] = []
    prop_cache: Dict[Formula, bool] = {}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        if s == final:
            continue
        for c in _expand(s, prop_cache):
            t = c.nxt
            if t not in index:
                if len(index) >= max_states:
                    raise CapacityError("bad-prefix automaton too large", len(index))
                index[t] = len(order)
                order.append(t)
                queue.append(t)
            edges.append(Edge(index[s], c.label(), index[t]))
    marked = frozenset([index[final]]) if final in index else frozenset()
    return _tidy(Automaton(len(order), 0, tuple(edges), AccKind.FINITE, marked,
                           frozenset(ltl.atoms(phi)), tuple(_set_name(s) for s in order)))


def build_b_g(phi: Formula, max_states: int = DEFAULT_MAX_STATES) -> Automaton:
    """Universal Buchi automaton for G phi with a unique rejecting sink `rej`.

    Edges of the bad-prefix automaton that would complete a bad prefix go to
    the sink instead.  The initial state additionally loops on every letter
    that does not complete a bad prefix immediately, so a violation starting
    at any position is tracked from the initial state.
    """
    nfa = bad_prefix_nfa(phi, max_states)
    finals = nfa.marked
    keep = [q for q in nfa.states if q not in finals]
    renum = {q: k for k, q in enumerate(keep)}
    rej = len(keep)
    q0 = renum[nfa.initial]
    edges: List[Edge] = []
    to_rej_from_q0: List[Formula] = []
    for e in nfa.edges:
        if e.src in finals:
            continue
        if e.dst in finals:
            edges.append(Edge(renum[e.src], e.label, rej))
            if e.src == nfa.initial:
                to_rej_from_q0.append(e.label)
        else:
            edges.append(Edge(renum[e.src], e.label, renum[e.dst]))
    loop = ltl.to_nnf(ltl.Not(ltl.disjoin(to_rej_from_q0))) if to_rej_from_q0 else TRUE
    edges.append(Edge(q0, loop, q0))
    edges.append(Edge(rej, TRUE, rej))
    names = tuple(nfa.name(q) for q in keep) + ("rej",)
    return _dedupe(Automaton(rej + 1, q0, tuple(edges), AccKind.UNIVERSAL_BUCHI,
                             frozenset(range(rej)), nfa.props, names))


def find_rej_sink(b: Automaton) -> int:
    unmarked = [q for q in b.states if q not in b.marked]
    if len(unmarked) != 1:
        raise MalformedSinkAutomaton(f"expected one non-accepting state, found {len(unmarked)}")
    rej = unmarked[0]
    if any(e.src == rej and e.dst != rej for e in b.edges):
        raise MalformedSinkAutomaton("non-accepting state is not absorbing")
    if rej == b.initial:
        raise MalformedSinkAutomaton("initial state is the sink")
    return rej


def relax_fg(b: Automaton) -> Automaton:
    """Remove the rejecting sink and send its incoming edges back to the
    initial state, flagged as Rej edges."""
    rej = find_rej_sink(b)
    keep = [q for q in b.states if q != rej]
    renum = {q: k for k, q in enumerate(keep)}
    q0 = renum[b.initial]
    edges = []
    for e in b.edges:
        if e.src == rej:
            continue
        if e.dst == rej:
            edges.append(Edge(renum[e.src], e.label, q0, rej=True))
        else:
            edges.append(Edge(renum[e.src], e.label, renum[e.dst], e.rej))
    names = tuple(b.name(q) for q in keep) if b.state_names else ()
    return Automaton(len(keep), q0, tuple(edges), AccKind.UNIVERSAL_BUCHI,
                     frozenset(range(len(keep))), b.props, names)


def ltl_to_ucw(f: Formula, max_states: int = DEFAULT_MAX_STATES) -> Automaton:
    """Universal co-Buchi automaton accepting exactly the systems satisfying f.

    Built as a Buchi automaton for !f (tableau with until tracking, then
    degeneralized with a level counter) and read dually.
    """
    psi = ltl.to_nnf(ltl.Not(f))
    untils = sorted(g for g in ltl.subformulas(psi) if g.op == UNTIL)
    k = len(untils)
    start = frozenset([psi])
    sink_key = ("sink",)
    index: Dict[object, int] = {}
    order: List[object] = []
    names: List[str] = []

    def state(key, name):
        if key not in index:
            if len(index) >= max_states:
                raise CapacityError("automaton for the formula is too large", len(index))
            index[key] = len(order)
            order.append(key)
            names.append(name)
            queue.append(key)
        return index[key]

    queue: deque = deque()
    init = state((start, 0), _set_name(start) + "/0")
    edges: List[Edge] = []
    prop_cache: Dict[Formula, bool] = {}
    cover_cache: Dict[FrozenSet[Formula], List[_Cover]] = {}
    marked: Set[int] = set()
    while queue:
        key = queue.popleft()
        src = index[key]
        if key == sink_key:
            edges.append(Edge(src, TRUE, src))
            marked.add(src)
            continue
        obl, level = key
        if level == k:
            marked.add(src)
        base = 0 if level == k else level
        if obl not in cover_cache:
            cover_cache[obl] = _expand(obl, prop_cache)
        for c in cover_cache[obl]:
            if not c.nxt:
                dst = state(sink_key, "sink")
            else:
                lv = base
                while lv < k and untils[lv] not in c.pending:
                    lv += 1
                dst = state((c.nxt, lv), f"{_set_name(c.nxt)}/{lv}")
            edges.append(Edge(src, c.label(), dst))
    aut = Automaton(len(order), init, tuple(edges), AccKind.UNIVERSAL_CO_BUCHI,
                    frozenset(marked), frozenset(ltl.atoms(f)), tuple(names))
    return _tidy(aut)


def ucw_for_conjunction(parts: Sequence[Formula], max_states: int = DEFAULT_MAX_STATES) -> Automaton:
    """UCW for a conjunction, built as the universal union of one UCW per
    conjunct.  Propositional conjuncts and invariants G p with p
    propositional are merged first, since they need no state."""
    parts = [p for p in parts if p is not TRUE]
    init_props = [p for p in parts if ltl.is_propositional(p)]
    invariants = [p.args[1] for p in parts if p.is_globally and ltl.is_propositional(p.args[1])]
    rest = [p for p in parts if not ltl.is_propositional(p)
            and not (p.is_globally and ltl.is_propositional(p.args[1]))]
    groups: List[Formula] = []
    if init_props:
        groups.append(ltl.conjoin(init_props))
    if invariants:
        groups.append(ltl.Globally(ltl.conjoin(invariants)))
    groups.extend(rest)
    if not groups:
        return ltl_to_ucw(TRUE, max_states)
    if len(groups) == 1:
        return ltl_to_ucw(groups[0], max_states)
    return union(ltl_to_ucw(g, max_states) for g in groups)


def union(auts: Iterable[Automaton]) -> Automaton:
    """Universal union of co-Buchi automata: a fresh initial state takes all
    initial edges of every component.  Rejecting true-sinks are shared."""
    auts = list(auts)
    edges: List[Edge] = []
    marked: Set[int] = set()
    names = ["init"]
    n = 1
    sink: Optional[int] = None
    props: Set[str] = set()
    for a in auts:
        if a.acc_kind is not AccKind.UNIVERSAL_CO_BUCHI:
            raise AutomatonError("union expects co-Buchi automata")
        props |= a.props
        offset: Dict[int, int] = {}
        for q in a.states:
            if q in a.marked and a.is_true_sink(q):
                if sink is None:
                    sink = n
                    n += 1
                    names.append("sink")
                    marked.add(sink)
                    edges.append(Edge(sink, TRUE, sink))
                offset[q] = sink
            else:
                offset[q] = n
                n += 1
                names.append(a.name(q))
                if q in a.marked:
                    marked.add(offset[q])
        for e in a.edges:
            if offset[e.src] == sink:
                continue
            edges.append(Edge(offset[e.src], e.label, offset[e.dst]))
            if e.src == a.initial:
                edges.append(Edge(0, e.label, offset[e.dst]))
    return _tidy(Automaton(n, 0, tuple(edges), AccKind.UNIVERSAL_CO_BUCHI, frozenset(marked),
                           frozenset(props), tuple(names)))


def _dedupe(a: Automaton) -> Automaton:
    seen: Set[Tuple[int, Formula, int, bool]] = set()
    edges = []
    for e in a.edges:
        key = (e.src, e.label, e.dst, e.rej)
        if key not in seen and e.label is not FALSE:
            seen.add(key)
            edges.append(e)
    return Automaton(a.n_states, a.initial, tuple(edges), a.acc_kind, a.marked, a.props, a.state_names)


def _tidy(a: Automaton) -> Automaton:
    """Drop unreachable states and duplicate edges, renumbering from the
    initial state in BFS order."""
    a = _dedupe(a)
    succ: Dict[int, List[int]] = {q: [] for q in a.states}
    for e in a.edges:
        succ[e.src].append(e.dst)
    order = [a.initial]
    seen = {a.initial}
    i = 0
    while i < len(order):
        for t in succ[order[i]]:
            if t not in seen:
                seen.add(t)
                order.append(t)
        i += 1
    renum = {q: k for k, q in enumerate(order)}
    edges = tuple(Edge(renum[e.src], e.label, renum[e.dst], e.rej) for e in a.edges if e.src in seen)
    names = tuple(a.name(q) for q in order) if a.state_names else ()
    return Automaton(len(order), 0, edges, a.acc_kind,
                     frozenset(renum[q] for q in a.marked if q in seen), a.props, names)


# ---------------------------------------------------------------------------
# Run graphs


@dataclass
class RunGraph:
    nodes: List[Tuple[int, int]]
    # (src node index, input index, dst node index, rejecting flag, automaton edge index)
    edges: List[Tuple[int, int, int, bool, int]]
    initial: int = 0
    node_index: Dict[Tuple[int, int], int] = field(default_factory=dict)

    def successors(self) -> List[List[int]]:
        succ: List[List[int]] = [[] for _ in self.nodes]
        for u, _, v, _, _ in self.edges:
            succ[u].append(v)
        return succ

    def sccs(self) -> List[List[int]]:
        return _tarjan(len(self.nodes), self.successors())

    def has_rejecting_cycle(self) -> bool:
        """Some cycle through a flagged edge (all nodes here are reachable)."""
        comp_of = {}
        for k, comp in enumerate(self.sccs()):
            for v in comp:
                comp_of[v] = k
        return any(flag and comp_of[u] == comp_of[v] for u, _, v, flag, _ in self.edges)

    def has_rejecting_edge(self) -> bool:
        return any(flag for _, _, _, flag, _ in self.edges)

    def to_dot(self, t: TransitionSystem, aut: Automaton, annotation=None) -> str:
        lines = ["digraph run {", "  rankdir=LR;", "  init [shape=point];", f"  init -> n{self.initial};"]
        for k, (s, q) in enumerate(self.nodes):
            label = f"{s},{_dot_escape(aut.name(q))}"
            if annotation is not None:
                label += f"\\n{annotation.get((s, q), '_')}"
            lines.append(f'  n{k} [label="{label}"];')
        ins = input_valuations(t.inputs)
        for u, i, v, flag, _ in self.edges:
            s = self.nodes[u][0]
            letter = ",".join(sorted(ins[i] | t.out[s][i])) or "-"
            style = ", style=dashed, color=red" if flag else ""
            lines.append(f'  n{u} -> n{v} [label="{letter}"{style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def run_graph(aut: Automaton, t: TransitionSystem) -> RunGraph:
    """Reachable part of the product of a universal automaton with a machine.

    An edge is flagged when it is a Rej edge or, for co-Buchi automata,
    when it enters a rejecting state.
    """
    if not aut.props <= t.props:
        raise PropositionMismatch(f"automaton mentions {sorted(aut.props - t.props)} "
                                  "which the machine does not define")
    ins = input_valuations(t.inputs)
    by_src: Dict[int, List[Tuple[int, Edge]]] = {}
    for k, e in enumerate(aut.edges):
        by_src.setdefault(e.src, []).append((k, e))
    co_buchi = aut.acc_kind is AccKind.UNIVERSAL_CO_BUCHI
    start = (t.initial, aut.initial)
    g = RunGraph([start], [], 0, {start: 0})
    i = 0
    label_cache: Dict[Tuple[Formula, FrozenSet[str]], bool] = {}
    while i < len(g.nodes):
        s, q = g.nodes[i]
        for x, val in enumerate(ins):
            s2, outs = t.succ[s][x], t.out[s][x]
            letter = val | outs
            for k, e in by_src.get(q, ()):
                key = (e.label, letter)
                ok = label_cache.get(key)
                if ok is None:
                    ok = label_cache[key] = ltl.evaluate(e.label, letter)
                if not ok:
                    continue
                node = (s2, e.dst)
                if node not in g.node_index:
                    g.node_index[node] = len(g.nodes)
                    g.nodes.append(node)
                flag = e.rej or (co_buchi and e.dst in aut.marked)
                g.edges.append((i, x, g.node_index[node], flag, k))
        i += 1
    return g


def accepts(aut: Automaton, t: TransitionSystem) -> bool:
    """Universal acceptance of a machine: co-Buchi automata must not have a
    rejecting cycle; Buchi automata with a sink must never reach it."""
    g = run_graph(aut, t)
    if aut.acc_kind is AccKind.UNIVERSAL_CO_BUCHI:
        return not g.has_rejecting_cycle()
    if aut.acc_kind is AccKind.UNIVERSAL_BUCHI:
        # every reachable cycle must visit an accepting state
        succ = g.successors()
        comp_of = {}
        comps = g.sccs()
        for k, comp in enumerate(comps):
            for v in comp:
                comp_of[v] = k
        for k, comp in enumerate(comps):
            cyclic = len(comp) > 1 or any(v in succ[v] for v in comp)
            if cyclic and not any(g.nodes[v][1] in aut.marked for v in comp):
                return False
        return True
    raise AutomatonError("finite-word automata have no acceptance over machines")


@dataclass(frozen=True)
class SoftAutomata:
    """Automata used for a soft specification G phi."""

    phi: Formula
    b_g: Automaton
    relaxed: Automaton
    gf: Automaton


def soft_automata(phi: Formula, max_states: int = DEFAULT_MAX_STATES) -> SoftAutomata:
    """phi is the body of the soft specification G phi."""
    b = build_b_g(phi, max_states)
    return SoftAutomata(phi, b, relax_fg(b), ltl_to_ucw(ltl.Globally(ltl.Finally(phi)), max_states))
