"""Independent reference implementations used by the tests.

Nothing here goes through the automata or the encoder: LTL is evaluated
directly on lasso words, safety formulas are checked by formula progression,
and MaxSAT is solved by enumerating assignments.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from maxreal import ltl
from maxreal.ltl import Formula
from maxreal.system import TransitionSystem, input_valuations

Letter = FrozenSet[str]


# ---------------------------------------------------------------------------
# LTL on ultimately periodic words


def holds_on_lasso(f: Formula, prefix: Sequence[Letter], loop: Sequence[Letter]) -> bool:
    """Truth of f at position 0 of prefix . loop^omega."""
    if not loop:
        raise ValueError("loop must be non-empty")
    word = list(prefix) + list(loop)
    n, back = len(word), len(prefix)
    nxt = [i + 1 if i + 1 < n else back for i in range(n)]
    memo: Dict[Formula, List[bool]] = {}

    def val(g: Formula) -> List[bool]:
        if g in memo:
            return memo[g]
        op = g.op
        if op == "true":
            r = [True] * n
        elif op == "false":
            r = [False] * n
        elif op == "atom":
            r = [g.name in word[i] for i in range(n)]
        elif op == "not":
            r = [not x for x in val(g.args[0])]
        elif op == "and":
            a, b = val(g.args[0]), val(g.args[1])
            r = [x and y for x, y in zip(a, b)]
        elif op == "or":
            a, b = val(g.args[0]), val(g.args[1])
            r = [x or y for x, y in zip(a, b)]
        elif op == "X":
            a = val(g.args[0])
            r = [a[nxt[i]] for i in range(n)]
        elif op in ("U", "R"):
            a, b = val(g.args[0]), val(g.args[1])
            until = op == "U"
            r = [not until] * n
            changed = True
            while changed:
                changed = False
                for i in reversed(range(n)):
                    v = (b[i] or (a[i] and r[nxt[i]])) if until else (b[i] and (a[i] or r[nxt[i]]))
                    if v != r[i]:
                        r[i] = v
                        changed = True
        else:
            raise ValueError(op)
        memo[g] = r
        return r

    return val(f)[0]


def letters(props: Sequence[str]) -> List[Letter]:
    return input_valuations(list(props))


def all_lassos(props: Sequence[str], max_len: int) -> Iterable[Tuple[Tuple[Letter, ...], Tuple[Letter, ...]]]:
    alphabet = letters(props)
    for total in range(1, max_len + 1):
        for word in itertools.product(alphabet, repeat=total):
            for back in range(total):
                yield word[:back], word[back:]


def machine_lassos(t: TransitionSystem, max_len: int):
    """Letter lassos of every walk of the machine with prefix + loop <= max_len.

    A walk node is (state, input index); its letter is the input valuation
    plus the outputs produced.
    """
    n_in = 1 << len(t.inputs)
    seen = set()

    def succ(node):
        s, i = node
        return [(t.succ[s][i], j) for j in range(n_in)]

    stack = [[(t.initial, i)] for i in range(n_in)]
    while stack:
        path = stack.pop()
        last = succ(path[-1])
        for back in range(len(path)):
            if path[back] in last:
                key = (tuple(path[:back]), tuple(path[back:]))
                if key not in seen:
                    seen.add(key)
                    yield (tuple(t.letter(*v) for v in path[:back]),
                           tuple(t.letter(*v) for v in path[back:]))
        if len(path) < max_len:
            for v in last:
                stack.append(path + [v])


def machine_satisfies(t: TransitionSystem, f: Formula, max_len: int = 6) -> bool:
    """Every walk satisfies f, checked on walk lassos with prefix + loop <= max_len.

    Six is enough for the small formulas and two-state machines used in the
    tests; test_lasso_length_is_sufficient checks this against length 8.
    """
    cache = _lasso_cache.setdefault(f, {})
    for pre, loop in machine_lassos(t, max_len):
        key = (pre, loop)
        ok = cache.get(key)
        if ok is None:
            ok = cache[key] = holds_on_lasso(f, pre, loop)
        if not ok:
            return False
    return True


_lasso_cache: Dict[Formula, Dict] = {}


# ---------------------------------------------------------------------------
# Formula progression for safety formulas
#
# Residuals are kept in absorbed disjunctive normal form: a frozenset of
# clauses, each a frozenset of atoms ("lit", name, positive), ("X", r) or
# ("R", r1, r2).  Absorption keeps the set of residuals finite.

TOP = frozenset([frozenset()])
BOT = frozenset()


def _absorb(clauses):
    clauses = set(clauses)
    return frozenset(c for c in clauses if not any(d < c for d in clauses))


def _consistent(clause):
    return not any(a[0] == "lit" and ("lit", a[1], not a[2]) in clause for a in clause)


def d_or(x, y):
    return _absorb(x | y)


def d_and(x, y):
    return _absorb(c | d for c in x for d in y if _consistent(c | d))


def _atom(a):
    if a[0] == "X" and a[1] in (TOP, BOT):
        return a[1]
    if a[0] == "R" and a[2] in (TOP, BOT):
        return a[2]
    return frozenset([frozenset([a])])


def residual(f: Formula):
    f = ltl.to_nnf(f)

    def go(g):
        op = g.op
        if op == "true":
            return TOP
        if op == "false":
            return BOT
        if op == "atom":
            return _atom(("lit", g.name, True))
        if op == "not":
            return _atom(("lit", g.args[0].name, False))
        if op == "and":
            return d_and(go(g.args[0]), go(g.args[1]))
        if op == "or":
            return d_or(go(g.args[0]), go(g.args[1]))
        if op == "X":
            return _atom(("X", go(g.args[0])))
        if op == "R":
            return _atom(("R", go(g.args[0]), go(g.args[1])))
        raise ValueError(f"progression oracle handles safety formulas only, got {op}")

    return go(f)


@lru_cache(maxsize=None)
def _progress_atom(a, letter: Letter):
    if a[0] == "lit":
        return TOP if (a[1] in letter) == a[2] else BOT
    if a[0] == "X":
        return a[1]
    return d_and(progress(a[2], letter), d_or(progress(a[1], letter), _atom(a)))


@lru_cache(maxsize=None)
def progress(r, letter: Letter):
    out = BOT
    for clause in r:
        acc = TOP
        for a in clause:
            acc = d_and(acc, _progress_atom(a, letter))
            if acc == BOT:
                break
        out = d_or(out, acc)
    return out


def violation_graph(t: TransitionSystem, phi: Formula):
    """Deterministic product of the machine with the set of pending
    obligations of phi started at every position so far.  Edges carry a flag
    when some obligation is refuted on that step."""
    start_r = residual(phi)
    n_in = 1 << len(t.inputs)
    start = (t.initial, frozenset())
    g = nx.DiGraph()
    g.add_node(start)
    flagged = set()
    stack = [start]
    while stack:
        node = stack.pop()
        s, pending = node
        for i in range(n_in):
            letter = t.letter(s, i)
            nxt = {progress(r, letter) for r in pending | {start_r}}
            bad = BOT in nxt
            target = (t.succ[s][i], frozenset(nxt - {TOP, BOT}))
            if bad:
                flagged.add((node, target))
            if target not in g:
                g.add_node(target)
                stack.append(target)
            g.add_edge(node, target)
    return g, flagged


def sat_globally(t: TransitionSystem, phi: Formula) -> bool:
    _, flagged = violation_graph(t, phi)
    return not flagged


def sat_finally_globally(t: TransitionSystem, phi: Formula) -> bool:
    g, flagged = violation_graph(t, phi)
    comp = {}
    for k, scc in enumerate(nx.strongly_connected_components(g)):
        for v in scc:
            comp[v] = k
    return not any(comp[u] == comp[v] for u, v in flagged)


def residual_satisfiable(r, props: Sequence[str]) -> bool:
    """A safety residual is satisfiable iff some infinite path of the
    progression graph avoids false."""
    alphabet = letters(props)
    nodes, stack = {r}, [r]
    succ = {}
    while stack:
        x = stack.pop()
        succ[x] = [progress(x, a) for a in alphabet]
        for y in succ[x]:
            if y not in nodes:
                nodes.add(y)
                stack.append(y)
    alive = {x for x in nodes if x != BOT}
    changed = True
    while changed:
        changed = False
        for x in list(alive):
            if not any(y in alive for y in succ[x]):
                alive.discard(x)
                changed = True
    return r in alive


def is_bad_prefix(phi: Formula, word: Sequence[Letter], props: Sequence[str]) -> bool:
    r = residual(phi)
    for a in word:
        r = progress(r, a)
    return not residual_satisfiable(r, props)


# ---------------------------------------------------------------------------
# finite words through an automaton


def nfa_accepts(aut, word: Sequence[Letter]) -> bool:
    current = {aut.initial}
    for a in word:
        current = {e.dst for e in aut.edges if e.src in current and ltl.evaluate(e.label, a)}
    return bool(current & aut.marked)


# ---------------------------------------------------------------------------
# MaxSAT by enumeration


def brute_force_maxsat(num_vars: int, hard: Sequence[Sequence[int]],
                       soft: Sequence[Tuple[int, Sequence[int]]]) -> Optional[int]:
    """Best soft weight over assignments satisfying every hard clause, or None."""
    best = None
    for bits in range(1 << num_vars):
        def true(l):
            v = abs(l) - 1
            return ((bits >> v) & 1) == (l > 0)
        if not all(any(true(l) for l in c) for c in hard):
            continue
        w = sum(wt for wt, c in soft if any(true(l) for l in c))
        if best is None or w > best:
            best = w
    return best


# ---------------------------------------------------------------------------
# machines


def canonical_machines(inputs: Sequence[str], outputs: Sequence[str], max_states: int):
    """One representative per machine reachable from its initial state, up to
    renaming states in breadth-first order, for every size up to max_states."""
    from maxreal.system import all_machines
    seen = set()
    for n in range(1, max_states + 1):
        for t in all_machines(inputs, outputs, n):
            key = _canonical_key(t)
            if key is None or key in seen:
                continue
            seen.add(key)
            yield t


def _canonical_key(t: TransitionSystem):
    order = [t.initial]
    pos = {t.initial: 0}
    k = 0
    while k < len(order):
        s = order[k]
        for nxt in t.succ[s]:
            if nxt not in pos:
                pos[nxt] = len(order)
                order.append(nxt)
        k += 1
    if len(order) != t.n_states:
        return None
    return tuple((tuple(pos[x] for x in t.succ[s]), tuple(tuple(sorted(o)) for o in t.out[s])) for s in order)
