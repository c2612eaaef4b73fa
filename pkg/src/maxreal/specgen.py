"""Generators for the museum-robot and power-network benchmark families."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import ltl
from .encoding import ceil_log2
from .ltl import Atom, Finally, Globally, Implies, Next, Not, Until, conjoin, disjoin
from .problem import ProblemError, SoftSpec, SynthesisProblem

ROBOT_LOCATIONS = ("entrance", "corr1", "corr2", "exh1", "exh2", "passage", "office", "library")

# Only the corridor-1 row is pinned down by the published formulas; the
# other rows are a reconstruction in which every tour runs
# entrance -> corr1 -> exh1 -> (library | passage) -> exh2 -> corr2 -> entrance,
# with the office reachable from corr1 only.
ROBOT_MAP: Dict[str, Tuple[str, ...]] = {
    "entrance": ("entrance", "corr1"),
    "corr1": ("corr1", "office", "exh1"),
    "office": ("office", "corr1"),
    "exh1": ("exh1", "library", "passage"),
    "library": ("library", "exh1", "exh2"),
    "passage": ("passage", "exh1", "exh2"),
    "exh2": ("exh2", "library", "passage", "corr2"),
    "corr2": ("corr2", "entrance"),
}


def robot_spec(adjacency: Optional[Dict[str, Sequence[str]]] = None) -> SynthesisProblem:
    adj = dict(ROBOT_MAP if adjacency is None else adjacency)
    if set(adj) != set(ROBOT_LOCATIONS):
        raise ProblemError("adjacency must list every location")
    a = {o: Atom(o) for o in ROBOT_LOCATIONS}
    ent, exh1, exh2 = a["entrance"], a["exh1"], a["exh2"]
    mutex = conjoin(Implies(a[o1], conjoin(Not(a[o2]) for o2 in ROBOT_LOCATIONS if o2 != o1))
                    for o1 in ROBOT_LOCATIONS)
    hard = [ent, Globally(mutex)]
    for loc in ROBOT_LOCATIONS:
        hard.append(Globally(Implies(a[loc], Next(disjoin(a[x] for x in adj[loc])))))
    hard += [
        Globally(Finally(exh1)),
        Globally(Finally(exh2)),
        Globally(Implies(exh1, Until(Next(Not(ent)), exh2))),
        Globally(Implies(exh2, Until(Next(Not(exh1)), ent))),
        Globally(Implies(ent, Until(Next(Not(exh2)), exh1))),
        Until(Not(exh2), a["office"]),
    ]
    occupied = Atom("occupied")
    at_exh = ltl.Or(exh1, exh2)
    softs = [
        Globally(Implies(a["corr1"], Next(Not(a["office"])))),
        Globally(Implies(at_exh, Next(Not(a["library"])))),
        Globally(Implies(ltl.And(at_exh, Next(occupied)), Next(Not(a["passage"])))),
    ]
    return SynthesisProblem(("occupied",), ROBOT_LOCATIONS, hard, [SoftSpec(f) for f in softs], "robot")


# ---------------------------------------------------------------------------
# power network


@dataclass(frozen=True)
class PowerNetParams:
    supplies: int
    loads: int
    capacity: int
    critical: int
    noncritical: int
    initializing: int = 0
    # None means every load is connected to every supply; otherwise the
    # suppliers of each load as 0-based indices
    adjacency: Optional[Tuple[Tuple[int, ...], ...]] = None
    faults: int = 1
    switching_restricted: bool = False

    def validate(self):
        if self.supplies < 1 or self.loads < 1 or self.capacity < 1:
            raise ProblemError("supplies, loads and capacity must be positive")
        if self.critical + self.noncritical + self.initializing != self.loads:
            raise ProblemError("load classes must add up to the number of loads")
        if min(self.critical, self.noncritical, self.initializing) < 0:
            raise ProblemError("load class counts must be non-negative")
        if not 0 <= self.faults <= self.supplies:
            raise ProblemError("fault bound must lie in 0..supplies")
        if self.adjacency is not None:
            if len(self.adjacency) != self.loads:
                raise ProblemError("adjacency needs one supplier list per load")
            for sup in self.adjacency:
                if not sup or any(not 0 <= p < self.supplies for p in sup):
                    raise ProblemError("each load needs suppliers within range")

    def suppliers(self) -> List[Tuple[int, ...]]:
        if self.adjacency is None:
            return [tuple(range(self.supplies)) for _ in range(self.loads)]
        return [tuple(sorted(set(s))) for s in self.adjacency]

    def load_classes(self) -> List[str]:
        return (["critical"] * self.critical + ["noncritical"] * self.noncritical
                + ["initializing"] * self.initializing)


def ring_adjacency(loads: int, supplies: int) -> Tuple[Tuple[int, ...], ...]:
    """Load l is wired to supplies l and l+1 (mod the number of supplies)."""
    return tuple(tuple(sorted({l % supplies, (l + 1) % supplies})) for l in range(loads))


def switch_name(l: int, p: int) -> str:
    return f"s{l + 1}_{p + 1}"


def fault_bit_name(i: int, k: int) -> str:
    return f"e{i + 1}_{k}"


def fault_bits(p: PowerNetParams) -> int:
    return ceil_log2(p.supplies + 1)


def fault_is(params: PowerNetParams, i: int, supply: int) -> ltl.Formula:
    """e_i = supply + 1 in the little-endian binary encoding (0 means no fault)."""
    code = supply + 1
    return conjoin(Atom(fault_bit_name(i, k)) if (code >> k) & 1 else Not(Atom(fault_bit_name(i, k)))
                   for k in range(fault_bits(params)))


def power_spec(params: PowerNetParams, name: Optional[str] = None) -> SynthesisProblem:
    params.validate()
    sup = params.suppliers()
    cons = {q: [l for l in range(params.loads) if q in sup[l]] for q in range(params.supplies)}
    inputs = tuple(fault_bit_name(i, k) for i in range(params.faults) for k in range(fault_bits(params)))
    outputs = tuple(switch_name(l, q) for l in range(params.loads) for q in sup[l])
    s = {(l, q): Atom(switch_name(l, q)) for l in range(params.loads) for q in sup[l]}

    def powered(l):
        return disjoin(s[l, q] for q in sup[l])

    hard: List[ltl.Formula] = []
    softs: List[ltl.Formula] = []
    for l, cls in enumerate(params.load_classes()):
        if cls == "critical":
            hard.append(Globally(powered(l)))
        elif cls == "initializing":
            hard.append(ltl.And(powered(l), Next(powered(l))))
        else:
            softs.append(Globally(powered(l)))
    for l in range(params.loads):
        for q1 in sup[l]:
            others = [Not(s[l, q2]) for q2 in sup[l] if q2 != q1]
            if others:
                hard.append(Globally(Implies(s[l, q1], conjoin(others))))
    for q in range(params.supplies):
        if len(cons[q]) <= params.capacity:
            continue
        for chosen in itertools.combinations(cons[q], params.capacity):
            rest = [Not(s[l, q]) for l in cons[q] if l not in chosen]
            hard.append(Globally(Implies(conjoin(s[l, q] for l in chosen), conjoin(rest))))
    for i in range(params.faults):
        for q in range(params.supplies):
            if cons[q]:
                hard.append(Globally(Implies(fault_is(params, i, q), conjoin(Not(s[l, q]) for l in cons[q]))))
    if params.switching_restricted:
        for l in range(params.loads):
            for q in sup[l]:
                faulty = disjoin(fault_is(params, i, q) for i in range(params.faults))
                softs.append(Globally(Implies(ltl.And(s[l, q], Next(Not(faulty))), Next(s[l, q]))))
    return SynthesisProblem(inputs, outputs, hard, [SoftSpec(f) for f in softs], name or "power")


def _row(supplies, loads, cap, crit, nc, init, sparse, restricted):
    adj = ring_adjacency(loads, supplies) if sparse else None
    return PowerNetParams(supplies, loads, cap, crit, nc, init, adj, 1, restricted)


# instance number -> parameters, following the published instance table
POWER_INSTANCES: Dict[int, PowerNetParams] = {
    1: _row(3, 3, 1, 1, 2, 0, False, False),
    2: _row(3, 6, 2, 2, 4, 0, False, False),
    3: _row(3, 3, 1, 0, 2, 1, False, False),
    4: _row(3, 6, 2, 1, 4, 1, False, False),
    5: _row(4, 2, 1, 1, 1, 0, True, False),
    6: _row(4, 4, 1, 1, 3, 0, True, False),
    7: _row(4, 6, 1, 1, 5, 0, True, False),
    8: _row(4, 8, 1, 1, 7, 0, True, False),
    9: _row(4, 2, 1, 1, 1, 0, True, True),
    10: _row(4, 4, 1, 1, 3, 0, True, True),
    11: _row(4, 6, 1, 1, 5, 0, True, True),
    12: _row(4, 8, 1, 1, 7, 0, True, True),
}


def power_instance(k: int) -> SynthesisProblem:
    if k not in POWER_INSTANCES:
        raise ProblemError(f"no power instance {k}; choose from 1..{len(POWER_INSTANCES)}")
    return power_spec(POWER_INSTANCES[k], f"power{k}")


def instance_catalogue() -> List[dict]:
    rows = []
    for k, p in POWER_INSTANCES.items():
        prob = power_spec(p, f"power{k}")
        rows.append({
            "instance": k,
            "supplies": p.supplies,
            "loads": p.loads,
            "capacity": p.capacity,
            "critical": p.critical,
            "noncritical": p.noncritical,
            "initializing": p.initializing,
            "connectivity": "sparse" if p.adjacency is not None else "full",
            "restricted": p.switching_restricted,
            "inputs": len(prob.inputs),
            "outputs": len(prob.outputs),
            "softs": prob.n,
        })
    return rows
