"""Finite deterministic input-enabled machines."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Sequence, Tuple


def input_valuations(inputs: Sequence[str]) -> List[FrozenSet[str]]:
    """All input valuations, indexed so that bit k of the index is inputs[k]."""
    return [frozenset(p for k, p in enumerate(inputs) if (i >> k) & 1)
            for i in range(1 << len(inputs))]


def bitstring(props: Sequence[str], valuation) -> str:
    return "".join("1" if p in valuation else "0" for p in props)


@dataclass(frozen=True)
class TransitionSystem:
    """Mealy-style machine: (state, input index) -> (successor, true outputs)."""

    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...]
    succ: Tuple[Tuple[int, ...], ...]
    out: Tuple[Tuple[FrozenSet[str], ...], ...]
    initial: int = 0

    def __post_init__(self):
        n_in = 1 << len(self.inputs)
        if len(self.succ) != len(self.out) or not self.succ:
            raise ValueError("transition table must be non-empty and rectangular")
        for s, (row, orow) in enumerate(zip(self.succ, self.out)):
            if len(row) != n_in or len(orow) != n_in:
                raise ValueError(f"state {s} is not input-enabled")
            for t in row:
                if not 0 <= t < len(self.succ):
                    raise ValueError(f"state {s} has successor {t} out of range")
            for o in orow:
                if not o <= set(self.outputs):
                    raise ValueError(f"state {s} emits undeclared outputs {set(o) - set(self.outputs)}")
        if not 0 <= self.initial < len(self.succ):
            raise ValueError("initial state out of range")

    @property
    def n_states(self) -> int:
        return len(self.succ)

    @property
    def props(self) -> FrozenSet[str]:
        return frozenset(self.inputs) | frozenset(self.outputs)

    def step(self, s: int, i: int) -> Tuple[int, FrozenSet[str]]:
        return self.succ[s][i], self.out[s][i]

    def letter(self, s: int, i: int) -> FrozenSet[str]:
        """Full letter (inputs plus outputs) read when input i arrives in s."""
        return input_valuations(self.inputs)[i] | self.out[s][i]

    def reachable(self) -> List[int]:
        seen = {self.initial}
        stack = [self.initial]
        while stack:
            s = stack.pop()
            for t in self.succ[s]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return sorted(seen)

    def to_json(self) -> dict:
        ins = input_valuations(self.inputs)
        table = []
        for s in range(self.n_states):
            row = {}
            for i, val in enumerate(ins):
                row[bitstring(self.inputs, val) or "-"] = {
                    "next": self.succ[s][i],
                    "outputs": bitstring(self.outputs, self.out[s][i]),
                }
            table.append(row)
        return {
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "states": self.n_states,
            "initial": self.initial,
            "transitions": table,
        }

    @classmethod
    def from_json(cls, data) -> "TransitionSystem":
        if isinstance(data, str):
            data = json.loads(data)
        inputs = tuple(data["inputs"])
        outputs = tuple(data["outputs"])
        ins = input_valuations(inputs)
        succ, out = [], []
        for row in data["transitions"]:
            srow, orow = [], []
            for val in ins:
                cell = row[bitstring(inputs, val) or "-"]
                srow.append(int(cell["next"]))
                orow.append(frozenset(o for o, bit in zip(outputs, cell["outputs"]) if bit == "1"))
            succ.append(tuple(srow))
            out.append(tuple(orow))
        return cls(inputs, outputs, tuple(succ), tuple(out), int(data.get("initial", 0)))

    def to_dot(self, name: str = "machine") -> str:
        ins = input_valuations(self.inputs)
        lines = [f"digraph {name} {{", "  rankdir=LR;", '  init [shape=point];',
                 f"  init -> s{self.initial};"]
        for s in range(self.n_states):
            lines.append(f'  s{s} [shape=circle, label="{s}"];')
        for s in range(self.n_states):
            edges: Dict[Tuple[int, FrozenSet[str]], List[str]] = {}
            for i, val in enumerate(ins):
                key = (self.succ[s][i], self.out[s][i])
                edges.setdefault(key, []).append(bitstring(self.inputs, val) or "-")
            for (t, outs), labels in edges.items():
                o = ",".join(sorted(outs)) or "-"
                lines.append(f'  s{s} -> s{t} [label="{"|".join(labels)} / {o}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def all_machines(inputs: Sequence[str], outputs: Sequence[str], n_states: int) -> Iterator[TransitionSystem]:
    """Enumerate every machine with exactly n_states states (initial state 0)."""
    inputs, outputs = tuple(inputs), tuple(outputs)
    n_in = 1 << len(inputs)
    out_vals = [frozenset(o for k, o in enumerate(outputs) if (m >> k) & 1)
                for m in range(1 << len(outputs))]
    cells = list(itertools.product(range(n_states), out_vals))
    for choice in itertools.product(cells, repeat=n_states * n_in):
        succ = tuple(tuple(choice[s * n_in + i][0] for i in range(n_in)) for s in range(n_states))
        out = tuple(tuple(choice[s * n_in + i][1] for i in range(n_in)) for s in range(n_states))
        yield TransitionSystem(inputs, outputs, succ, out)
