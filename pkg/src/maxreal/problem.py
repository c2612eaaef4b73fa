"""Synthesis problems and their line-oriented text format.

    [inputs]
    occupied
    [outputs]
    office library
    [hard]
    G (office -> X !library)
    [soft]
    G (office -> X !office)
    [relax]
    1: G (office -> X !office) ; F G (office -> X !office) ; true
    [weights]
    1: 1 2 3

Lines starting with `#` are comments.  [hard] lines are conjoined.  A [soft]
line that is not of the form `G psi` is read as `G (line)`.  [relax] and
[weights] lines refer to softs by 1-based position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import ltl
from .ltl import Formula, PropKind


class ProblemError(ValueError):
    pass


@dataclass
class SoftSpec:
    formula: Formula                       # G phi
    relax: Optional[List[Formula]] = None  # strength-ordered relaxations, strongest first
    weights: Optional[List[int]] = None

    @property
    def body(self) -> Formula:
        return self.formula.args[1]

    def relax_vector(self) -> List[Formula]:
        """Explicit relaxations, or G phi, F G phi, G F phi by default."""
        if self.relax:
            return list(self.relax)
        phi = self.body
        return [ltl.Globally(phi), ltl.Finally(ltl.Globally(phi)), ltl.Globally(ltl.Finally(phi))]


@dataclass
class SynthesisProblem:
    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...]
    hard_parts: List[Formula]
    softs: List[SoftSpec] = field(default_factory=list)
    name: str = "problem"

    def __post_init__(self):
        self.inputs = tuple(self.inputs)
        self.outputs = tuple(self.outputs)
        self.validate()

    @property
    def hard(self) -> Formula:
        return ltl.conjoin(self.hard_parts)

    @property
    def n(self) -> int:
        return len(self.softs)

    def prop_kinds(self) -> Dict[str, PropKind]:
        kinds = {p: PropKind.INPUT for p in self.inputs}
        kinds.update({p: PropKind.OUTPUT for p in self.outputs})
        return kinds

    def validate(self):
        overlap = set(self.inputs) & set(self.outputs)
        if overlap:
            raise ProblemError(f"propositions declared as both input and output: {sorted(overlap)}")
        for names in (self.inputs, self.outputs):
            if len(set(names)) != len(names):
                raise ProblemError("duplicate proposition names")
        declared = set(self.inputs) | set(self.outputs)
        formulas = list(self.hard_parts)
        for sp in self.softs:
            if not sp.formula.is_globally:
                raise ProblemError(f"soft specification {ltl.render(sp.formula)} is not of the form G phi")
            if not ltl.is_syntactically_safe(sp.body):
                raise ProblemError(f"soft specification body {ltl.render(sp.body)} is not syntactically safe")
            formulas.append(sp.formula)
            formulas.extend(sp.relax or ())
            if sp.weights is not None and sp.relax is not None and len(sp.weights) != len(sp.relax):
                raise ProblemError("weights and relax vector lengths differ")
        for f in formulas:
            unknown = ltl.atoms(f) - declared
            if unknown:
                raise ProblemError(f"undeclared propositions {sorted(unknown)} in {ltl.render(f)}")

    def has_generalized_softs(self) -> bool:
        return any(sp.relax is not None or sp.weights is not None for sp in self.softs)


_SECTIONS = ("inputs", "outputs", "hard", "soft", "relax", "weights")
_INDEXED = re.compile(r"^\s*(\d+)\s*:\s*(.*)$")


def parse_problem(text: str, name: str = "problem") -> Tuple[SynthesisProblem, List[str]]:
    """Parse the text format; returns the problem and a list of warnings."""
    lines: Dict[str, List[Tuple[int, str]]] = {s: [] for s in _SECTIONS}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[(\w+)\]", line)
        if m:
            section = m.group(1).lower()
            if section not in lines:
                raise ProblemError(f"line {lineno}: unknown section [{section}]")
            continue
        if section is None:
            raise ProblemError(f"line {lineno}: content before the first section header")
        lines[section].append((lineno, line))

    inputs = [p for _, l in lines["inputs"] for p in l.split()]
    outputs = [p for _, l in lines["outputs"] for p in l.split()]
    kinds = {p: PropKind.INPUT for p in inputs}
    kinds.update({p: PropKind.OUTPUT for p in outputs})

    def formula(lineno, src):
        try:
            return ltl.parse(src, kinds)
        except ltl.LTLError as exc:
            raise ProblemError(f"line {lineno}: {exc}") from exc

    warnings: List[str] = []
    hard = [formula(n, l) for n, l in lines["hard"]]
    softs: List[SoftSpec] = []
    for n, l in lines["soft"]:
        f = formula(n, l)
        if not f.is_globally:
            warnings.append(f"line {n}: soft specification {l!r} read as G ({l})")
            f = ltl.Globally(f)
        softs.append(SoftSpec(f))

    def index(lineno, raw_index):
        j = int(raw_index)
        if not 1 <= j <= len(softs):
            raise ProblemError(f"line {lineno}: no soft specification number {j}")
        return j - 1

    for n, l in lines["relax"]:
        m = _INDEXED.match(l)
        if not m:
            raise ProblemError(f"line {n}: expected '<soft number>: f0 ; f1 ; ...'")
        j = index(n, m.group(1))
        vec = [formula(n, part.strip()) for part in m.group(2).split(";") if part.strip()]
        if not vec:
            raise ProblemError(f"line {n}: empty relax vector")
        if vec[0] is not softs[j].formula:
            warnings.append(f"line {n}: first relaxation differs from soft specification {j + 1}")
        softs[j].relax = vec
    for n, l in lines["weights"]:
        m = _INDEXED.match(l)
        if not m:
            raise ProblemError(f"line {n}: expected '<soft number>: w0 w1 ...'")
        j = index(n, m.group(1))
        try:
            softs[j].weights = [int(w) for w in m.group(2).split()]
        except ValueError:
            raise ProblemError(f"line {n}: weights must be integers") from None
    for j, sp in enumerate(softs):
        if sp.weights is not None and len(sp.weights) != len(sp.relax_vector()):
            raise ProblemError(f"soft {j + 1}: {len(sp.weights)} weights for "
                               f"{len(sp.relax_vector())} relaxation levels")
    return SynthesisProblem(tuple(inputs), tuple(outputs), hard, softs, name), warnings


def format_problem(p: SynthesisProblem) -> str:
    out = [f"# {p.name}", "[inputs]", " ".join(p.inputs), "[outputs]", " ".join(p.outputs), "[hard]"]
    out.extend(ltl.render(f) for f in p.hard_parts)
    out.append("[soft]")
    out.extend(ltl.render(sp.formula) for sp in p.softs)
    relax = [(j, sp) for j, sp in enumerate(p.softs, start=1) if sp.relax]
    if relax:
        out.append("[relax]")
        out.extend(f"{j}: " + " ; ".join(ltl.render(f) for f in sp.relax) for j, sp in relax)
    weights = [(j, sp) for j, sp in enumerate(p.softs, start=1) if sp.weights]
    if weights:
        out.append("[weights]")
        out.extend(f"{j}: " + " ".join(str(w) for w in sp.weights) for j, sp in weights)
    return "\n".join(out) + "\n"
