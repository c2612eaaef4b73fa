"""CNF conversion and the classic weighted DIMACS exchange format."""

from __future__ import annotations

import enum
import io
import re
import sys
from dataclasses import dataclass, field
from typing import BinaryIO, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

from . import boolexpr as bx
from .boolexpr import Expr


@dataclass
class WcnfInstance:
    num_vars: int
    hard: List[List[int]] = field(default_factory=list)
    soft: List[Tuple[int, List[int]]] = field(default_factory=list)
    top_weight: Optional[int] = None
    # optional bookkeeping, parallel to `soft`
    soft_tags: List[tuple] = field(default_factory=list)

    def __post_init__(self):
        floor = self.total_soft_weight + 1
        if self.top_weight is None or self.top_weight < floor:
            self.top_weight = floor

    @property
    def total_soft_weight(self) -> int:
        return sum(w for w, _ in self.soft)

    @property
    def num_clauses(self) -> int:
        return len(self.hard) + len(self.soft)

    def check(self):
        for cl in self.hard + [c for _, c in self.soft]:
            for lit in cl:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} outside 1..{self.num_vars}")
        for w, _ in self.soft:
            if w <= 0:
                raise ValueError(f"soft weight {w} is not positive")
        if self.top_weight <= self.total_soft_weight:
            raise ValueError("top weight must exceed the total soft weight")

    def hard_satisfied(self, model: Dict[int, bool]) -> bool:
        return all(any(model.get(abs(l), False) == (l > 0) for l in cl) for cl in self.hard)

    def violated_hard(self, model: Dict[int, bool]) -> Optional[List[int]]:
        for cl in self.hard:
            if not any(model.get(abs(l), False) == (l > 0) for l in cl):
                return cl
        return None

    def soft_weight(self, model: Dict[int, bool]) -> int:
        return sum(w for w, cl in self.soft if any(model.get(abs(l), False) == (l > 0) for l in cl))


# ---------------------------------------------------------------------------
# Tseitin

# expression depth grows with counter widths and conjunction chains
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class _Tseitin:
    """Polarity-aware conversion: subformulas only ever occur positively
    after pushing negations to the variables, so each definition literal
    only needs to imply its formula."""

    def __init__(self, fresh):
        self.fresh = fresh
        self.clauses: List[List[int]] = []
        self._nnf: Dict[Tuple[Expr, bool], Expr] = {}
        self._lit: Dict[Expr, int] = {}

    def nnf(self, e: Expr, negated: bool = False) -> Expr:
        key = (e, negated)
        r = self._nnf.get(key)
        if r is not None:
            return r
        op = e.op
        if op == bx.CONST:
            r = bx.const(e.value != negated)
        elif op == bx.VAR:
            r = bx.neg(e) if negated else e
        elif op == bx.NOT:
            r = self.nnf(e.args[0], not negated)
        else:
            parts = [self.nnf(a, negated) for a in e.args]
            is_and = (op == bx.AND) != negated
            r = bx.conj_all(parts) if is_and else bx.disj_all(parts)
        self._nnf[key] = r
        return r

    def lit(self, e: Expr) -> int:
        """A literal that implies the NNF expression e."""
        if e.op == bx.VAR:
            return e.value
        if e.op == bx.NOT:
            return -e.args[0].value
        hit = self._lit.get(e)
        if hit is not None:
            return hit
        if e.op == bx.CONST:
            d = self.fresh()
            self.clauses.append([d] if e.value else [-d])
        elif e.op == bx.AND:
            d = self.fresh()
            for a in e.args:
                self.clauses.append([-d, self.lit(a)])
        else:
            d = self.fresh()
            self.clauses.append([-d] + [self.lit(a) for a in e.args])
        self._lit[e] = d
        return d

    def assert_(self, e: Expr):
        e = self.nnf(e)
        if e is bx.TRUE:
            return
        if e is bx.FALSE:
            self.clauses.append([])
        elif e.op == bx.AND:
            for a in e.args:
                self.assert_(a)
        elif e.op == bx.OR:
            self.clauses.append([self.lit(a) for a in e.args])
        else:
            self.clauses.append([self.lit(e)])

    def soft_literal(self, e: Expr) -> int:
        e = self.nnf(e)
        if e.op in (bx.VAR, bx.NOT):
            return self.lit(e)
        d = self.fresh()
        if e is bx.FALSE:
            self.clauses.append([-d])
        elif e.op == bx.AND:
            for a in e.args:
                self.clauses.append([-d, self.lit(a)])
        elif e.op == bx.OR:
            self.clauses.append([-d] + [self.lit(a) for a in e.args])
        return d


def tseitin(cs, vm) -> WcnfInstance:
    """Convert a ConstraintSet to weighted CNF.  Auxiliary variables are
    allocated from the variable map, after all semantic variables."""
    t = _Tseitin(vm.fresh)
    for h in cs.hard:
        t.assert_(h)
    softs = []
    tags = []
    for sc in cs.soft:
        softs.append((sc.weight, [t.soft_literal(sc.formula)]))
        tags.append(sc.tag)
    return WcnfInstance(vm.num_vars, t.clauses, softs, None, tags)


# ---------------------------------------------------------------------------
# classic WCNF


def format_wcnf(inst: WcnfInstance) -> str:
    top = inst.top_weight
    out = [f"p wcnf {inst.num_vars} {inst.num_clauses} {top}"]
    for cl in inst.hard:
        out.append(" ".join([str(top)] + [str(l) for l in cl] + ["0"]))
    for w, cl in inst.soft:
        out.append(" ".join([str(w)] + [str(l) for l in cl] + ["0"]))
    return "\n".join(out) + "\n"


def write_wcnf(inst: WcnfInstance, sink: Union[BinaryIO, TextIO, str]) -> None:
    text = format_wcnf(inst)
    if isinstance(sink, str):
        with open(sink, "w", encoding="ascii") as fh:
            fh.write(text)
        return
    if isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(text.encode("ascii"))


class WcnfFormatError(ValueError):
    pass


def parse_wcnf(text: Union[str, bytes]) -> WcnfInstance:
    if isinstance(text, bytes):
        text = text.decode("ascii")
    header = None
    tokens: List[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 5 or parts[1] != "wcnf":
                raise WcnfFormatError(f"bad header {line!r}")
            header = (int(parts[2]), int(parts[3]), int(parts[4]))
            continue
        if header is None:
            raise WcnfFormatError("clause before header")
        tokens.extend(int(x) for x in line.split())
    if header is None:
        raise WcnfFormatError("missing header")
    nv, nc, top = header
    hard, soft = [], []
    k = 0
    while k < len(tokens):
        w = tokens[k]
        k += 1
        cl = []
        while k < len(tokens) and tokens[k] != 0:
            cl.append(tokens[k])
            k += 1
        if k >= len(tokens):
            raise WcnfFormatError("unterminated clause")
        k += 1
        if w >= top:
            hard.append(cl)
        else:
            soft.append((w, cl))
    if len(hard) + len(soft) != nc:
        raise WcnfFormatError(f"header announces {nc} clauses, found {len(hard) + len(soft)}")
    inst = WcnfInstance(nv, hard, soft, top)
    inst.top_weight = top
    return inst


# ---------------------------------------------------------------------------
# solver verdicts


class Status(enum.Enum):
    OPTIMUM = "optimum"
    SATISFIABLE = "satisfiable"  # incumbent, optimality not proven
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass
class SolverVerdict:
    status: Status
    model: Optional[Dict[int, bool]] = None
    achieved_weight: Optional[int] = None
    cost: Optional[int] = None
    stats: Dict[str, float] = field(default_factory=dict)

    @property
    def has_model(self) -> bool:
        return self.model is not None


class MalformedOutput(ValueError):
    pass


_STATUS = {
    "OPTIMUM FOUND": Status.OPTIMUM,
    "UNSATISFIABLE": Status.UNSAT,
    "SATISFIABLE": Status.SATISFIABLE,
    "UNKNOWN": Status.UNKNOWN,
}


def parse_solver_output(text: Union[str, Iterable[str]], total_weight: Optional[int] = None,
                        num_vars: Optional[int] = None) -> SolverVerdict:
    """Read `s`, `o` and `v` lines of a MaxSAT solver's standard output."""
    if isinstance(text, str):
        lines = text.splitlines()
    else:
        lines = list(text)
    status = None
    cost = None
    model: Dict[int, bool] = {}
    saw_v = False
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        tag, _, rest = line.partition(" ")
        rest = rest.strip()
        if tag == "s":
            if rest not in _STATUS:
                raise MalformedOutput(f"unknown status line {line!r}")
            status = _STATUS[rest]
        elif tag == "o":
            try:
                cost = int(rest)
            except ValueError:
                raise MalformedOutput(f"bad cost line {line!r}") from None
        elif tag == "v":
            saw_v = True
            toks = rest.split()
            if len(toks) == 1 and re.fullmatch(r"[01]+", toks[0]) and (len(toks[0]) > 1 or num_vars == 1):
                for k, ch in enumerate(toks[0], start=1):
                    model[k] = ch == "1"
                continue
            for tok in toks:
                try:
                    lit = int(tok)
                except ValueError:
                    raise MalformedOutput(f"bad literal {tok!r}") from None
                if lit != 0:
                    model[abs(lit)] = lit > 0
        elif tag == "c":
            continue
    if status is None:
        raise MalformedOutput("no status line")
    if status in (Status.OPTIMUM, Status.SATISFIABLE) and not saw_v:
        raise MalformedOutput("satisfiable verdict without a model")
    verdict = SolverVerdict(status, model if saw_v else None, None, cost)
    if num_vars is not None and verdict.model is not None:
        for v in range(1, num_vars + 1):
            verdict.model.setdefault(v, False)
    if cost is not None and total_weight is not None and saw_v:
        verdict.achieved_weight = total_weight - cost
    return verdict
