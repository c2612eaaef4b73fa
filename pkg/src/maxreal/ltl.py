"""LTL formulas over partitioned input/output propositions.

Formulas are hash-consed: building the same tree twice returns the same
object, so identity comparison is structural comparison and formulas can be
used as dictionary keys cheaply.
"""

from __future__ import annotations

import enum
import re
import threading
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Set, Tuple


class PropKind(enum.Enum):
    INPUT = "input"
    OUTPUT = "output"


class Proposition:
    __slots__ = ("name", "kind")

    def __init__(self, name: str, kind: PropKind):
        self.name = name
        self.kind = kind

    def __repr__(self):
        return f"Proposition({self.name!r}, {self.kind.name})"

    def __eq__(self, other):
        return isinstance(other, Proposition) and (self.name, self.kind) == (other.name, other.kind)

    def __hash__(self):
        return hash((self.name, self.kind))


class LTLError(Exception):
    pass


class ParseError(LTLError, ValueError):
    """Raised on malformed formula text."""

    def __init__(self, message: str, position: int, expected: Iterable[str] = ()):
        self.position = position
        self.expected = tuple(expected)
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at position {position}{detail}")


class UnknownProposition(LTLError, KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(name)

    def __str__(self):
        return f"unknown proposition {self.name!r}"


class NotSyntacticallySafe(LTLError, ValueError):
    pass


ATOM, TRUE_OP, FALSE_OP, NOT, AND, OR, NEXT, UNTIL, RELEASE = (
    "atom", "true", "false", "not", "and", "or", "X", "U", "R")

_BINARY = (AND, OR, UNTIL, RELEASE)


class Formula:
    """Immutable, interned LTL syntax node.

    Only the core grammar is stored; F and G are Until(true, .) and
    Release(false, .) and are recognized again when printing.
    """

    __slots__ = ("op", "args", "name", "_hash", "_id", "__weakref__")

    _table: Dict[tuple, "Formula"] = {}
    _lock = threading.Lock()
    _counter = 0

    def __new__(cls, op: str, args: Tuple["Formula", ...] = (), name: Optional[str] = None):
        key = (op, name, tuple(a._id for a in args))
        node = cls._table.get(key)
        if node is not None:
            return node
        with cls._lock:
            node = cls._table.get(key)
            if node is None:
                node = object.__new__(cls)
                node.op = op
                node.args = args
                node.name = name
                node._hash = hash(key)
                node._id = cls._counter
                cls._counter += 1
                cls._table[key] = node
        return node

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __lt__(self, other):
        return self._id < other._id

    def __reduce__(self):
        return (Formula, (self.op, self.args, self.name))

    def __repr__(self):
        return f"Formula<{render(self)}>"

    def __str__(self):
        return render(self)

    @property
    def is_globally(self) -> bool:
        return self.op == RELEASE and self.args[0] is FALSE

    @property
    def is_finally(self) -> bool:
        return self.op == UNTIL and self.args[0] is TRUE

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


TRUE = Formula(TRUE_OP)
FALSE = Formula(FALSE_OP)


def Atom(name: str) -> Formula:
    return Formula(ATOM, (), name)


def Not(f: Formula) -> Formula:
    return Formula(NOT, (f,))


def And(a: Formula, b: Formula) -> Formula:
    return Formula(AND, (a, b))


def Or(a: Formula, b: Formula) -> Formula:
    return Formula(OR, (a, b))


def Next(f: Formula) -> Formula:
    return Formula(NEXT, (f,))


def Until(a: Formula, b: Formula) -> Formula:
    return Formula(UNTIL, (a, b))


def Release(a: Formula, b: Formula) -> Formula:
    return Formula(RELEASE, (a, b))


def Finally(f: Formula) -> Formula:
    return Until(TRUE, f)


def Globally(f: Formula) -> Formula:
    return Release(FALSE, f)


def Implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def Iff(a: Formula, b: Formula) -> Formula:
    return And(Or(Not(a), b), Or(Not(b), a))


def conjoin(fs: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; true for the empty sequence."""
    fs = list(fs)
    if not fs:
        return TRUE
    acc = fs[-1]
    for f in reversed(fs[:-1]):
        acc = And(f, acc)
    return acc


def disjoin(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return FALSE
    acc = fs[-1]
    for f in reversed(fs[:-1]):
        acc = Or(f, acc)
    return acc


def conjuncts(f: Formula) -> List[Formula]:
    """Flatten a tree of And nodes into its leaves (left to right)."""
    out: List[Formula] = []
    stack = [f]
    while stack:
        g = stack.pop()
        if g.op == AND:
            stack.append(g.args[1])
            stack.append(g.args[0])
        elif g is not TRUE:
            out.append(g)
    return out


# ---------------------------------------------------------------------------
# Normal forms and structural queries


def to_nnf(f: Formula) -> Formula:
    cache: Dict[Tuple[Formula, bool], Formula] = {}

    def go(g: Formula, neg: bool) -> Formula:
        key = (g, neg)
        hit = cache.get(key)
        if hit is not None:
            return hit
        op = g.op
        if op == ATOM:
            r = Not(g) if neg else g
        elif op == TRUE_OP:
            r = FALSE if neg else TRUE
        elif op == FALSE_OP:
            r = TRUE if neg else FALSE
        elif op == NOT:
            r = go(g.args[0], not neg)
        elif op == NEXT:
            r = Next(go(g.args[0], neg))
        else:
            a, b = go(g.args[0], neg), go(g.args[1], neg)
            dual = {AND: OR, OR: AND, UNTIL: RELEASE, RELEASE: UNTIL}
            r = Formula(dual[op] if neg else op, (a, b))
        cache[key] = r
        return r

    return go(f, False)


def is_nnf(f: Formula) -> bool:
    for g in _walk(f):
        if g.op == NOT and g.args[0].op != ATOM:
            return False
    return True


def is_syntactically_safe(f: Formula) -> bool:
    return all(g.op != UNTIL for g in _walk(to_nnf(f)))


def is_propositional(f: Formula) -> bool:
    return all(g.op not in (NEXT, UNTIL, RELEASE) for g in _walk(f))


def _children(f: Formula) -> Tuple[Formula, ...]:
    # G and F count as unary operators: their constant operand is not a subformula
    if f.is_globally or f.is_finally:
        return (f.args[1],)
    return f.args


def subformulas(f: Formula) -> Set[Formula]:
    seen: Set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        stack.extend(_children(g))
    return seen


def _walk(f: Formula) -> Iterator[Formula]:
    seen: Set[Formula] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        yield g
        stack.extend(g.args)


def atoms(f: Formula) -> Set[str]:
    return {g.name for g in _walk(f) if g.op == ATOM}


def node_count(f: Formula) -> int:
    """Size of the formula as a tree (shared nodes counted once per use)."""
    cache: Dict[Formula, int] = {}

    def go(g):
        if g not in cache:
            cache[g] = 1 + sum(go(c) for c in _children(g))
        return cache[g]

    return go(f)


# ---------------------------------------------------------------------------
# Propositional evaluation


def evaluate(f: Formula, true_props) -> bool:
    """Evaluate a propositional formula under the set of true propositions."""
    op = f.op
    if op == ATOM:
        return f.name in true_props
    if op == TRUE_OP:
        return True
    if op == FALSE_OP:
        return False
    if op == NOT:
        return not evaluate(f.args[0], true_props)
    if op == AND:
        return evaluate(f.args[0], true_props) and evaluate(f.args[1], true_props)
    if op == OR:
        return evaluate(f.args[0], true_props) or evaluate(f.args[1], true_props)
    raise ValueError(f"temporal operator {op} in propositional context")


def restrict(f: Formula, assignment: Mapping[str, bool]) -> Formula:
    """Substitute known proposition values into a propositional formula and
    fold constants."""
    cache: Dict[Formula, Formula] = {}

    def go(g: Formula) -> Formula:
        hit = cache.get(g)
        if hit is not None:
            return hit
        op = g.op
        if op == ATOM:
            v = assignment.get(g.name)
            r = g if v is None else (TRUE if v else FALSE)
        elif op in (TRUE_OP, FALSE_OP):
            r = g
        elif op == NOT:
            a = go(g.args[0])
            r = FALSE if a is TRUE else TRUE if a is FALSE else Not(a)
        elif op == AND:
            a, b = go(g.args[0]), go(g.args[1])
            if a is FALSE or b is FALSE:
                r = FALSE
            elif a is TRUE:
                r = b
            elif b is TRUE:
                r = a
            else:
                r = And(a, b)
        elif op == OR:
            a, b = go(g.args[0]), go(g.args[1])
            if a is TRUE or b is TRUE:
                r = TRUE
            elif a is FALSE:
                r = b
            elif b is FALSE:
                r = a
            else:
                r = Or(a, b)
        else:
            raise ValueError(f"temporal operator {op} in propositional context")
        cache[g] = r
        return r

    return go(f)


# ---------------------------------------------------------------------------
# Printing

_PREC = {"->": 1, OR: 2, AND: 3, UNTIL: 4, RELEASE: 4, "unary": 5, "primary": 6}


def render(f: Formula) -> str:
    """Print a formula in the concrete syntax accepted by `parse`."""

    def prec(g: Formula) -> int:
        if g.op in (ATOM, TRUE_OP, FALSE_OP):
            return _PREC["primary"]
        if g.op in (NOT, NEXT) or g.is_globally or g.is_finally:
            return _PREC["unary"]
        return _PREC[g.op]

    def wrap(g: Formula, need: int) -> str:
        s = go(g)
        return f"({s})" if prec(g) < need else s

    def go(g: Formula) -> str:
        op = g.op
        if op == ATOM:
            return g.name
        if op == TRUE_OP:
            return "true"
        if op == FALSE_OP:
            return "false"
        if g.is_globally:
            return "G " + wrap(g.args[1], _PREC["unary"])
        if g.is_finally:
            return "F " + wrap(g.args[1], _PREC["unary"])
        if op == NOT:
            return "!" + wrap(g.args[0], _PREC["unary"])
        if op == NEXT:
            return "X " + wrap(g.args[0], _PREC["unary"])
        a, b = g.args
        p = _PREC[op]
        sym = {AND: "&", OR: "|", UNTIL: "U", RELEASE: "R"}[op]
        if op in (UNTIL, RELEASE):
            # right associative: a left operand of equal precedence needs parens
            return f"{wrap(a, p + 1)} {sym} {wrap(b, p)}"
        return f"{wrap(a, p)} {sym} {wrap(b, p + 1)}"

    return go(f)


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(r"\s*(?:(<->|->|&&|\|\||[!&|()~])|([A-Za-z_][A-Za-z0-9_]*)|(\S))")
_KEYWORDS = {"G", "F", "X", "U", "R", "true", "false"}


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        sym, ident, bad = m.groups()
        start = m.start(m.lastindex)
        if bad is not None:
            raise ParseError(f"unexpected character {bad!r}", start)
        if sym is not None:
            sym = {"&&": "&", "||": "|", "~": "!"}.get(sym, sym)
            toks.append(("sym", sym, start))
        elif ident in _KEYWORDS:
            toks.append(("kw", ident, start))
        else:
            toks.append(("id", ident, start))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, prop_kinds: Optional[Mapping[str, PropKind]]):
        self.toks = _tokenize(text)
        self.i = 0
        self.kinds = prop_kinds

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, value: str) -> bool:
        kind, v, _ = self.peek()
        return kind in ("sym", "kw") and v == value

    def expect(self, value: str):
        if not self.at(value):
            self.fail([value])
        self.take()

    def fail(self, expected):
        kind, v, pos = self.peek()
        what = "end of input" if kind == "eof" else repr(v)
        raise ParseError(f"unexpected {what}", pos, expected)

    def parse(self) -> Formula:
        f = self.equiv()
        if self.peek()[0] != "eof":
            self.fail(["&", "|", "->", "<->", "U", "R", ")", "end of input"])
        return f

    def equiv(self) -> Formula:
        f = self.implication()
        while self.at("<->"):
            self.take()
            f = Iff(f, self.implication())
        return f

    def implication(self) -> Formula:
        f = self.disjunction()
        if self.at("->"):
            self.take()
            return Implies(f, self.implication())
        return f

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.at("|"):
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.binary_temporal()
        while self.at("&"):
            self.take()
            f = And(f, self.binary_temporal())
        return f

    def binary_temporal(self) -> Formula:
        f = self.unary()
        if self.at("U"):
            self.take()
            return Until(f, self.binary_temporal())
        if self.at("R"):
            self.take()
            return Release(f, self.binary_temporal())
        return f

    def unary(self) -> Formula:
        for sym, build in (("!", Not), ("X", Next), ("G", Globally), ("F", Finally)):
            if self.at(sym):
                self.take()
                return build(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        kind, v, pos = self.peek()
        if self.at("("):
            self.take()
            f = self.equiv()
            self.expect(")")
            return f
        if self.at("true"):
            self.take()
            return TRUE
        if self.at("false"):
            self.take()
            return FALSE
        if kind == "id":
            self.take()
            if self.kinds is not None and v not in self.kinds:
                raise UnknownProposition(v)
            return Atom(v)
        self.fail(["identifier", "true", "false", "(", "!", "X", "G", "F"])


def parse(text: str, prop_kinds: Optional[Mapping[str, PropKind]] = None) -> Formula:
    """Parse LTL text.  When `prop_kinds` is given, every identifier must be
    declared in it."""
    return _Parser(text, prop_kinds).parse()
