"""Hash-consed propositional expressions over integer variables.

Smart constructors fold constants and flatten nested And/Or, so encodings can
be written naively without producing trivially redundant structure.
"""

from __future__ import annotations

import threading
from typing import Dict, Iterable, Mapping, Sequence, Tuple

VAR, NOT, AND, OR, CONST = "var", "not", "and", "or", "const"


class Expr:
    __slots__ = ("op", "args", "value", "_hash", "_id")

    _table: Dict[tuple, "Expr"] = {}
    _lock = threading.Lock()
    _counter = 0

    def __new__(cls, op: str, args: Tuple["Expr", ...] = (), value=None):
        key = (op, value, tuple(a._id for a in args))
        node = cls._table.get(key)
        if node is not None:
            return node
        with cls._lock:
            node = cls._table.get(key)
            if node is None:
                node = object.__new__(cls)
                node.op, node.args, node.value = op, args, value
                node._hash = hash(key)
                node._id = cls._counter
                cls._counter += 1
                cls._table[key] = node
        return node

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __repr__(self):
        return to_sexpr(self)

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return neg(self)


TRUE = Expr(CONST, (), True)
FALSE = Expr(CONST, (), False)


def var(v: int) -> Expr:
    if v <= 0:
        raise ValueError("variables are positive integers")
    return Expr(VAR, (), v)


def const(b: bool) -> Expr:
    return TRUE if b else FALSE


def neg(e: Expr) -> Expr:
    if e is TRUE:
        return FALSE
    if e is FALSE:
        return TRUE
    if e.op == NOT:
        return e.args[0]
    return Expr(NOT, (e,))


def _nary(op: str, unit: Expr, zero: Expr, items: Iterable[Expr]) -> Expr:
    flat = []
    seen = set()
    for e in items:
        if e is zero:
            return zero
        if e is unit:
            continue
        sub = e.args if e.op == op else (e,)
        for x in sub:
            if x not in seen:
                seen.add(x)
                flat.append(x)
    for x in flat:
        if neg(x) in seen:
            return zero
    if not flat:
        return unit
    if len(flat) == 1:
        return flat[0]
    return Expr(op, tuple(flat))


def conj(*items: Expr) -> Expr:
    return _nary(AND, TRUE, FALSE, items)


def disj(*items: Expr) -> Expr:
    return _nary(OR, FALSE, TRUE, items)


def conj_all(items: Iterable[Expr]) -> Expr:
    return _nary(AND, TRUE, FALSE, items)


def disj_all(items: Iterable[Expr]) -> Expr:
    return _nary(OR, FALSE, TRUE, items)


def implies(a: Expr, b: Expr) -> Expr:
    return disj(neg(a), b)


def iff(a: Expr, b: Expr) -> Expr:
    return conj(implies(a, b), implies(b, a))


def evaluate(e: Expr, assignment: Mapping[int, bool]) -> bool:
    cache: Dict[Expr, bool] = {}

    def go(x: Expr) -> bool:
        r = cache.get(x)
        if r is not None:
            return r
        if x.op == VAR:
            r = bool(assignment[x.value])
        elif x.op == CONST:
            r = x.value
        elif x.op == NOT:
            r = not go(x.args[0])
        elif x.op == AND:
            r = all(go(a) for a in x.args)
        else:
            r = any(go(a) for a in x.args)
        cache[x] = r
        return r

    return go(e)


def variables(e: Expr) -> set:
    out = set()
    seen = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        if x.op == VAR:
            out.add(x.value)
        stack.extend(x.args)
    return out


def to_sexpr(e: Expr, names: Mapping[int, str] = None) -> str:
    if e.op == CONST:
        return "true" if e.value else "false"
    if e.op == VAR:
        return names.get(e.value, f"v{e.value}") if names else f"v{e.value}"
    inner = " ".join(to_sexpr(a, names) for a in e.args)
    return f"({e.op} {inner})"


# ---------------------------------------------------------------------------
# unsigned big-endian bit-vector comparison


class WidthMismatch(ValueError):
    pass


def comparator(x: Sequence[Expr], y: Sequence[Expr], strict: bool) -> Expr:
    """x > y (strict) or x >= y, most significant bit first.

    Linear-size recursion: cmp(x, y) = (x0 & !y0) | ((x0 | !y0) & cmp(rest)),
    with cmp of empty vectors false for > and true for >=.
    """
    if len(x) != len(y):
        raise WidthMismatch(f"widths {len(x)} and {len(y)} differ")
    acc = FALSE if strict else TRUE
    for xb, yb in zip(reversed(x), reversed(y)):
        acc = disj(conj(xb, neg(yb)), conj(disj(xb, neg(yb)), acc))
    return acc


def equals_const(x: Sequence[Expr], value: int) -> Expr:
    """x == value with x most significant bit first."""
    w = len(x)
    if value < 0 or value >= (1 << w):
        return FALSE
    return conj_all(x[k] if (value >> (w - 1 - k)) & 1 else neg(x[k]) for k in range(w))


def at_most_const(x: Sequence[Expr], value: int) -> Expr:
    """x <= value with x most significant bit first."""
    w = len(x)
    if value >= (1 << w) - 1:
        return TRUE
    if value < 0:
        return FALSE
    c = [const(bool((value >> (w - 1 - k)) & 1)) for k in range(w)]
    return comparator(c, list(x), strict=False)


def bits_value(bits: Sequence[bool]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(bool(b))
    return v
