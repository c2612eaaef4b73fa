import pytest

from maxreal import ltl
from maxreal.automata import soft_automata
from maxreal.encoding import VarMap
from maxreal.extraction import (MissingTransition, RejMode, ValueVector, completeness_bound,
                                completeness_parameters, compute_value, extract,
                                find_fg_annotation, reachable_part, validate_annotation)
from maxreal.system import TransitionSystem
from oracles import canonical_machines, machine_satisfies, sat_finally_globally, sat_globally

P = ltl.parse


def test_first_enabled_successor_wins():
    vm = VarMap(2, ("x",), ("y",))
    model = {}
    for s in range(2):
        for i in range(2):
            model[vm.tau_var(s, i, 1)] = True
    model[vm.tau_var(0, 0, 0)] = True
    model[vm.out_var("y", 1, 1)] = True
    t = extract(model, vm)
    assert t.succ == ((0, 1), (1, 1))
    assert t.out[1][1] == frozenset("y") and t.out[0][0] == frozenset()


def test_missing_transition():
    vm = VarMap(1, (), ("y",))
    with pytest.raises(MissingTransition):
        extract({}, vm)


def test_reachable_part_renumbers():
    t = TransitionSystem((), ("y",), ((2,), (1,), (0,)), ((frozenset(),), (frozenset("y"),), (frozenset("y"),)))
    r = reachable_part(t)
    assert r.succ == ((1,), (0,)) and r.out[1] == (frozenset("y"),)


def test_value_vector_order_and_weight():
    a = ValueVector(((1, 1, 1), (1, 1, 1)))
    b = ValueVector(((0, 0, 1), (0, 0, 1)))
    c = ValueVector(((0, 1, 1), (0, 0, 0)))
    assert a.aggregate == (2, 2, 2) and a.weight() == 2 + 2 * 2 + 2 * 4
    assert b > c
    assert sorted([a, b, c]) == [c, b, a]
    with pytest.raises(ValueError):
        ValueVector(((1, 0, 1),))


def test_realized_formula():
    v = ValueVector(((1, 1, 1), (0, 1, 1), (0, 0, 1), (0, 0, 0)))
    a, b, c, d = (ltl.Atom(x) for x in "abcd")
    f = v.realized_formula([a, b, c, d])
    assert f is ltl.conjoin([ltl.Globally(a), ltl.Finally(ltl.Globally(b)),
                             ltl.Globally(ltl.Finally(c)), ltl.TRUE])


SOFTS = ["!y", "x -> !y", "y -> X !y", "x -> X y"]


def test_compute_value_matches_oracles():
    sas = [soft_automata(P(s)) for s in SOFTS]
    for t in canonical_machines(("x",), ("y",), 2):
        v = compute_value(t, sas)
        for (v1, v2, v3), sa in zip(v.triples, sas):
            assert v1 == sat_globally(t, sa.phi)
            assert v2 == sat_finally_globally(t, sa.phi)
            assert v3 == machine_satisfies(t, ltl.Globally(ltl.Finally(sa.phi)))


def test_fg_annotation_is_valid_and_bounded():
    for text in SOFTS:
        sa = soft_automata(P(text))
        for t in canonical_machines(("x",), ("y",), 2):
            ann = find_fg_annotation(t, sa.relaxed)
            assert (ann is not None) == sat_finally_globally(t, sa.phi)
            if ann is not None:
                assert validate_annotation(t, sa.relaxed, ann, RejMode.REJ_EDGES)


def test_completeness_bound_small_case():
    b, n = completeness_parameters(P("G a"), [])
    assert (b, n) == (2, 8)
    assert completeness_bound(P("G a"), []) == 1_625_702_400


def test_completeness_bound_overflow():
    with pytest.raises(OverflowError):
        completeness_bound(P("G (a -> X b)"), [P("a -> X X b"), P("b -> X c")])


def test_completeness_monotone_in_softs():
    hard = P("G (a -> X b)")
    bodies = [P("!b"), P("a -> X !a"), P("b R c")]
    prev = completeness_parameters(hard, [])[0]
    for k in range(1, len(bodies) + 1):
        cur = completeness_parameters(hard, bodies[:k])[0]
        assert cur >= prev
        prev = cur
