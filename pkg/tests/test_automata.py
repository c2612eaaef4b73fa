import itertools

import pytest
from hypothesis import given, settings

from maxreal import ltl
from maxreal.automata import (AccKind, Automaton, Edge, MalformedSinkAutomaton, accepts,
                              bad_prefix_nfa, build_b_g, find_rej_sink, ltl_to_ucw, relax_fg,
                              run_graph, soft_automata, ucw_for_conjunction)
from maxreal.system import TransitionSystem, all_machines
from oracles import (canonical_machines, is_bad_prefix, letters, machine_satisfies, nfa_accepts,
                     progress, residual, sat_finally_globally, sat_globally, BOT)
from strategies import formulas

P = ltl.parse
o = ltl.Atom("o")

SAFETY = ["!o", "a -> X b", "G (a -> b)", "a R b", "X X a | b", "(a & X !b) -> X X a", "G a | G b"]
REGRESSION = ["G a", "F a", "G F a", "F G a", "a U b", "G (a -> X b)"]


def machines_upto(n, inputs=("a",), outputs=("b",)):
    return list(canonical_machines(inputs, outputs, n))


def test_bad_prefix_of_not_o():
    nfa = bad_prefix_nfa(ltl.Not(o))
    assert nfa.acc_kind is AccKind.FINITE
    assert nfa.n_states == 2
    assert nfa_accepts(nfa, [frozenset("o")])
    assert not nfa_accepts(nfa, [frozenset()])


def test_bad_prefix_of_next_implication():
    nfa = bad_prefix_nfa(P("a -> X b"))
    assert nfa_accepts(nfa, [frozenset("a"), frozenset()])
    assert not nfa_accepts(nfa, [frozenset(), frozenset()])


def test_bad_prefix_rejects_liveness():
    with pytest.raises(ltl.NotSyntacticallySafe):
        bad_prefix_nfa(P("F a"))


@pytest.mark.parametrize("text", SAFETY)
def test_bad_prefix_nfa_is_fine(text):
    phi = P(text)
    props = sorted(ltl.atoms(phi))
    nfa = bad_prefix_nfa(phi)
    for k in range(4):
        for word in itertools.product(letters(props), repeat=k):
            accepted = nfa_accepts(nfa, word)
            if accepted:
                assert is_bad_prefix(phi, word, props), word
            # words refuting phi letter by letter must have an accepted prefix
            r = residual(phi)
            for j, x in enumerate(word):
                r = progress(r, x)
                if r == BOT:
                    assert any(nfa_accepts(nfa, word[:m]) for m in range(j + 2)), word
                    break


@pytest.mark.parametrize("text", SAFETY)
def test_b_g_has_unique_absorbing_sink(text):
    b = build_b_g(P(text))
    assert b.acc_kind is AccKind.UNIVERSAL_BUCHI
    rej = find_rej_sink(b)
    assert [q for q in b.states if q not in b.marked] == [rej]
    assert all(e.dst == rej for e in b.edges if e.src == rej)


@pytest.mark.parametrize("text", SAFETY)
def test_relax_keeps_edges_into_sink_as_rej(text):
    b = build_b_g(P(text))
    rej = find_rej_sink(b)
    into = [e for e in b.edges if e.dst == rej and e.src != rej]
    r = relax_fg(b)
    assert r.n_states == b.n_states - 1
    assert len(r.rej_edges) == len(into)
    assert all(r.edges[k].dst == r.initial for k in r.rej_edges)
    assert sorted(r.edges[k].label for k in r.rej_edges) == sorted(e.label for e in into)


def test_b_g_of_not_o_relaxes_to_single_state():
    r = relax_fg(build_b_g(ltl.Not(o)))
    assert r.n_states == 1
    labels = {(e.label, e.rej) for e in r.edges}
    assert labels == {(ltl.Not(o), False), (o, True)}


def test_malformed_sink_detection():
    no_sink = Automaton(1, 0, (Edge(0, ltl.TRUE, 0),), AccKind.UNIVERSAL_BUCHI, frozenset([0]), frozenset())
    with pytest.raises(MalformedSinkAutomaton):
        find_rej_sink(no_sink)
    leaky = Automaton(2, 0, (Edge(0, ltl.TRUE, 1), Edge(1, ltl.TRUE, 0)), AccKind.UNIVERSAL_BUCHI,
                      frozenset([0]), frozenset())
    with pytest.raises(MalformedSinkAutomaton):
        find_rej_sink(leaky)


@pytest.mark.parametrize("text", ["G (a -> X b)", "G !b", "b R a", "X b | a"])
def test_b_g_accepts_exactly_models_of_g(text):
    phi = P(text)
    b = build_b_g(phi)
    for t in machines_upto(2):
        assert accepts(b, t) == sat_globally(t, phi), t


@pytest.mark.parametrize("text", REGRESSION)
def test_ucw_matches_lasso_semantics(text):
    f = P(text.replace("a", "x").replace("b", "y"))
    ucw = ltl_to_ucw(f)
    assert ucw.acc_kind is AccKind.UNIVERSAL_CO_BUCHI
    machines = machines_upto(2, inputs=("x",), outputs=("y",))
    # also mix the roles of the propositions
    machines += machines_upto(2, inputs=("y",), outputs=("x",))
    for t in machines:
        assert accepts(ucw, t) == machine_satisfies(t, f), (text, t)


def test_lasso_length_is_sufficient():
    machines = machines_upto(2)[::7]
    for text in REGRESSION + ["G F (a -> X b)", "F G (b | X a)"]:
        f = P(text)
        for t in machines:
            assert machine_satisfies(t, f) == machine_satisfies(t, f, max_len=8), (text, t)


def test_gf_example_machines():
    ucw = ltl_to_ucw(P("G F a"))
    alternating = TransitionSystem((), ("a",), ((1,), (0,)), ((frozenset("a"),), (frozenset(),)))
    never = TransitionSystem((), ("a",), ((0,),), ((frozenset(),),))
    assert accepts(ucw, alternating)
    assert not accepts(ucw, never)
    assert not accepts(ltl_to_ucw(P("F G a")), never)


def test_true_and_false():
    t = TransitionSystem((), ("a",), ((0,),), ((frozenset(),),))
    assert accepts(ltl_to_ucw(ltl.TRUE), t)
    assert not accepts(ltl_to_ucw(ltl.FALSE), t)


def test_conjunction_matches_parts():
    parts = [P("a"), P("G (a -> b)"), P("G (b -> X !b)"), P("G F b"), P("G !c")]
    ucw = ucw_for_conjunction(parts)
    singles = [ltl_to_ucw(p) for p in parts]
    for t in machines_upto(2, inputs=("a",), outputs=("b", "c")):
        assert accepts(ucw, t) == all(accepts(u, t) for u in singles)


@pytest.mark.parametrize("text", ["!b", "a -> !b", "b -> X !b", "a -> X b", "b R a"])
def test_value_automata_against_progression(text):
    phi = P(text)
    sa = soft_automata(phi)
    for t in machines_upto(2):
        g = run_graph(sa.relaxed, t)
        assert (not g.has_rejecting_edge()) == sat_globally(t, phi)
        assert (not g.has_rejecting_cycle()) == sat_finally_globally(t, phi)
        assert accepts(sa.gf, t) == machine_satisfies(t, ltl.Globally(ltl.Finally(phi)))


def test_progression_oracle_agrees_with_lasso_oracle():
    for text in ["!b", "a -> X b", "b R a"]:
        phi = P(text)
        for t in machines_upto(2):
            assert sat_globally(t, phi) == machine_satisfies(t, ltl.Globally(phi))
            assert sat_finally_globally(t, phi) == machine_satisfies(t, ltl.Finally(ltl.Globally(phi)))


@settings(max_examples=40, deadline=None)
@given(formulas(props=("a", "b"), safe_only=True, max_leaves=5))
def test_random_safety_b_g(phi):
    b = build_b_g(phi)
    find_rej_sink(b)
    for t in machines_upto(1) + list(all_machines(("a",), ("b",), 2))[::17]:
        assert accepts(b, t) == sat_globally(t, phi)


def test_dot_output_mentions_every_state():
    b = build_b_g(P("a -> X b"))
    dot = b.to_dot()
    assert dot.startswith("digraph")
    assert dot.count("->") >= len(b.edges)
