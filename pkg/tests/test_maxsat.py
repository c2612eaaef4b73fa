import importlib.util
import random
import sys

import pytest
from hypothesis import given, settings, strategies as st

from maxreal.cnf import Status, WcnfInstance
from maxreal.maxsat import (Budget, SolverProtocolError, SolverSpawnError, solve_builtin,
                            solve_external)
from maxreal.maxsat.cdcl import Solver
from oracles import brute_force_maxsat

HAVE_CPSAT = importlib.util.find_spec("ortools") is not None


def clauses(n, max_len=3):
    lit = st.integers(1, n).flatmap(lambda v: st.sampled_from([v, -v]))
    return st.lists(lit, min_size=1, max_size=max_len)


def instances(max_vars=8):
    return st.integers(1, max_vars).flatmap(lambda n: st.tuples(
        st.just(n),
        st.lists(clauses(n), max_size=3 * n),
        st.lists(st.tuples(st.integers(1, 20), clauses(n)), max_size=2 * n)))


def satisfies(model, cls):
    return all(any(model[abs(l)] == (l > 0) for l in c) for c in cls)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10).flatmap(lambda n: st.tuples(st.just(n), st.lists(clauses(n), max_size=5 * n))))
def test_cdcl_matches_enumeration(case):
    n, cls = case
    s = Solver(n)
    ok = all(s.add_clause(c) for c in cls)
    res = s.solve() if ok else False
    expected = brute_force_maxsat(n, cls, []) is not None
    assert res == expected
    if res:
        assert satisfies(s.model(), cls)


def test_cdcl_pigeonhole_is_unsat():
    holes, pigeons = 5, 6
    var = lambda p, h: p * holes + h + 1
    s = Solver(holes * pigeons)
    for p in range(pigeons):
        s.add_clause([var(p, h) for h in range(holes)])
    for h in range(holes):
        for p in range(pigeons):
            for q in range(p + 1, pigeons):
                s.add_clause([-var(p, h), -var(q, h)])
    assert s.solve() is False


def test_cdcl_conflict_budget_returns_none():
    holes, pigeons = 7, 8
    var = lambda p, h: p * holes + h + 1
    s = Solver(holes * pigeons)
    for p in range(pigeons):
        s.add_clause([var(p, h) for h in range(holes)])
    for h in range(holes):
        for p in range(pigeons):
            for q in range(p + 1, pigeons):
                s.add_clause([-var(p, h), -var(q, h)])
    assert s.solve(conflict_limit=10) is None


@settings(max_examples=300, deadline=None)
@given(instances())
def test_builtin_matches_enumeration(case):
    n, hard, soft = case
    inst = WcnfInstance(n, hard, soft)
    v = solve_builtin(inst)
    best = brute_force_maxsat(n, hard, soft)
    if best is None:
        assert v.status is Status.UNSAT
    else:
        assert v.status is Status.OPTIMUM
        assert v.achieved_weight == best == inst.soft_weight(v.model)
        assert inst.hard_satisfied(v.model)


def test_all_three_variable_instances_with_four_clauses():
    rng = random.Random(3)
    lits = [l for v in (1, 2, 3) for l in (v, -v)]
    for _ in range(400):
        cls = [rng.sample(lits, rng.randint(1, 3)) for _ in range(rng.randint(1, 4))]
        split = rng.randint(0, len(cls))
        hard, soft = cls[:split], [(rng.randint(1, 5), c) for c in cls[split:]]
        v = solve_builtin(WcnfInstance(3, hard, soft))
        best = brute_force_maxsat(3, hard, soft)
        assert (v.achieved_weight if v.status is Status.OPTIMUM else None) == best


def test_empty_soft_set_is_plain_sat():
    v = solve_builtin(WcnfInstance(2, [[1], [-1, 2]], []))
    assert v.status is Status.OPTIMUM and v.model[2] and v.cost == 0


def test_budget_yields_unknown_or_incumbent():
    rng = random.Random(7)
    n = 60
    hard = [[rng.choice([v, -v]) for v in rng.sample(range(1, n + 1), 3)] for _ in range(240)]
    soft = [(1, [rng.choice([v, -v])]) for v in range(1, n + 1)]
    v = solve_builtin(WcnfInstance(n, hard, soft), Budget(conflict_limit=5))
    assert v.status in (Status.UNKNOWN, Status.SATISFIABLE, Status.OPTIMUM, Status.UNSAT)
    if v.model is not None:
        assert WcnfInstance(n, hard, soft).hard_satisfied(v.model)


def _fake_solver(tmp_path, body):
    script = tmp_path / "fake.py"
    script.write_text("import sys\n" + body)
    return [sys.executable, str(script), "{wcnf}"]


def test_external_protocol(tmp_path):
    inst = WcnfInstance(2, [[1, 2]], [(3, [-1]), (2, [-2])])
    cmd = _fake_solver(tmp_path, "print('o 2'); print('s OPTIMUM FOUND'); print('v -1 2')\n")
    v = solve_external(inst, cmd)
    assert v.status is Status.OPTIMUM and v.achieved_weight == 3


def test_external_model_violating_hard_is_rejected(tmp_path):
    inst = WcnfInstance(2, [[1, 2]], [(3, [-1])])
    cmd = _fake_solver(tmp_path, "print('s OPTIMUM FOUND'); print('v -1 -2')\n")
    with pytest.raises(Exception) as err:
        solve_external(inst, cmd)
    assert "hard" in str(err.value).lower()


def test_external_garbage_and_missing_binary(tmp_path):
    inst = WcnfInstance(1, [[1]], [])
    with pytest.raises(SolverProtocolError):
        solve_external(inst, _fake_solver(tmp_path, "print('hello')\n"))
    with pytest.raises(SolverSpawnError):
        solve_external(inst, ["/nonexistent/solver", "{wcnf}"])


@pytest.mark.skipif(not HAVE_CPSAT, reason="ortools not installed")
def test_cpsat_adapter_matches_builtin():
    rng = random.Random(11)
    for _ in range(15):
        n = rng.randint(3, 9)
        hard = [[rng.choice([v, -v]) for v in rng.sample(range(1, n + 1), 2)] for _ in range(n)]
        soft = [(rng.randint(1, 6), [rng.choice([v, -v]) for v in rng.sample(range(1, n + 1), 2)])
                for _ in range(n)]
        inst = WcnfInstance(n, hard, soft)
        a, b = solve_builtin(inst), solve_external(inst)
        assert a.status == b.status
        assert a.achieved_weight == b.achieved_weight
