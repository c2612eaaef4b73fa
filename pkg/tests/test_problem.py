import pytest

from maxreal import ltl
from maxreal.problem import ProblemError, SoftSpec, SynthesisProblem, format_problem, parse_problem

TEXT = """\
# small example
[inputs]
i
[outputs]
o p
[hard]
G (o -> X !o)   # no two in a row
[soft]
G !o
i -> !p
[relax]
1: G !o ; F G !o ; G F !o ; true
[weights]
1: 5 3 2 1
"""


def test_parse_sections_and_wrap_warning():
    prob, warnings = parse_problem(TEXT)
    assert prob.inputs == ("i",) and prob.outputs == ("o", "p")
    assert prob.hard is ltl.parse("G (o -> X !o)")
    assert prob.softs[1].formula is ltl.parse("G (i -> !p)")
    assert len(warnings) == 1 and "G (i -> !p)" in warnings[0]
    assert len(prob.softs[0].relax) == 4 and prob.softs[0].weights == [5, 3, 2, 1]
    assert prob.has_generalized_softs()
    assert len(prob.softs[1].relax_vector()) == 3


def test_format_round_trip():
    prob, _ = parse_problem(TEXT)
    again, warnings = parse_problem(format_problem(prob))
    assert not warnings
    assert again.hard is prob.hard
    assert [s.formula for s in again.softs] == [s.formula for s in prob.softs]
    assert again.softs[0].relax == prob.softs[0].relax
    assert again.softs[0].weights == prob.softs[0].weights


@pytest.mark.parametrize("text, needle", [
    ("[inputs]\na\n[outputs]\na\n", "both"),
    ("[outputs]\no\n[hard]\nG q\n", "q"),
    ("[outputs]\no\n[soft]\nG F o\n", "safe"),
    ("[outputs]\no\n[banana]\n", "banana"),
    ("o\n", "before"),
    ("[outputs]\no\n[soft]\nG o\n[weights]\n2: 1 2 3\n", "number 2"),
    ("[outputs]\no\n[soft]\nG o\n[weights]\n1: 1 2\n", "weights"),
    ("[outputs]\no\n[hard]\nG (o &\n", "line 4"),
])
def test_errors(text, needle):
    with pytest.raises(ProblemError) as err:
        parse_problem(text)
    assert needle in str(err.value)


def test_direct_construction_validates():
    o = ltl.Atom("o")
    with pytest.raises(ProblemError):
        SynthesisProblem((), ("o",), [], [SoftSpec(ltl.Not(o))])
    p = SynthesisProblem((), ("o",), [], [SoftSpec(ltl.Globally(ltl.Not(o)))])
    assert p.hard is ltl.TRUE and p.n == 1
