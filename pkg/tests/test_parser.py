from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dadj import expr as E
from dadj.errors import ParseError
from dadj.parser import Header, parse_equation, parse_expr, parse_problem, render

H2 = Header(lattice=("m", "n"), parameters=("alpha", "beta"))


@pytest.mark.parametrize("text,expected", [
    ("u[2] - u[0]", E.dep("u", (2,)) - E.dep("u", (0,))),
    ("u[0]^2", E.dep("u", (0,)) ** 2),
    ("u[0]**2", E.dep("u", (0,)) ** 2),
    ("u", E.dep("u", (0,))),
    ("-n*u[-1]", -E.lattice_symbol(0, "n") * E.dep("u", (-1,))),
    ("3/2", E.const(Fraction(3, 2))),
    ("(-1)^n", E.parity([1], ("n",))),
    ("(-1)^(n+1)", -E.parity([1], ("n",))),
])
def test_parse_one_dimensional(text, expected):
    assert parse_expr(text) == expected


def test_parse_two_dimensional_and_parameters():
    e = parse_expr("alpha*(u[1,0] + u[-1,0]) - beta*v[0,1]", H2)
    assert E.param_key("alpha") in e.atoms()
    assert E.dep_key("v", (0, 1), E.V) in e.atoms()
    assert parse_expr("(-1)^(m+n)", H2) == E.parity([1, 1], ("m", "n"))


def test_function_arguments():
    h = Header(functions=("a",))
    assert parse_expr("a(n-2)", h) == E.func("a", (-2,), ("n",))
    with pytest.raises(ParseError):
        parse_expr("a(2*n)", h)


@pytest.mark.parametrize("text,column", [
    ("u[1]+", 6), ("w[0]", 1), ("u[1,0]", 2), ("1/0", 2), ("u[0]*(u[1]", None),
])
def test_diagnostics(text, column):
    with pytest.raises(ParseError) as info:
        parse_expr(text)
    if column is not None:
        assert info.value.column == column


def test_equation_sides():
    assert parse_equation("u[2] = u[0]") == parse_expr("u[2] - u[0]")
    with pytest.raises(ParseError):
        parse_equation("u[2] = u[0] = u[1]")


def test_problem_file_sections():
    p = parse_problem("""
# comment
[system]
parameters = alpha, beta
equation = alpha*(u[1,0] + u[-1,0])
    - beta*(u[0,1] + u[0,-1]) = 0
solve = u[1,0]

[symmetries]
X = u[0,0]
S = u: u[0,0]; alpha: 2*alpha

[substitutions]
one = beta: alpha; v: 1

[laws]
L = u[0,0]; u[0,1]

[verify]
steps = 7
range = -3..3
parameters = alpha: 2, beta: 3
""")
    assert p.header.lattice == ("m", "n")
    assert len(p.equations) == 1
    assert p.symmetries["S"].parameters
    assert E.param_key("beta") in p.substitutions["one"]
    assert len(p.laws["L"]) == 2
    assert p.verify.steps == 7 and (p.verify.low, p.verify.high) == (-3, 3)
    assert p.verify.parameters["beta"] == 3


@pytest.mark.parametrize("text,message", [
    ("", "no equations"),
    ("[system]\nequation = u[1]\n[bogus]\n", "unknown section"),
    ("[system]\nequation = u[1]\n[symmetries]\nQ = u[0]\nQ = u[1]\n", "duplicate"),
    ("[system]\nequation = u[1]-\n", "line 2"),
    ("[system]\nequation = u[1,1] - u[0]\n", "dimension"),
    ("[system]\nequation = u[1]\n[verify]\nrange = 3..1\n", "line 4"),
])
def test_problem_errors(text, message):
    with pytest.raises(ParseError) as info:
        parse_problem(text)
    assert message in str(info.value)


def test_invalid_utf8():
    with pytest.raises(ParseError):
        parse_problem(b"[system]\nequation = u[1] \xff\n")


atoms = st.sampled_from(["u[0]", "u[1]", "u[-2]", "n", "(-1)^n", "3", "1/2"])
exprs = st.recursive(atoms, lambda c: st.one_of(
    st.tuples(c, st.sampled_from(["+", "-", "*"]), c).map(lambda t: f"({t[0]}{t[1]}{t[2]})"),
    st.tuples(c, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
), max_leaves=6)


@settings(max_examples=100, deadline=None)
@given(exprs)
def test_render_round_trips(text):
    e = parse_expr(text)
    assert parse_expr(render(e)) == e


def test_render_round_trips_quotients_and_parameters():
    e = parse_expr("(alpha*u[1,0] - (-1)^(m+n)*u[0,0]^2)/(beta - u[0,-1])", H2)
    assert parse_expr(render(e), H2) == e


def test_non_integer_exponent_rejected():
    with pytest.raises(ParseError):
        parse_expr("u[0]^(1/2)")


def test_render_examples():
    assert render(parse_expr("u[2]*u[0] - u[1]^2")) == "u[2]*u[0] - u[1]^2"
    assert render(E.parity([1], ("n",))) == "(-1)^(n)"
    assert render(E.const(Fraction(3, 2))) == "3/2"


ALPHABET = "u v n m [ ] ( ) + - * / ^ 0 1 2 , = ; : # \n [system] equation solve alpha (-1)^".split(" ")


@settings(max_examples=300, deadline=None)
@given(st.one_of(st.binary(max_size=80),
                 st.lists(st.sampled_from(ALPHABET + [" ", "\n"]), max_size=40).map("".join)))
def test_fuzzed_input_gives_diagnostics_not_crashes(data):
    try:
        parse_problem(data)
    except ParseError:
        pass


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(ALPHABET[:14] + ["3", "n"]), max_size=20).map("".join))
def test_fuzzed_expressions(text):
    try:
        parse_expr(text)
    except ParseError:
        pass
