import pytest

from conftest import expr, load
from dadj import expr as E
from dadj import lattice as LC
from dadj import noether as N
from dadj import symmetry as S
from dadj.errors import (InternalConsistencyError, InvalidSubstitutionError,
                         MissingRemainderError, NotForwardNormalizedError)


def _Y(name, sym):
    problem, sys_ = load(name)
    return sys_, S.extend_characteristic(sys_, problem.symmetries[sym])


@pytest.mark.parametrize("name,sym", [("hydon", "Q1"), ("hydon", "Q2"), ("ex41", "Q2"), ("ex42", "X")])
def test_one_dimensional_flux_equals_higher_euler_formula(name, sym):
    sys_, Y = _Y(name, sym)
    law = N.noether_flux(sys_, Y)
    (P,) = N.noether_formula(LC.lagrangian(sys_), Y, 1, Y.remainder)
    assert E.is_zero(law.fluxes[0] - P)
    assert law.certified


def test_higher_euler_formula_overcounts_in_two_dimensions():
    sys_, Y = _Y("h1", "X1")
    law = N.noether_flux(sys_, Y)
    formula = N.ConservationLaw(N.noether_formula(LC.lagrangian(sys_), Y, 2, Y.remainder), sys_)
    assert law.certified
    assert not formula.certify()


def test_guards():
    sys_, Y = _Y("wave", "X1")
    with pytest.raises(NotForwardNormalizedError):
        N.noether_flux(sys_, Y)
    assert N.direct_flux(sys_, Y).certified
    Y.remainder = None
    with pytest.raises(MissingRemainderError):
        N.direct_flux(sys_, Y)


def test_parameter_generator_is_flagged():
    sys_, Y = _Y("h1", "X4")
    law = N.noether_flux(sys_, Y)
    assert "warning" in law.provenance
    assert not law.certified


def test_classification_menu_and_flags():
    _, sys_ = load("h1")
    sa = N.classify_self_adjointness(sys_)
    assert sa.classification == "weak" and not sa.depends_on_u
    assert [label for label, _ in sa.checked][0] == "v=u"
    _, ex42 = load("ex42")
    sa = N.classify_self_adjointness(ex42, [("const", {E.dep_key("v", (0,), E.V): E.ONE})])
    assert sa.classification == "quasi" and not sa.depends_on_u


def test_transfer_rejects_non_solutions():
    sys_, Y = _Y("ex41", "Q1")
    law = N.noether_flux(sys_, Y)
    with pytest.raises(InvalidSubstitutionError):
        N.transfer(law, N.strict_witness(sys_), "v=u")


def test_equivalence_up_to_sign_and_triviality():
    problem, sys_ = load("ex41")
    law = N.transfer(N.noether_flux(*_Y("ex41", "Q2")), problem.substitutions["quasi"])
    ref = expr("u[0]^2/u[-1]^2", "ex41")
    assert N.equivalent(law, [ref]) == 1
    assert N.equivalent(law, [-ref]) == -1
    assert N.equivalent(law, [ref + 1]) == 0
    zero_law = N.ConservationLaw([expr("u[1]*u[-1] - u[0]^2", "ex41")], sys_, False)
    assert N.is_trivial(zero_law)


def test_symmetry_action_requires_symmetry():
    problem, sys_ = load("ex41")
    law = N.transfer(N.noether_flux(*_Y("ex41", "Q2")), problem.substitutions["quasi"])
    assert N.apply_symmetry_to_law(problem.symmetries["Q1"], law).certified
    with pytest.raises(InternalConsistencyError):
        N.apply_symmetry_to_law(problem.symmetries["NotSym"], law)


def test_o2de_condition_with_coefficient_functions():
    a = [E.func(f"a{i}", (0,), ("n",)) for i in (1, 2, 3)]
    assert not N.check_o2de_condition(*a)
    assert N.check_o2de_condition(E.ONE, E.const(5), E.ONE)
