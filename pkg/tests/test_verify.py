from fractions import Fraction

import pytest

from conftest import expr, load
from dadj import expr as E
from dadj import lattice as LC
from dadj import noether as N
from dadj import verify as VF
from dadj.errors import SingularOrbitError


def test_solution_grid_satisfies_equation():
    _, sys_ = load("hydon")
    grid = VF.iterate_solution(sys_, window=((1,), (15,)), origin=(1,), seed=4)
    F = sys_.equations[0]
    for t in range(1, 12):
        assert grid.eval_at(F, (t,)) == 0
    assert len(grid.free) == 2


def test_two_dimensional_grid_and_adjoint_grid():
    _, sys_ = load("h1")
    grid = VF.iterate_solution(sys_, seed=1)
    vgrid = VF.iterate_adjoint(sys_, grid, seed=2)
    F = sys_.equations[0]
    Fs = LC.adjoint_system(sys_, as_written=True).equations[0]
    for X in [(0, 0), (2, 3), (4, 1)]:
        assert grid.eval_at(F, X) == 0
        assert vgrid.eval_at(Fs, LC.add(X, (1, 1))) == 0


def test_grid_is_deterministic_and_exact():
    _, sys_ = load("ex41")
    a = VF.iterate_solution(sys_, seed=9, origin=(1,)).value((0, "u"), (8,))
    b = VF.iterate_solution(sys_, seed=9, origin=(1,)).value((0, "u"), (8,))
    assert a == b and isinstance(a, Fraction)


def test_singular_orbit_detected():
    _, sys_ = load("hydon")
    grid = VF.iterate_solution(sys_, initial={((0, "u"), (1,)): 1, ((0, "u"), (2,)): 2},
                               origin=(1,))
    with pytest.raises(SingularOrbitError):
        grid.value((0, "u"), (3,))


def test_verify_law_positive_and_negative():
    problem, sys_ = load("ex41")
    good = N.ConservationLaw([expr("u[0]^2/u[-1]^2", "ex41")], sys_, False)
    rep = VF.verify_law(good, steps=20, orbits=5)
    assert rep.passed and rep.points == 100 and len(set(rep.values)) == 1
    bad = N.ConservationLaw([expr("u[0]/u[-1]^2", "ex41")], sys_, False)
    rep = VF.verify_law(bad, steps=20, orbits=5)
    assert not rep.passed and rep.failures


def test_verify_with_adjoint_bindings():
    problem, sys_ = load("ex41")
    from dadj import symmetry as S
    Y = S.extend_characteristic(sys_, problem.symmetries["Q2"])
    law = N.noether_flux(sys_, Y)
    rep = VF.verify_law(law, steps=10, orbits=2,
                        adjoint_bindings=problem.substitutions["quasi"])
    assert rep.passed


def test_parameter_values():
    _, sys_ = load("wave")
    vals = VF.parameter_values(sys_, {"alpha": 3}, seed=0)
    assert vals["alpha"] == 3 and vals["beta"] > 0
