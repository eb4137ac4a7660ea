"""Exact numeric solutions by forward iteration and law verification.

A :class:`SolutionGrid` fills values lazily: a lattice point that an
elimination rule can reach from the grid origin is computed from its solved
form; every other point is free data, drawn from a deterministic RNG keyed by
seed, family and point (or supplied by the caller).
"""

from dataclasses import dataclass, field
from fractions import Fraction
import random
import sys as _sys

from . import expr as E
from . import lattice as LC
from .errors import (DadjError, EvaluationSingularError, IndeterminateError,
                     SingularAdjointError, SingularOrbitError)
from .expr import U, V


def random_rational(rng, low=-9, high=9):
    while True:
        num = rng.randint(low, high)
        if num:
            return Fraction(num, rng.randint(1, 4))


def parameter_values(sys, given=None, seed=0):
    rng = random.Random(f"params:{seed}")
    out = {}
    for name in sys.parameters:
        if given and name in given:
            out[name] = Fraction(given[name])
        else:
            out[name] = Fraction(rng.randint(1, 9), rng.randint(1, 4))
    return out


@dataclass
class SolutionGrid:
    """Lazily iterated solution values on the lattice.

    ``rules`` maps families to elimination rules; ``base`` is another grid
    supplying values of families this grid does not own (the u-grid for an
    adjoint grid).
    """

    p: int
    origin: tuple
    rules: dict
    params: dict
    seed: int = 0
    initial: object = None
    base: object = None
    low: int = -9
    high: int = 9
    error: type = SingularOrbitError
    values: dict = field(default_factory=dict)
    free: set = field(default_factory=set)

    def value(self, family, X):
        key = (family, X)
        if key in self.values:
            return self.values[key]
        rule = self.rules.get(family)
        if rule is None:
            if self.base is None:
                raise KeyError(f"no values for family {family}")
            return self.base.value(family, X)
        if rule.reducible(X, self.origin):
            K = LC.sub(X, rule.lead)
            try:
                val = self.eval_at(rule.rhs, K)
            except EvaluationSingularError:
                raise self.error(f"singular step computing {family[1]}{list(X)}", index=X) from None
        else:
            val = self._initial(family, X)
            self.free.add(key)
        self.values[key] = val
        return val

    def _initial(self, family, X):
        if self.initial is not None:
            if callable(self.initial):
                return self.initial(family, X, self)
            if (family, X) in self.initial:
                return Fraction(self.initial[(family, X)])
        rng = random.Random(f"{self.seed}:{family[0]}:{family[1]}:{X}")
        return random_rational(rng, self.low, self.high)

    def point(self, e, X):
        """Assignment of the atoms of ``e`` at base point ``X``."""
        pt = {}
        for k in e.atoms():
            kind = k[0]
            if kind == E.DEP:
                pt[k] = self.value((k[1], k[2]), LC.add(X, k[3]))
            elif kind == E.LATTICE:
                pt[k] = X[k[1]]
            elif kind == E.PARAM:
                pt[k] = self.params[k[1]]
            elif kind == E.SIGN:
                pt[k] = 1 if X[k[1]] % 2 == 0 else -1
            else:
                raise IndeterminateError(f"cannot evaluate coefficient function {k[1]}")
        return pt

    def eval_at(self, e, X):
        return E.evaluate(e, self.point(e, X))

    def fill(self, lo, hi):
        """Compute every point of the window ``lo..hi`` (inclusive)."""
        for fam in self.rules:
            for X in _window(lo, hi):
                self.value(fam, X)
        return self


def _window(lo, hi):
    out = [()]
    for a, b in zip(lo, hi):
        out = [o + (j,) for o in out for j in range(a, b + 1)]
    return out


def _rules_by_family(rules):
    if rules is None:
        raise IndeterminateError("no solved form for iteration")
    return {r.family: r for r in rules}


def iterate_solution(sys, initial=None, window=None, seed=0, origin=None, params=None,
                     low=-9, high=9):
    """Solution grid of ``sys``; ``window`` = (lo, hi) is filled eagerly."""
    _sys.setrecursionlimit(max(_sys.getrecursionlimit(), 20000))
    origin = tuple(origin) if origin is not None else LC.zero(sys.p)
    grid = SolutionGrid(sys.p, origin, _rules_by_family(sys.rules()),
                        parameter_values(sys, params, seed), seed, initial,
                        low=low, high=high)
    if window is not None:
        grid.fill(*window)
    return grid


def iterate_adjoint(sys, grid, initial=None, window=None, seed=0, bindings=None):
    """Adjoint-variable grid on top of the solution ``grid``.

    Free adjoint data come from ``initial`` (dict or callable, as for
    :func:`iterate_solution`), or from ``bindings`` ``{v-atom: f(n, [u])}``
    evaluated on ``grid``, or from the seeded RNG.
    """
    rules = _rules_by_family(sys.adjoint_rules())
    if bindings:
        images = {}
        for k, f in bindings.items():
            key = E.key_of(k)
            images[(key[1], key[2])] = E.as_expr(f).shift(LC.neg(key[3]))

        def initial(family, X, g):
            return g.eval_at(images[family], X)
    vgrid = SolutionGrid(sys.p, grid.origin, rules, grid.params, seed, initial,
                         base=grid, low=grid.low, high=grid.high, error=SingularAdjointError)
    if window is not None:
        vgrid.fill(*window)
    return vgrid


@dataclass
class LawReport:
    max_residual: Fraction
    points: int
    orbits: int
    failures: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    values: list = field(default_factory=list)

    @property
    def passed(self):
        return self.max_residual == 0 and self.points > 0 and not self.failures


def _start(e, origin):
    keys = e.dep_atoms()
    if not keys:
        return tuple(origin)
    lo, _ = LC.bounding_box(keys)
    return tuple(o - l for o, l in zip(origin, lo))


def verify_on_grid(fluxes, grid, steps=20):
    """Max residual of Div P over ``steps`` points per direction of one grid."""
    fluxes = [E.as_expr(f) for f in fluxes]
    p = len(fluxes)
    residual = Fraction(0)
    values = []
    count = 0
    if p == 1:
        P = fluxes[0]
        n0 = _start(P, grid.origin)
        prev = None
        for t in range(steps + 1):
            val = grid.eval_at(P, LC.add(n0, (t,)))
            values.append(val)
            if prev is not None:
                residual = max(residual, abs(val - prev))
                count += 1
            prev = val
        return residual, count, values
    div = LC.divergence(fluxes)
    x0 = _start(div, grid.origin)
    for off in _window((0,) * p, (steps - 1,) * p):
        val = grid.eval_at(div, LC.add(x0, off))
        residual = max(residual, abs(val))
        count += 1
    return residual, count, values


def verify_law(law, steps=20, orbits=5, seed=0, params=None, adjoint_bindings=None,
               retries=10, low=-9, high=9, origin=None):
    """Check Div P = 0 exactly on ``orbits`` random solutions.

    Laws of the combined system get a random adjoint grid as well.  Singular
    orbits are retried with fresh data up to ``retries`` times.
    """
    sys = law.system
    report = LawReport(Fraction(0), 0, 0)
    if origin is None:
        origin = (1,) if sys.p == 1 else LC.zero(sys.p)
    attempt = 0
    s = seed
    while report.orbits < orbits:
        if attempt >= orbits + retries:
            report.warnings.append(f"only {report.orbits} of {orbits} orbits were regular")
            break
        attempt += 1
        try:
            grid = iterate_solution(sys, seed=s, origin=origin, params=params, low=low, high=high)
            if law.combined:
                grid = iterate_adjoint(sys, grid, seed=s + 7919, bindings=adjoint_bindings)
            res, count, values = verify_on_grid(law.fluxes, grid, steps)
        except (SingularOrbitError, EvaluationSingularError) as exc:
            report.warnings.append(f"seed {s}: {exc}")
            s += 1
            continue
        report.max_residual = max(report.max_residual, res)
        report.points += count
        report.orbits += 1
        if res != 0:
            report.failures.append({"seed": s, "residual": res})
        if report.orbits == 1:
            report.values = values
        s += 1
    return report
