"""Symmetry characteristics: verification, multiplier operators, extension
to the adjoint variables and Lie brackets."""

from dataclasses import dataclass, field
import random

from . import expr as E
from . import lattice as LC
from .errors import IndeterminateError, InternalConsistencyError, DadjError
from .expr import U, V


@dataclass
class Characteristic:
    """X = Q^a d/du^a (+ rho_b d/db for parameters b)."""

    components: dict
    parameters: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        self.components = {k: E.as_expr(v) for k, v in self.components.items()}
        self.parameters = {k: E.as_expr(v) for k, v in self.parameters.items()
                           if not E.as_expr(v).is_zero()}

    def vector(self):
        return {(U, k): q for k, q in self.components.items()}

    def is_zero(self):
        return (all(q.is_zero() for q in self.components.values())
                and not self.parameters)


@dataclass
class ExtendedCharacteristic:
    """Y = X + Q*^a d/dv^a, with the multiplier operator and remainder R."""

    base: Characteristic
    adjoint: dict
    operator: list = None
    remainder: tuple = None

    @property
    def name(self):
        return self.base.name

    @property
    def parameters(self):
        return self.base.parameters

    @property
    def components(self):
        return self.base.components

    def vector(self):
        vec = self.base.vector()
        for k, q in self.adjoint.items():
            vec[(V, k)] = q
        return vec


@dataclass
class Verdict:
    symmetric: bool
    route: str
    images: list
    operator: list = None
    counterexample: dict = None
    residual: object = None

    @property
    def status(self):
        if not self.symmetric:
            return "not-symmetric"
        return "symmetric" if self.operator is not None else "symmetric-on-solutions"


# -- reduction -------------------------------------------------------------------

def reduce_mod(sys, e, combined=False, depth=2000):
    """Reduce ``e`` on solutions of ``sys`` (and its adjoint if ``combined``)."""
    rules = sys.rules()
    if rules is None:
        raise IndeterminateError("no solved form: declare 'solve' for each equation")
    sets = [rules]
    if combined:
        arules = sys.adjoint_rules()
        if arules is None:
            raise IndeterminateError("the adjoint system has no usable solved form")
        sets = [arules, rules]
    return LC.reduce_with(e, sets, depth)


def vanishes_on_solutions(sys, e, combined=False):
    return E.is_zero(reduce_mod(sys, e, combined))


# -- operators ----------------------------------------------------------------------

def _total_degree(p):
    return max((sum(ex for _, ex in m) for m in p), default=0)


def _multiplier(G, F):
    """lambda = G/F when it introduces no denominator factor of F."""
    if G.is_zero():
        return E.ZERO
    lam = G / F
    if lam.is_polynomial():
        return lam
    # the numerator of F must not share a factor with the denominator of lambda
    check = F.numerator() / lam.denominator()
    if _total_degree(check.den) != _total_degree(lam.den):
        return None
    return lam


def _solve_linear(rows, unknowns):
    """Gaussian elimination over rational functions; rows are (coeffs, rhs)."""
    rows = [(dict(c), r) for c, r in rows]
    solution = {}
    pivots = []
    for x in unknowns:
        pivot = None
        for i, (c, r) in enumerate(rows):
            if not c.get(x, E.ZERO).is_zero() and not _has_sign_atoms(c[x]):
                pivot = i
                break
        if pivot is None:
            for i, (c, r) in enumerate(rows):
                if not c.get(x, E.ZERO).is_zero():
                    pivot = i
                    break
        if pivot is None:
            continue
        c, r = rows.pop(pivot)
        a = c[x]
        c = {k: v / a for k, v in c.items()}
        r = r / a
        new = []
        for c2, r2 in rows:
            f = c2.get(x, E.ZERO)
            if not f.is_zero():
                c2 = dict(c2)
                for k, v in c.items():
                    c2[k] = c2.get(k, E.ZERO) - f * v
                c2 = {k: v for k, v in c2.items() if not v.is_zero()}
                r2 = r2 - f * r
            new.append((c2, r2))
        rows = new
        pivots.append((x, c, r))
    for c, r in rows:
        if not r.is_zero():
            return None
    for x, c, r in reversed(pivots):
        val = r
        for k, v in c.items():
            if k != x:
                val = val - v * solution.get(k, E.ZERO)
        solution[x] = val
    return solution


def _has_sign_atoms(e):
    return any(k[0] == E.SIGN for k in e.atoms())


def _stencil_ansatz(sys, G):
    """Solve G_a = sum_b sum_J b_{abJ} S_J F_b for coefficients free of [u]."""
    p, q = sys.p, sys.q
    Fs = sys.equations
    ops = []
    for a in range(q):
        Ga = G[a]
        unknowns = []
        total = Ga
        if Ga.is_zero():
            ops.append([LC.DifferenceOperator({}, p) for _ in range(q)])
            continue
        glo, ghi = LC.bounding_box(Ga.dep_atoms())
        for b in range(q):
            flo, fhi = LC.bounding_box(Fs[b].dep_atoms())
            lo = LC.sub(glo, flo)
            hi = LC.sub(ghi, fhi)
            if any(x > y for x, y in zip(lo, hi)):
                continue
            for J in _box(lo, hi):
                name = f"_b{a}_{b}_{len(unknowns)}"
                unknowns.append((name, b, J))
                total = total - E.param(name) * Fs[b].shift(J)
        if not unknowns:
            return None
        names = {E.param_key(n) for n, _, _ in unknowns}
        num = total.num
        rows = {}
        for m, c in num.items():
            dep_part = tuple(x for x in m if x[0][0] == E.DEP)
            rest = tuple(x for x in m if x[0][0] != E.DEP)
            unk = [x for x in rest if x[0] in names]
            other = tuple(x for x in rest if x[0] not in names)
            coeff = E.from_polys({other: c})
            row = rows.setdefault(dep_part, ({}, E.ZERO))
            if unk:
                if len(unk) != 1 or unk[0][1] != 1:
                    return None
                key = unk[0][0]
                row[0][key] = row[0].get(key, E.ZERO) + coeff
            else:
                rows[dep_part] = (row[0], row[1] - coeff)
        try:
            sol = _solve_linear(list(rows.values()), sorted(names))
        except (DadjError, ZeroDivisionError):
            return None
        if sol is None:
            return None
        row_ops = []
        for b in range(q):
            terms = {J: sol.get(E.param_key(n), E.ZERO)
                     for n, bb, J in unknowns if bb == b}
            row_ops.append(LC.DifferenceOperator(terms, p))
        ops.append(row_ops)
    return ops


def _box(lo, hi):
    if not lo:
        yield ()
        return
    for j in range(lo[0], hi[0] + 1):
        for rest in _box(lo[1:], hi[1:]):
            yield (j,) + rest


def find_operator(sys, G):
    """Multiplier operators B with G_a = sum_b B_ab(F_b) identically, or None."""
    G = [E.as_expr(g) for g in G]
    p, q = sys.p, sys.q
    ops = None
    lams = [_multiplier(g, F) for g, F in zip(G, sys.equations)]
    if all(lam is not None for lam in lams):
        ops = [[LC.DifferenceOperator.multiplier(lams[a], p) if a == b
                else LC.DifferenceOperator({}, p) for b in range(q)] for a in range(q)]
    else:
        ops = _stencil_ansatz(sys, G)
    if ops is None:
        return None
    for a in range(q):
        total = sum((ops[a][b](sys.equations[b]) for b in range(q)), E.ZERO)
        if not E.is_zero(G[a] - total):
            raise InternalConsistencyError("multiplier operator does not reproduce pr X(F)")
    return ops


def images(sys, Q):
    return [LC.prolong_apply(Q, F) for F in sys.equations]


def check_symmetry(sys, Q, seed=0):
    """Decide whether ``Q`` is a symmetry of ``sys`` and find its witness."""
    G = images(sys, Q)
    ops = find_operator(sys, G)
    rules = sys.rules()
    if rules is None:
        if ops is not None:
            return Verdict(True, "operator", G, ops)
        raise IndeterminateError("no solved form and no multiplier operator found")
    reduced = [reduce_mod(sys, g) for g in G]
    if all(E.is_zero(r) for r in reduced):
        route = "reduction+operator" if ops is not None else "reduction"
        return Verdict(True, route, G, ops)
    if ops is not None:
        raise InternalConsistencyError("operator witness found but reduction is nonzero")
    bad = next(r for r in reduced if not r.is_zero())
    point, value = _counterexample(bad, seed)
    return Verdict(False, "reduction", G, None, point, value)


def _counterexample(e, seed):
    """Values of the free solution data at which ``e`` is nonzero."""
    rng = random.Random(seed)
    for _ in range(200):
        point = E.sample_point(e.atoms(), rng)
        try:
            value = E.evaluate(e, point)
        except DadjError:
            continue
        if value != 0:
            return point, value
    raise InternalConsistencyError("nonzero reduced expression vanished at every sample")


def extend_characteristic(sys, Q, ops=None):
    """Extended generator with Q*^a = -sum_b B*_ba(v^b) and remainder R."""
    if ops is None:
        ops = find_operator(sys, images(sys, Q))
        if ops is None:
            raise IndeterminateError(f"no multiplier operator found for {Q.name or 'Q'}")
    q = sys.q
    adjoint = {}
    R = [E.ZERO] * sys.p
    for a, comp in enumerate(sys.components):
        qa = E.ZERO
        for b, bcomp in enumerate(sys.components):
            vb = sys.v(bcomp)
            qa = qa - ops[b][a].apply_adjoint_to(vb)
            for i, w in enumerate(LC.operator_remainder(ops[b][a], sys.equations[a], vb)):
                R[i] = R[i] + w
        adjoint[sys.adjoint_key(comp)] = qa
    Y = ExtendedCharacteristic(Q, adjoint, ops, tuple(R))
    L = LC.lagrangian(sys, as_written=True)
    if not E.is_zero(LC.prolong_apply(Y, L) - LC.divergence(Y.remainder)):
        raise InternalConsistencyError("extended generator fails the variational criterion")
    return Y


def lie_bracket(Q1, Q2, name=""):
    comps = {}
    for k in Q1.components.keys() | Q2.components.keys():
        a = Q1.components.get(k, E.ZERO)
        b = Q2.components.get(k, E.ZERO)
        comps[k] = LC.prolong_apply(Q1, b) - LC.prolong_apply(Q2, a)
    params = {}
    for k in Q1.parameters.keys() | Q2.parameters.keys():
        a = Q1.parameters.get(k, E.ZERO)
        b = Q2.parameters.get(k, E.ZERO)
        params[k] = LC.prolong_apply(Q1, b) - LC.prolong_apply(Q2, a)
    return Characteristic(comps, params, name or f"[{Q1.name},{Q2.name}]")
