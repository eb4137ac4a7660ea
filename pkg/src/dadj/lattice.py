"""Shift action, prolongation, difference Euler operators and adjoints.

Multi-indices are plain tuples of ints.  A dependent-variable family is
identified by ``(cls, name)`` with ``cls`` one of :data:`dadj.expr.U` /
:data:`dadj.expr.V`.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import expr as E
from .errors import (InternalConsistencyError, NotForwardNormalizedError,
                     ReductionDepthError)
from .expr import DEP, U, V, Expr


# -- multi-indices --------------------------------------------------------------

def unit(i, p):
    return tuple(1 if k == i else 0 for k in range(p))


def add(J, K):
    return tuple(a + b for a, b in zip(J, K))


def sub(J, K):
    return tuple(a - b for a, b in zip(J, K))


def neg(J):
    return tuple(-a for a in J)


def zero(p):
    return (0,) * p


def geq(J, K):
    return all(a >= b for a, b in zip(J, K))


def shift(e, J):
    """Composite shift S_J of an expression."""
    return E.as_expr(e).shift(J)


def offsets(e, cls=None, name=None):
    """Shift multi-indices of the dependent atoms in ``e``."""
    return {k[3] for k in E.as_expr(e).dep_atoms(cls, name)}


def bounding_box(keys):
    keys = list(keys)
    p = len(keys[0][3])
    lo = tuple(min(k[3][i] for k in keys) for i in range(p))
    hi = tuple(max(k[3][i] for k in keys) for i in range(p))
    return lo, hi


def telescope(g, J):
    """Flux W with ``Div W = S_J g - g``.

    The path runs along direction 1 first, then direction 2, and so on.
    """
    p = len(J)
    g = E.as_expr(g)
    W = [E.ZERO] * p
    prefix = [0] * p
    for i, j in enumerate(J):
        if j > 0:
            for t in range(j):
                W[i] = W[i] + g.shift(tuple(prefix[:i]) + (t,) + (0,) * (p - i - 1))
        elif j < 0:
            for t in range(j, 0):
                W[i] = W[i] - g.shift(tuple(prefix[:i]) + (t,) + (0,) * (p - i - 1))
        prefix[i] = j
    return tuple(W)


# -- vector fields ----------------------------------------------------------------

def _vector_of(Q):
    """``{(cls, name): Expr}`` and ``{param: Expr}`` of a characteristic."""
    if hasattr(Q, "vector"):
        return Q.vector(), dict(getattr(Q, "parameters", {}) or {})
    vec = {}
    for k, v in Q.items():
        vec[k if isinstance(k, tuple) else (U, k)] = E.as_expr(v)
    return vec, {}


def prolong_apply(Q, e):
    """pr X(e) = sum_J S_J Q^a d e / d u^a_J  +  sum rho_b d e / d b."""
    e = E.as_expr(e)
    vec, params = _vector_of(Q)
    total = E.ZERO
    for k in sorted(e.dep_atoms()):
        q = vec.get((k[1], k[2]))
        if q is None or q.is_zero():
            continue
        d = E.diff(e, k)
        if not d.is_zero():
            total = total + q.shift(k[3]) * d
    for name, rho in params.items():
        if rho.is_zero():
            continue
        key = E.param_key(name)
        if key in e.atoms():
            total = total + rho * E.diff(e, key)
    return total


# -- Euler operators --------------------------------------------------------------

def _family(component):
    if isinstance(component, str):
        return (U, component)
    return component


def euler(e, component):
    """E_{u^a} e = sum_J S_{-J} d e / d u^a_J."""
    cls, name = _family(component)
    e = E.as_expr(e)
    total = E.ZERO
    for k in sorted(e.dep_atoms(cls, name)):
        total = total + E.diff(e, k).shift(neg(k[3]))
    return total


def higher_euler(e, component, J):
    """E_{u^a_J} e = sum_{I >= 0} S_{-I} d e / d u^a_{I+J}."""
    cls, name = _family(component)
    J = tuple(J)
    if any(j < 0 for j in J):
        raise ValueError("higher Euler operators need J >= 0")
    e = E.as_expr(e)
    total = E.ZERO
    for k in sorted(e.dep_atoms(cls, name)):
        I = sub(k[3], J)
        if all(i >= 0 for i in I):
            total = total + E.diff(e, k).shift(neg(I))
    return total


def divergence(P):
    """Div P = sum_i (S_i - id) P^i."""
    p = len(P)
    total = E.ZERO
    for i, Pi in enumerate(P):
        Pi = E.as_expr(Pi)
        total = total + Pi.shift(unit(i, p)) - Pi
    return total


def families(e):
    return sorted({(k[1], k[2]) for k in E.as_expr(e).dep_atoms()})


def is_divergence(e, p, seed=0, lattice=("n",)):
    """A tuple R with Div R = e, or None.

    Every family must pass the Euler test.  For ``p = 1`` the flux is built
    by peeling the leftmost shift: fixing it at a constant ``b`` and shifting
    back gives one layer of R; the remaining ``n``-dependence is summed with
    Gosper's algorithm.  Higher dimensions return None unless ``e`` is zero.
    """
    e = E.as_expr(e)
    if e.is_zero():
        return (E.ZERO,) * p
    for fam in families(e):
        if not E.is_zero(euler(e, fam)):
            return None
    if p != 1:
        return None
    R = _peel_1d(e, seed, E.lattice_key(0, lattice[0]))
    if R is None or not E.is_zero(divergence((R,)) - e):
        return None
    return (R,)


def _peel_1d(e, seed, nkey):
    import random
    rng = random.Random(seed)
    keys = sorted(e.dep_atoms())
    if not keys:
        return _sum_in_n(e, nkey)
    lo = min(k[3][0] for k in keys)
    hi = max(k[3][0] for k in keys)
    fams = families(e)
    for _ in range(8):
        b = {f: E.const(rng.randint(2, 40)) for f in fams}
        try:
            R = E.ZERO
            # R(n; x_lo..x_{hi-1}) = sum_t S^{-t}[e with x_lo..x_{lo+t-1} = b]
            for t in range(1, hi - lo + 1):
                bind = {E.dep_key(name, (j,), cls): b[(cls, name)]
                        for (cls, name) in fams for j in range(lo, lo + t)}
                R = R + E.substitute(e, bind, propagate=False).shift((-t,))
            bind = {E.dep_key(name, (j,), cls): b[(cls, name)]
                    for (cls, name) in fams for j in range(lo, hi + 1)}
            rest = E.substitute(e, bind, propagate=False).shift((-(hi - lo),))
            # rest(n) = f(n+1) - f(n) for f(n) = R(n - (hi-lo); b..b)
            if not rest.is_zero():
                f = _sum_in_n(rest, nkey)
                if f is None:
                    return None
                R = R + f
            return R
        except E.SubstitutionSingularError:
            continue
    return None


def _sum_in_n(g, nkey):
    """f with f(n+1) - f(n) = g(n), for g rational in n; None if not rational."""
    import sympy
    from sympy.concrete.gosper import gosper_term

    g = E.as_expr(g)
    if g.is_zero():
        return E.ZERO
    if any(k[0] == E.SIGN or k[0] == E.FUNC or k[0] == DEP for k in g.atoms()):
        return None
    if nkey not in g.atoms():
        return g * E.atom(nkey)
    gens, sym = _sympy_symbols(g)
    expr = _to_sympy_expr(g, sym)
    term = gosper_term(expr, sym[nkey])
    if term is None:
        return None
    f = sympy.cancel(term * expr)
    return _from_sympy_expr(f, sym)


def _sympy_symbols(g):
    import sympy
    keys = sorted(g.atoms())
    sym = {k: sympy.Symbol(f"x{i}") for i, k in enumerate(keys)}
    return keys, sym


def _poly_to_sympy(p, sym):
    import sympy
    total = sympy.Integer(0)
    for m, c in p.items():
        t = sympy.Integer(c)
        for k, ex in m:
            t *= sym[k] ** ex
        total += t
    return total


def _to_sympy_expr(g, sym):
    return _poly_to_sympy(g.num, sym) / _poly_to_sympy(g.den, sym)


def _from_sympy_expr(f, sym):
    import sympy
    back = {s: k for k, s in sym.items()}
    num, den = sympy.fraction(sympy.cancel(f))

    def conv(poly_expr):
        out = E.ZERO
        P = sympy.Poly(sympy.expand(poly_expr), *sym.values())
        gens = list(sym.values())
        for monom, coeff in P.terms():
            c = sympy.Rational(coeff)
            t = E.const(Fraction(int(c.p), int(c.q)))
            for s, ex in zip(gens, monom):
                if ex:
                    t = t * E.atom(back[s]) ** ex
            out = out + t
        return out

    return conv(num) / conv(den)


# -- systems ----------------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    """Solved form u^a_L = rhs used to eliminate shifted copies of u^a_L.

    ``bounded`` lists the lattice directions in which the shifted stencil
    must stay above the reduction origin; ``stencil_min`` is the lower corner
    of the equation's stencil for the solved family.
    """

    family: tuple
    lead: tuple
    rhs: Expr
    stencil_min: tuple
    bounded: tuple

    def reducible(self, X, origin):
        K = sub(X, self.lead)
        return all(K[i] + self.stencil_min[i] >= origin[i] for i in self.bounded)

    def image(self, X):
        return self.rhs.shift(sub(X, self.lead))


def descent_directions(stencil, lead):
    """Directions to bound so that repeated elimination terminates."""
    p = len(lead)
    for d in range(p):
        if all(s == lead or s[d] < lead[d] for s in stencil):
            return (d,)
    if all(s == lead or sum(s) < sum(lead) for s in stencil):
        return tuple(range(p))
    return None


def make_rule(equation, key):
    """Solve ``equation`` (linear in atom ``key``) for that atom."""
    eq = E.as_expr(equation)
    a = E.atom(key)
    c = E.diff(eq, key)
    if c.is_zero() or key in c.atoms():
        return None
    r = eq - c * a
    if key in r.atoms():
        return None
    stencil = offsets(eq, key[1], key[2])
    dirs = descent_directions(stencil, key[3])
    if dirs is None:
        return None
    p = len(key[3])
    smin = tuple(min(s[i] for s in stencil) for i in range(p))
    return Rule((key[1], key[2]), key[3], -r / c, smin, dirs)


def _lead_candidates(eq, fam):
    keys = sorted(eq.dep_atoms(*fam))
    if not keys:
        return []
    p = len(keys[0][3])
    stencil = {k[3] for k in keys}
    out = []
    for d in range(p):
        top = max(s[d] for s in stencil)
        tops = [s for s in stencil if s[d] == top]
        if len(tops) == 1:
            out.append(tops[0])
    top = max(sum(s) for s in stencil)
    tops = [s for s in stencil if sum(s) == top]
    if len(tops) == 1:
        out.append(tops[0])
    seen = []
    for s in out:
        if s not in seen:
            seen.append(s)
    return [E.dep_key(fam[1], s, fam[0]) for s in seen]


def auto_rules(equations, cls=U, names=None):
    """One elimination rule per equation, each for a distinct family."""
    rules = []
    used = set()
    for eq in equations:
        fams = [f for f in families(eq) if f[0] == cls and f not in used]
        if names is not None:
            fams = [f for f in fams if f[1] in names]
        rule = None
        for fam in fams:
            for key in _lead_candidates(eq, fam):
                rule = make_rule(eq, key)
                if rule is not None:
                    break
            if rule is not None:
                break
        if rule is None:
            return None
        used.add(rule.family)
        rules.append(rule)
    return rules


@dataclass
class DifferenceSystem:
    """Equations F_a = 0 on a p-dimensional lattice."""

    equations: list
    lattice: tuple = ("n",)
    components: tuple = ("u",)
    adjoints: tuple = ("v",)
    parameters: tuple = ()
    functions: tuple = ()
    solve_for: list = field(default_factory=list)

    def __post_init__(self):
        self.equations = [E.as_expr(F) for F in self.equations]
        self.lattice = tuple(self.lattice)
        self.components = tuple(self.components)
        self.adjoints = tuple(self.adjoints)
        self._rules = None
        self._adjoint_rules = None

    @property
    def p(self):
        return len(self.lattice)

    @property
    def q(self):
        return len(self.components)

    @classmethod
    def from_problem(cls, problem):
        h = problem.header
        return cls(problem.equations, h.lattice, h.components, h.adjoints,
                   h.parameters, h.functions, list(problem.solve_for))

    def is_forward_normalized(self):
        return all(j >= 0 for F in self.equations for J in offsets(F, U) for j in J)

    def with_equations(self, equations, solve_for=None):
        out = replace(self, equations=list(equations),
                      solve_for=list(self.solve_for if solve_for is None else solve_for))
        return out

    def adjoint_key(self, name):
        return self.adjoints[self.components.index(name)]

    def v(self, component, J=None):
        return E.dep(self.adjoint_key(component), J or zero(self.p), V)

    def u(self, component, J=None):
        return E.dep(component, J or zero(self.p), U)

    def rules(self):
        """Elimination rules for the u-variables (declared or automatic)."""
        if self._rules is None:
            if self.solve_for:
                rules = []
                for F, key in zip(self.equations, self.solve_for):
                    rule = make_rule(F, key)
                    if rule is None:
                        rules = None
                        break
                    rules.append(rule)
                self._rules = rules
            else:
                self._rules = auto_rules(self.equations, U)
        return self._rules

    def adjoint_rules(self):
        if self._adjoint_rules is None:
            self._adjoint_rules = auto_rules(adjoint_system(self, as_written=True).equations, V)
        return self._adjoint_rules

    def specialize(self, bindings):
        """Same system with parameters (or coefficient data) substituted."""
        eqs = [E.substitute(F, bindings) for F in self.equations]
        return self.with_equations(eqs)


def adjoint_system(sys, as_written=False):
    """F*_a = E_{u^a}(v^b F_b).

    The equations must be free of backward shifts unless ``as_written`` is
    set, in which case the Euler operator is applied to the system exactly as
    given (this reproduces adjoints written for centred schemes).
    """
    if not as_written and not sys.is_forward_normalized():
        raise NotForwardNormalizedError(
            "equations contain backward shifts; apply forward_normalize first")
    L = lagrangian(sys, as_written=True)
    eqs = [euler(L, (U, c)) for c in sys.components]
    out = DifferenceSystem(eqs, sys.lattice, sys.components, sys.adjoints,
                           sys.parameters, sys.functions)
    return out


def lagrangian(sys, as_written=False):
    """L = sum_a v^a_0 F_a."""
    if not as_written and not sys.is_forward_normalized():
        raise NotForwardNormalizedError(
            "equations contain backward shifts; apply forward_normalize first")
    L = E.ZERO
    for c, F in zip(sys.components, sys.equations):
        L = L + sys.v(c) * F
    return L


def normalizing_shifts(sys):
    out = []
    for F in sys.equations:
        offs = offsets(F, U)
        if not offs:
            out.append(zero(sys.p))
            continue
        out.append(tuple(max(0, -min(J[i] for J in offs)) for i in range(sys.p)))
    return out


def forward_normalize(sys):
    """Shift every equation by the least J >= 0 removing backward shifts."""
    shifts = normalizing_shifts(sys)
    if not any(any(J) for J in shifts):
        return sys
    eqs = [F.shift(J) for F, J in zip(sys.equations, shifts)]
    solve = [E.dep_key(k[2], add(k[3], J), k[1]) for k, J in zip(sys.solve_for, shifts)]
    return sys.with_equations(eqs, solve)


def relabel_adjoint(e, shifts, sys):
    """Replace v^a_K by v^a_{K+J_a} (compares adjoints of shifted writings)."""
    e = E.as_expr(e)
    images = {}
    for k in e.dep_atoms(V):
        idx = sys.adjoints.index(k[2])
        images[k] = E.dep(k[2], add(k[3], shifts[idx]), V)
    return E.apply_images(e, images)


# -- operators ---------------------------------------------------------------------

class DifferenceOperator:
    """sum_J b_J S_J with normalized, nonzero coefficients."""

    def __init__(self, terms, p):
        self.p = p
        merged = {}
        for J, b in (terms.items() if isinstance(terms, dict) else terms):
            J = tuple(J)
            merged[J] = merged.get(J, E.ZERO) + E.as_expr(b)
        self.terms = {J: b for J, b in sorted(merged.items()) if not b.is_zero()}

    @classmethod
    def multiplier(cls, lam, p):
        return cls({zero(p): lam}, p)

    def __call__(self, f):
        f = E.as_expr(f)
        total = E.ZERO
        for J, b in self.terms.items():
            total = total + b * f.shift(J)
        return total

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, DifferenceOperator) and self.terms == other.terms

    def __repr__(self):
        parts = [f"({b})*S{list(J)}" for J, b in self.terms.items()]
        return "DifferenceOperator(" + " + ".join(parts or ["0"]) + ")"

    def apply_adjoint_to(self, v):
        """B*(v) = sum_J S_{-J}(b_J v)."""
        v = E.as_expr(v)
        total = E.ZERO
        for J, b in self.terms.items():
            total = total + (b * v).shift(neg(J))
        return total


def adjoint_operator(B, check=True):
    """B* = sum_J S_{-J} o b_J, returned in the form sum_K c_K S_K."""
    terms = {neg(J): b.shift(neg(J)) for J, b in B.terms.items()}
    Bs = DifferenceOperator(terms, B.p)
    if check:
        # v B(u) - u B*(v) must be a divergence: every Euler derivative vanishes
        u = E.dep("_u", zero(B.p), U)
        v = E.dep("_v", zero(B.p), V)
        w = v * B(u) - u * Bs(v)
        for fam in ((U, "_u"), (V, "_v")):
            if not E.is_zero(euler(w, fam)):
                raise InternalConsistencyError("adjoint operator identity failed")
    return Bs


def operator_remainder(B, F, v):
    """Flux R with ``v B(F) - B*(v) F = Div R`` (summation by parts)."""
    p = B.p
    R = [E.ZERO] * p
    for J, b in B.terms.items():
        g = (b * v).shift(neg(J)) * F
        for i, w in enumerate(telescope(g, J)):
            R[i] = R[i] + w
    return tuple(R)


def flux_by_parts(L, vec, p):
    """Split pr Y(L) = sum_a Q^a E_{a}(L) + Div W and return W.

    ``vec`` maps families to characteristic components.  Each term
    ``S_K(Q) dL/du_K`` is moved to ``Q S_{-K}(dL/du_K)`` by telescoping
    along the path of :func:`telescope`.
    """
    L = E.as_expr(L)
    W = [E.ZERO] * p
    for k in sorted(L.dep_atoms()):
        q = vec.get((k[1], k[2]))
        if q is None or q.is_zero() or not any(k[3]):
            continue
        h = E.diff(L, k)
        if h.is_zero():
            continue
        g = q * h.shift(neg(k[3]))
        for i, w in enumerate(telescope(g, k[3])):
            W[i] = W[i] + w
    return tuple(W)


# -- reduction on solutions ----------------------------------------------------------

def reduce_with(e, rule_sets, depth=2000):
    """Eliminate atoms with the given rule sets, one set after another.

    Each rule set is a list of :class:`Rule`.  The reduction origin is the
    lower corner of all dependent atoms in ``e``; an atom is replaced by the
    shifted solved form while the shifted stencil stays above the origin.
    """
    e = E.as_expr(e)
    keys = e.dep_atoms()
    if not keys:
        return e
    origin, _ = bounding_box(keys)
    for rules in rule_sets:
        by_family = {r.family: r for r in rules}
        memo = {}
        budget = [depth]

        def nf(key):
            if key in memo:
                return memo[key]
            rule = by_family.get((key[1], key[2]))
            if rule is None or not rule.reducible(key[3], origin):
                memo[key] = None
                return None
            budget[0] -= 1
            if budget[0] < 0:
                raise ReductionDepthError("reduction did not terminate within the depth limit")
            img = rule.image(key[3])
            inner = {}
            for k in img.dep_atoms(rule.family[0], rule.family[1]):
                r = nf(k)
                if r is not None:
                    inner[k] = r
            if inner:
                img = E.apply_images(img, inner)
            memo[key] = img
            return img

        images = {}
        for k in sorted(e.dep_atoms(), reverse=True):
            r = nf(k)
            if r is not None:
                images[k] = r
        if images:
            e = E.apply_images(e, images)
        # atoms introduced by other families can again be reducible
        for _ in range(depth):
            images = {}
            for k in sorted(e.dep_atoms(), reverse=True):
                r = nf(k)
                if r is not None:
                    images[k] = r
            if not images:
                break
            e = E.apply_images(e, images)
        else:
            raise ReductionDepthError("reduction did not reach a fixpoint")
    return e
