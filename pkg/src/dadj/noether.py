"""Conservation laws from extended generators, self-adjointness, transfer
to the original system and triviality."""

from dataclasses import dataclass, field

from . import expr as E
from . import lattice as LC
from .errors import (InternalConsistencyError, InvalidSubstitutionError,
                     MissingRemainderError, NotDecomposableError,
                     NotForwardNormalizedError)
from .expr import U, V
from .symmetry import reduce_mod


@dataclass
class ConservationLaw:
    """Fluxes P with Div P = 0 on solutions of ``system``.

    ``combined`` says whether the certified system includes the adjoint
    equations.  ``certified`` records the symbolic check of that claim.
    """

    fluxes: tuple
    system: object
    combined: bool = True
    remainder: tuple = None
    provenance: dict = field(default_factory=dict)
    certified: bool = None

    def __post_init__(self):
        self.fluxes = tuple(E.as_expr(P) for P in self.fluxes)

    @property
    def p(self):
        return len(self.fluxes)

    def divergence(self):
        return LC.divergence(self.fluxes)

    def certify(self):
        self.certified = E.is_zero(reduce_mod(self.system, self.divergence(), self.combined))
        return self.certified


@dataclass
class SelfAdjointness:
    classification: str
    witness: dict = None
    checked: list = field(default_factory=list)

    @property
    def depends_on_u(self):
        return bool(self.witness) and any(
            E.as_expr(v).dep_atoms(U) for v in self.witness.values())


# -- fluxes ------------------------------------------------------------------------

def _parameter_term(Y, L):
    total = E.ZERO
    for name, rho in Y.parameters.items():
        key = E.param_key(name)
        if key in L.atoms():
            total = total + rho * E.diff(L, key)
    return total


def _flux(sys, Y, L, R, route):
    if R is None:
        raise MissingRemainderError("no remainder R: the variational criterion was not established")
    W = LC.flux_by_parts(L, Y.vector(), sys.p)
    P = tuple(w - r for w, r in zip(W, R))
    law = ConservationLaw(P, sys, True, tuple(R),
                          {"characteristic": Y.name, "route": route})
    if Y.parameters:
        law.provenance["warning"] = (
            "parameter components contribute v*rho*dF/dparam to Div P; "
            "the law holds only where that term vanishes on solutions")
    law.certify()
    return law


def noether_flux(sys, Y, R=None):
    """Discrete Noether flux for the Lagrangian v^a F_a.

    P^i = sum over atoms u_K of L of the path-telescoped terms
    S_T(Q) S_{T-K}(dL/du_K) minus R^i.  For one lattice dimension this is
    exactly sum_{J >= 1} Q_{J-1} S_{-1} E_{u_J}(L) - R.
    """
    if not sys.is_forward_normalized():
        raise NotForwardNormalizedError("noether_flux needs a forward-normalized system")
    L = LC.lagrangian(sys)
    return _flux(sys, Y, L, Y.remainder if R is None else R, "noether")


def direct_flux(sys, Y, R=None):
    """Flux by summation by parts of pr Y(L) for the system as written."""
    L = LC.lagrangian(sys, as_written=True)
    law = _flux(sys, Y, L, Y.remainder if R is None else R, "direct")
    # pr Y(L) = Q.F* + Q*.F + rho.dL/dparam + Div W must hold identically
    vec = Y.vector()
    adj = LC.adjoint_system(sys, as_written=True).equations
    rhs = LC.divergence(tuple(P + r for P, r in zip(law.fluxes, law.remainder)))
    for comp, Fs, F in zip(sys.components, adj, sys.equations):
        rhs = rhs + vec[(U, comp)] * Fs + vec.get((V, sys.adjoint_key(comp)), E.ZERO) * F
    rhs = rhs + _parameter_term(Y, L)
    if not E.is_zero(LC.prolong_apply(Y, L) - rhs):
        raise NotDecomposableError("summation by parts did not reproduce pr Y(L)")
    return law


def noether_formula(L, Y, p, R=None):
    """Fluxes from the higher-Euler-operator formula, term by term.

    P^i = sum_{a, J >= 1_i} Q^a_{J-1_i} S_{-1_i}(E_{u^a_J} L) - R^i.
    Agrees with :func:`noether_flux` for p = 1; for p >= 2 it counts
    mixed shifts more than once (kept for comparison only).
    """
    L = E.as_expr(L)
    vec = Y.vector()
    P = []
    for i in range(p):
        one = LC.unit(i, p)
        total = E.ZERO
        for (cls, name), q in vec.items():
            if cls != U:
                continue
            Js = {k[3] for k in L.dep_atoms(cls, name)}
            # all J >= 1_i below some atom of L
            cand = set()
            for K in Js:
                cand.update(_below(K, one))
            for J in sorted(cand):
                he = LC.higher_euler(L, (cls, name), J)
                if not he.is_zero():
                    total = total + q.shift(LC.sub(J, one)) * he.shift(LC.neg(one))
        P.append(total - (R[i] if R is not None else E.ZERO))
    return tuple(P)


def _below(K, low):
    if any(k < l for k, l in zip(K, low)):
        return []
    out = [()]
    for k, l in zip(K, low):
        out = [o + (j,) for o in out for j in range(l, k + 1)]
    return out


# -- self-adjointness ----------------------------------------------------------------

def substitution_menu(sys):
    """Built-in witness candidates v = f(n, [u]) for single-component systems."""
    if sys.q != 1:
        return []
    c = sys.components[0]
    u = sys.u(c)
    p = sys.p
    vkey = E.key_of(sys.v(c))
    menu = [("v=u", u), ("v=1", E.ONE), ("v=1/u", 1 / u), ("v=1/u^2", 1 / u ** 2)]
    if p >= 1:
        menu.append(("v=(-1)^n1*u", E.parity([1] + [0] * (p - 1), sys.lattice) * u))
    menu.append(("v=(-1)^(sum n)", E.parity([1] * p, sys.lattice)))
    menu.append(("v=(-1)^(sum n)*u", E.parity([1] * p, sys.lattice) * u))
    return [(label, {vkey: f}) for label, f in menu]


def strict_witness(sys):
    return {E.key_of(sys.v(c)): sys.u(c) for c in sys.components}


def witness_holds(sys, bindings):
    """True iff the adjoint system vanishes on solutions after ``bindings``."""
    adj = LC.adjoint_system(sys, as_written=True)
    for eq in adj.equations:
        try:
            sub = E.substitute(eq, bindings)
        except E.SubstitutionSingularError:
            return False
        if not E.is_zero(reduce_mod(sys, sub)):
            return False
    return True


def _kind(sys, bindings):
    if bindings == strict_witness(sys):
        return "strict"
    for img in bindings.values():
        img = E.as_expr(img)
        if any(k[0] in (E.LATTICE, E.SIGN, E.FUNC) for k in img.atoms()):
            return "weak"
    return "quasi"


def classify_self_adjointness(sys, candidates=()):
    """Strict test first, then the given candidates, then the built-in menu."""
    tried = []
    queue = [("v=u", strict_witness(sys))]
    queue += [(label, dict(b)) for label, b in candidates]
    queue += substitution_menu(sys)
    seen = []
    for label, bindings in queue:
        if bindings in seen:
            continue
        seen.append(bindings)
        if all(E.as_expr(v).is_zero() for v in bindings.values()):
            continue
        ok = witness_holds(sys, bindings)
        tried.append((label, ok))
        if ok:
            return SelfAdjointness(_kind(sys, bindings), bindings, tried)
    return SelfAdjointness("none-found", None, tried)


def check_o2de_condition(a1, a2, a3):
    """a3(n+2) = a1(n), a2(n+1) = a2(n) and a1(n) = a3(n), identically."""
    a1, a2, a3 = (E.as_expr(a) for a in (a1, a2, a3))
    return (E.is_zero(a3.shift((2,)) - a1) and E.is_zero(a2.shift((1,)) - a2)
            and E.is_zero(a1 - a3))


# -- transfer, triviality, symmetry action ---------------------------------------------

def _split_bindings(bindings):
    params = {k: v for k, v in bindings.items() if E.key_of(k)[0] == E.PARAM}
    rest = {k: v for k, v in bindings.items() if E.key_of(k)[0] != E.PARAM}
    return params, rest


def transfer(cl, bindings, label=""):
    """Eliminate v from a combined-system law with a verified adjoint solution.

    Parameter bindings (e.g. beta = alpha) specialize the system first.
    """
    params, vb = _split_bindings(bindings)
    sys = cl.system.specialize(params) if params else cl.system
    if not witness_holds(sys, vb):
        raise InvalidSubstitutionError(
            f"substitution {label or ''} does not solve the adjoint system".replace("  ", " "))
    P = [E.substitute(E.substitute(f, params), vb) for f in cl.fluxes]
    law = ConservationLaw(P, sys, False, None, dict(cl.provenance, substitution=label))
    if not law.certify():
        raise InternalConsistencyError("transferred flux is not conserved on solutions")
    return law


def is_trivial(cl):
    """Every flux component vanishes on solutions of the certified system."""
    return all(E.is_zero(reduce_mod(cl.system, P, cl.combined)) for P in cl.fluxes)


def apply_symmetry_to_law(Q, cl, name=""):
    """pr X applied to each flux; X must be a symmetry of the certified system."""
    P = [LC.prolong_apply(Q, f) for f in cl.fluxes]
    law = ConservationLaw(P, cl.system, cl.combined, None,
                          dict(cl.provenance, applied=(cl.provenance.get("applied", ()) + (Q.name,))))
    if name:
        law.provenance["name"] = name
    if not law.certify():
        raise InternalConsistencyError(f"{Q.name or 'Q'} is not a symmetry of the certified system")
    return law


def equivalent(cl, fluxes, combined=None):
    """P ~ P' iff P - P' (or P + P') vanishes on solutions componentwise."""
    combined = cl.combined if combined is None else combined
    fluxes = [E.as_expr(f) for f in fluxes]
    for sign in (1, -1):
        if all(E.is_zero(reduce_mod(cl.system, a - sign * b, combined))
               for a, b in zip(cl.fluxes, fluxes)):
            return sign
    return 0
