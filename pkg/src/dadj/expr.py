"""Exact rational-function expressions over lattice atoms.

An :class:`Expr` is always stored in canonical form: a quotient ``num/den``
of two sparse integer polynomials (see :mod:`dadj._pykernel`) with

* no common polynomial factor and no common integer content,
* a denominator free of parity-sign atoms,
* a positive leading denominator coefficient.

Two expressions are equal as rational functions of their atoms exactly when
their canonical forms are equal, so ``==`` is semantic equality.

Atoms are identified by hashable, ordered keys:

=========  ==================================  =========================
kind       key                                 meaning
=========  ==================================  =========================
LATTICE    ``(0, i, name)``                    lattice symbol n^i
PARAM      ``(1, name)``                       shift-invariant parameter
FUNC       ``(2, name, lattice_names, shift)``  coefficient function a(n+J)
SIGN       ``(3, i, name)``                    (-1)^(n^i)
DEP        ``(4, cls, name, shift)``           u^name_J (cls 0) or v (cls 1)
=========  ==================================  =========================

A parity sign ``(-1)^(c0 + sum c_i n^i)`` is the product of ``(-1)^c0`` and
the SIGN atoms of the directions with odd ``c_i``.
"""

from fractions import Fraction
from functools import lru_cache
from math import gcd
import random

from . import kernel as K
from .errors import (EvaluationSingularError, InternalConsistencyError,
                     MalformedExpressionError, SubstitutionSingularError)

LATTICE, PARAM, FUNC, SIGN, DEP = 0, 1, 2, 3, 4
U, V = 0, 1

_ONE = {(): 1}


def lattice_key(i, name):
    return (LATTICE, i, name)


def param_key(name):
    return (PARAM, name)


def func_key(name, shift, lattice_names):
    return (FUNC, name, tuple(lattice_names), tuple(shift))


def sign_key(i, name):
    return (SIGN, i, name)


def dep_key(name, shift, cls=U):
    return (DEP, cls, name, tuple(shift))


class Expr:
    """Canonical rational function; construct through the helpers below or
    arithmetic, never by calling ``Expr(num, den)`` with unreduced data."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den):
        self.num = num
        self.den = den
        self._hash = None

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return _canon(K.poly_add(self.num, other.num), self.den)
        num = K.poly_add(K.poly_mul(self.num, other.den), K.poly_mul(other.num, self.den))
        return _canon(num, K.poly_mul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return Expr(K.poly_scale(self.num, -1), self.den)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not self.num or not other.num:
            return ZERO
        if other.is_constant() and self.den == _ONE and other.den == _ONE:
            (c,) = other.num.values()
            return Expr(K.poly_scale(self.num, c), _ONE)
        return _canon(K.poly_mul(self.num, other.num), K.poly_mul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            raise MalformedExpressionError("division by the zero polynomial")
        return _canon(K.poly_mul(self.num, other.den), K.poly_mul(self.den, other.num))

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, k):
        if not isinstance(k, int):
            raise MalformedExpressionError(f"non-integer exponent {k!r}")
        if k == 0:
            return ONE
        if k < 0:
            return (ONE / self) ** (-k)
        if k == 1:
            return self
        num = K.poly_pow(self.num, k)
        den = K.poly_pow(self.den, k)
        if _has_sign(num):
            # sign atoms reduce mod 2 and can merge terms; recanonicalize
            return _canon(num, den)
        return _fix_sign(num, den)

    # -- comparison ------------------------------------------------------
    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()), frozenset(self.den.items())))
        return self._hash

    def __repr__(self):
        from .parser import render
        return f"Expr({render(self)!r})"

    def __str__(self):
        from .parser import render
        return render(self)

    # -- inspection ------------------------------------------------------
    def atoms(self):
        """Set of atom keys occurring in numerator or denominator."""
        out = set()
        for p in (self.num, self.den):
            for m in p:
                for k, _ in m:
                    out.add(k)
        return out

    def dep_atoms(self, cls=None, name=None):
        return {k for k in self.atoms()
                if k[0] == DEP and (cls is None or k[1] == cls)
                and (name is None or k[2] == name)}

    def is_constant(self):
        return all(m == () for m in self.num) and all(m == () for m in self.den)

    def is_zero(self):
        """Symbolic zero test on the canonical numerator (no cross-check)."""
        return not self.num

    def as_fraction(self):
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return Fraction(self.num.get((), 0), self.den[()])

    def is_polynomial(self):
        return self.den == _ONE

    def shift(self, J):
        """Apply the composite shift S_J (see :func:`dadj.lattice.shift`)."""
        J = tuple(J)
        if not any(J):
            return self
        return _fix_sign(K.poly_shift(self.num, J), K.poly_shift(self.den, J))

    def numerator(self):
        return Expr(self.num, _ONE)

    def denominator(self):
        return Expr(self.den, _ONE)


def _has_sign(p):
    for m in p:
        for k, _ in m:
            if k[0] == SIGN:
                return True
    return False


def _fix_sign(num, den):
    if den[max(den)] < 0:
        num = K.poly_scale(num, -1)
        den = K.poly_scale(den, -1)
    return Expr(num, den)


def _coerce(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return const(x)
    return NotImplemented


def as_expr(x):
    e = _coerce(x)
    if e is NotImplemented:
        raise TypeError(f"cannot convert {type(x).__name__} to Expr")
    return e


# -- canonicalization ------------------------------------------------------

def _content(p):
    g = 0
    for v in p.values():
        g = gcd(g, v)
        if g == 1:
            break
    return g


def _flip(p, key):
    out = {}
    for m, v in p.items():
        for k, _ in m:
            if k == key:
                v = -v
                break
        out[m] = v
    return out


def _rationalize(num, den):
    # (A + B s)(A - B s) = A^2 - B^2, so multiplying by sign conjugates
    # clears every sign atom from the denominator.
    keys = sorted({k for m in den for k, _ in m if k[0] == SIGN})
    for key in keys:
        conj = _flip(den, key)
        num = K.poly_mul(num, conj)
        den = K.poly_mul(den, conj)
        if not den:
            raise MalformedExpressionError(
                "denominator vanishes on part of the lattice (parity-sign zero divisor)")
    return num, den


def _monomial_cancel(num, den):
    common = None
    for p in (den, num):
        for m in p:
            exps = {k: e for k, e in m if k[0] != SIGN}
            if common is None:
                common = exps
            else:
                common = {k: min(e, exps[k]) for k, e in common.items() if k in exps}
            if not common:
                return num, den
    if not common:
        return num, den

    def divide(p):
        out = {}
        for m, v in p.items():
            nm = []
            for k, e in m:
                c = common.get(k, 0)
                if e - c:
                    nm.append((k, e - c))
            out[tuple(nm)] = v
        return out

    return divide(num), divide(den)


@lru_cache(maxsize=64)
def _zz_ring(k):
    from sympy.polys.domains import ZZ
    from sympy.polys.rings import ring
    return ring(",".join(f"x{i}" for i in range(k)), ZZ)[0]


def _to_sympy(R, index, p):
    k = len(index)
    data = {}
    for m, v in p.items():
        vec = [0] * k
        for key, e in m:
            vec[index[key]] = e
        data[tuple(vec)] = v
    return R.from_dict(data)


def _from_sympy(gens, f):
    out = {}
    for exps, v in f.items():
        out[tuple((gens[i], e) for i, e in enumerate(exps) if e)] = int(v)
    return out


def _poly_cancel(num, den):
    gens = sorted({k for p in (num, den) for m in p for k, _ in m})
    index = {k: i for i, k in enumerate(gens)}
    R = _zz_ring(len(gens))
    h, cn, cd = _to_sympy(R, index, num).cofactors(_to_sympy(R, index, den))
    if h.is_ground:
        return num, den
    hp = _from_sympy(gens, h)
    new_num = _from_sympy(gens, cn)
    new_den = _from_sympy(gens, cd)
    # independent check of the external gcd: cofactors must rebuild the inputs
    if K.poly_mul(hp, new_num) != num or K.poly_mul(hp, new_den) != den:
        raise InternalConsistencyError("polynomial gcd cofactors do not reproduce inputs")
    return new_num, new_den


def _canon(num, den):
    if not den:
        raise MalformedExpressionError("division by the zero polynomial")
    if not num:
        return ZERO
    if _has_sign(den):
        num, den = _rationalize(num, den)
    if len(den) == 1 and () in den:
        pass
    else:
        num, den = _monomial_cancel(num, den)
        if len(den) > 1:
            num, den = _poly_cancel(num, den)
    g = gcd(_content(num), _content(den))
    if g > 1:
        num = {m: v // g for m, v in num.items()}
        den = {m: v // g for m, v in den.items()}
    return _fix_sign(num, den)


def from_polys(num, den=None):
    """Canonical expression from raw kernel polynomials."""
    return _canon(dict(num), dict(den) if den is not None else dict(_ONE))


# -- constructors ----------------------------------------------------------

def const(value):
    q = Fraction(value)
    if not q:
        return ZERO
    return Expr({(): q.numerator}, {(): q.denominator})


ZERO = Expr({}, dict(_ONE))
ONE = Expr(dict(_ONE), dict(_ONE))


def atom(key):
    return Expr({((key, 1),): 1}, dict(_ONE))


def lattice_symbol(i, name):
    return atom(lattice_key(i, name))


def param(name):
    return atom(param_key(name))


def func(name, shift, lattice_names):
    return atom(func_key(name, shift, lattice_names))


def dep(name, shift, cls=U):
    return atom(dep_key(name, shift, cls))


def parity(coeffs, names, offset=0):
    """(-1)^(offset + sum coeffs[i]*n^i) as an expression."""
    e = ONE if offset % 2 == 0 else -ONE
    for i, c in enumerate(coeffs):
        if c % 2:
            e = e * atom(sign_key(i, names[i]))
    return e


def key_of(a):
    """Accept an atom key or a single-atom expression and return the key."""
    if isinstance(a, tuple):
        return a
    if isinstance(a, Expr) and a.den == _ONE and len(a.num) == 1:
        ((m, c),) = a.num.items()
        if c == 1 and len(m) == 1 and m[0][1] == 1:
            return m[0][0]
    raise ValueError(f"{a!r} is not a single atom")


# -- operations --------------------------------------------------------------

def normalize(e):
    """Canonical form of ``e``; expressions are kept canonical, so this is the
    identity on :class:`Expr` and converts plain numbers."""
    return as_expr(e)


def diff(e, a):
    """Partial derivative treating every distinct atom as independent."""
    key = key_of(a)
    if key[0] == SIGN:
        raise ValueError("parity-sign atoms are not differentiation variables")
    dn = K.poly_diff(e.num, key)
    dd = K.poly_diff(e.den, key)
    if not dd:
        if not dn:
            return ZERO
        return _canon(dn, e.den)
    num = K.poly_add(K.poly_mul(dn, e.den), K.poly_mul(e.num, dd), -1)
    return _canon(num, K.poly_mul(e.den, e.den))


def _compose(p, images, cache):
    top = {}
    for m in p:
        for k, e in m:
            if k in images and e > top.get(k, 0):
                top[k] = e

    def power(k, which, e):
        ck = (k, which, e)
        if ck not in cache:
            img = images[k]
            cache[ck] = K.poly_pow(img.num if which == 0 else img.den, e)
        return cache[ck]

    total = {}
    for m, c in p.items():
        term = {(): c}
        kept = []
        present = {}
        for k, e in m:
            if k in images:
                present[k] = e
                term = K.poly_mul(term, power(k, 0, e))
            else:
                kept.append((k, e))
        for k, t in top.items():
            if t - present.get(k, 0):
                term = K.poly_mul(term, power(k, 1, t - present.get(k, 0)))
        if kept:
            term = K.poly_mul(term, {tuple(kept): 1})
        total = K.poly_add(total, term)
    den = dict(_ONE)
    for k, e in top.items():
        den = K.poly_mul(den, power(k, 1, e))
    return total, den


def apply_images(e, images):
    """Simultaneously replace atom keys by expressions."""
    images = {k: v for k, v in images.items() if k in e.atoms()}
    if not images:
        return e
    cache = {}
    nn, nd = _compose(e.num, images, cache)
    dn, dd = _compose(e.den, images, cache)
    if not dn:
        raise SubstitutionSingularError("substitution makes a denominator identically zero")
    try:
        return _canon(K.poly_mul(nn, dd), K.poly_mul(nd, dn))
    except MalformedExpressionError as exc:
        raise SubstitutionSingularError(str(exc)) from exc


def substitute(e, bindings, propagate=True):
    """Simultaneous substitution followed by normalization.

    ``bindings`` maps atoms (keys or single-atom expressions) to expressions
    or numbers.  A binding for an unshifted dependent atom, e.g. ``v[0]``, is
    propagated to every shifted instance ``v[J]`` by shifting its image,
    unless ``propagate`` is false or ``v[J]`` has its own binding.  A lattice
    symbol bound to an integer also fixes the matching parity signs.
    """
    e = as_expr(e)
    exact = {}
    families = {}
    lattice_ints = {}
    for a, img in bindings.items():
        key = key_of(a)
        img = as_expr(img)
        if propagate and key[0] == DEP and not any(key[3]):
            families[(key[1], key[2])] = img
        exact[key] = img
        if key[0] == LATTICE and img.is_constant():
            q = img.as_fraction()
            if q.denominator == 1:
                lattice_ints[key[1]] = q.numerator
    images = {}
    for k in e.atoms():
        if k in exact:
            images[k] = exact[k]
        elif k[0] == DEP and (k[1], k[2]) in families:
            images[k] = families[(k[1], k[2])].shift(k[3])
        elif k[0] == SIGN and k[1] in lattice_ints:
            images[k] = ONE if lattice_ints[k[1]] % 2 == 0 else -ONE
    return apply_images(e, images)


def _values_for(e, point):
    values = {}
    lattice_ints = {}
    for k, v in point.items():
        key = key_of(k) if not isinstance(k, tuple) else k
        values[key] = v
        if key[0] == LATTICE:
            lattice_ints[key[1]] = v
    for k in e.atoms():
        if k in values:
            continue
        if k[0] == SIGN and k[1] in lattice_ints:
            values[k] = 1 if lattice_ints[k[1]] % 2 == 0 else -1
        else:
            raise ValueError(f"atom {k!r} is not assigned")
    return values


def evaluate(e, point):
    """Exact value of ``e`` at ``point`` (atom -> number).

    Parity signs are derived from the lattice symbols when not given.  Raises
    :class:`EvaluationSingularError` if the denominator vanishes.
    """
    e = as_expr(e)
    values = _values_for(e, point)
    d = K.poly_eval(e.den, values)
    if d == 0:
        raise EvaluationSingularError("denominator vanishes", expr=e.denominator())
    n = K.poly_eval(e.num, values)
    return Fraction(n) / d if isinstance(d, int) else n / d


def sample_point(keys, rng):
    """Random rational values for ``keys``; signs follow sampled lattice ints."""
    point = {}
    lattice_ints = {}
    for k in sorted(keys):
        if k[0] == LATTICE:
            n = rng.randint(-6, 6)
            point[k] = n
            lattice_ints[k[1]] = n
    for k in sorted(keys):
        kind = k[0]
        if kind == LATTICE:
            continue
        if kind == SIGN:
            if k[1] not in lattice_ints:
                lattice_ints[k[1]] = rng.randint(-6, 6)
            point[k] = 1 if lattice_ints[k[1]] % 2 == 0 else -1
        else:
            num = rng.choice([i for i in range(-9, 10) if i])
            point[k] = Fraction(num, rng.randint(1, 5))
    return point


def is_zero(e, samples=8, seed=0):
    """True iff ``e`` is identically zero as a rational function.

    The symbolic verdict (canonical numerator is empty) is confirmed by
    evaluating at ``samples`` random rational points; a nonzero canonical
    form that vanishes at every sample indicates a normalization bug and
    raises :class:`InternalConsistencyError`.
    """
    e = as_expr(e)
    if not e.num:
        return True
    rng = random.Random(seed)
    keys = e.atoms()
    hits = 0
    misses = 0
    while hits < samples:
        point = sample_point(keys, rng)
        d = K.poly_eval(e.den, point)
        if d == 0:
            misses += 1
            if misses > 50 * samples:
                raise InternalConsistencyError("could not find a regular sample point")
            continue
        if K.poly_eval(e.num, point) != 0:
            return False
        hits += 1
    raise InternalConsistencyError(
        f"canonical form {e} is nonzero but vanished at {samples} random points")
