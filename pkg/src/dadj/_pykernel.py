"""Pure-Python sparse polynomial kernels.

A polynomial is a ``dict`` mapping a monomial to a nonzero ``int``
coefficient.  A monomial is a tuple of ``(key, exponent)`` pairs sorted by
key; the empty tuple is the unit monomial.  Keys are tuples whose first
entry is the atom kind (see :mod:`dadj.expr`).  Parity-sign atoms (kind
``SIGN``) square to one, so their exponents are reduced mod 2.

The compiled module ``_ckernel`` implements the same functions with the
same signatures; :mod:`dadj.kernel` picks one at import time.
"""

from math import comb

LATTICE = 0
SIGN = 3

BACKEND = "python"


def mono_mul(a, b):
    la = len(a)
    lb = len(b)
    if not la:
        return b
    if not lb:
        return a
    out = []
    i = j = 0
    while i < la and j < lb:
        ka, ea = a[i]
        kb, eb = b[j]
        if ka == kb:
            e = ea + eb
            if ka[0] == SIGN:
                e &= 1
            if e:
                out.append((ka, e))
            i += 1
            j += 1
        elif ka < kb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    if i < la:
        out.extend(a[i:])
    if j < lb:
        out.extend(b[j:])
    return tuple(out)


def poly_add(p, q, c=1):
    """Return ``p + c*q``."""
    out = dict(p)
    for m, v in q.items():
        w = out.get(m, 0) + c * v
        if w:
            out[m] = w
        else:
            out.pop(m, None)
    return out


def poly_scale(p, c):
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


def poly_mul(p, q):
    if len(p) > len(q):
        p, q = q, p
    out = {}
    get = out.get
    for ma, va in p.items():
        for mb, vb in q.items():
            m = mono_mul(ma, mb)
            out[m] = get(m, 0) + va * vb
    return {m: v for m, v in out.items() if v}


def poly_pow(p, k):
    result = {(): 1}
    base = p
    while k:
        if k & 1:
            result = poly_mul(result, base)
        k >>= 1
        if k:
            base = poly_mul(base, base)
    return result


def poly_diff(p, key):
    out = {}
    for m, v in p.items():
        for idx, (k, e) in enumerate(m):
            if k == key:
                if e == 1:
                    nm = m[:idx] + m[idx + 1:]
                else:
                    nm = m[:idx] + ((k, e - 1),) + m[idx + 1:]
                out[nm] = out.get(nm, 0) + v * e
                break
    return {m: v for m, v in out.items() if v}


def poly_eval(p, values):
    """Evaluate with ``values[key]`` for every key; exact for int/Fraction."""
    total = 0
    for m, v in p.items():
        t = v
        for k, e in m:
            t = t * values[k] ** e
        total += t
    return total


def _shifted_key(key, shift):
    old = key[-1]
    return key[:-1] + (tuple([a + b for a, b in zip(old, shift)]),)


def _binomial_poly(key, e, offset):
    # (x + offset)^e
    if not offset:
        return {((key, e),): 1}
    out = {}
    for k in range(e + 1):
        c = comb(e, k) * offset ** (e - k)
        out[((key, k),) if k else ()] = c
    return out


def poly_shift(p, shift):
    """Translate every shifted atom by ``shift`` and every lattice symbol
    ``n^i`` to ``n^i + shift[i]``; sign atoms flip for odd ``shift[i]``."""
    out = {}
    for m, v in p.items():
        coeff = v
        rest = []
        lat = None
        for k, e in m:
            kind = k[0]
            if kind == LATTICE:
                j = shift[k[1]]
                if j:
                    if lat is None:
                        lat = []
                    lat.append((k, e, j))
                else:
                    rest.append((k, e))
            elif kind == SIGN:
                if shift[k[1]] & 1:
                    coeff = -coeff
                rest.append((k, e))
            elif kind > SIGN or kind == 2:
                rest.append((_shifted_key(k, shift), e))
            else:
                rest.append((k, e))
        rest = tuple(rest)
        if lat is None:
            out[rest] = out.get(rest, 0) + coeff
            continue
        factor = {(): coeff}
        for k, e, j in lat:
            factor = poly_mul(factor, _binomial_poly(k, e, j))
        for fm, fv in factor.items():
            nm = mono_mul(fm, rest)
            out[nm] = out.get(nm, 0) + fv
    return {m: v for m, v in out.items() if v}
