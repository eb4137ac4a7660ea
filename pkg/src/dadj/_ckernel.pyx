# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled sparse polynomial kernels; same contract as ``_pykernel``."""

from math import comb

DEF LATTICE = 0
DEF FUNC = 2
DEF SIGN = 3

BACKEND = "cython"


cpdef tuple mono_mul(tuple a, tuple b):
    cdef Py_ssize_t la = len(a), lb = len(b), i = 0, j = 0
    cdef list out
    cdef tuple pa, pb, ka, kb
    cdef long e
    if la == 0:
        return b
    if lb == 0:
        return a
    out = []
    while i < la and j < lb:
        pa = <tuple>a[i]
        pb = <tuple>b[j]
        ka = <tuple>pa[0]
        kb = <tuple>pb[0]
        if ka == kb:
            e = <long>pa[1] + <long>pb[1]
            if <long>ka[0] == SIGN:
                e &= 1
            if e:
                out.append((ka, e))
            i += 1
            j += 1
        elif ka < kb:
            out.append(pa)
            i += 1
        else:
            out.append(pb)
            j += 1
    while i < la:
        out.append(a[i])
        i += 1
    while j < lb:
        out.append(b[j])
        j += 1
    return tuple(out)


cpdef dict poly_add(dict p, dict q, c=1):
    cdef dict out = dict(p)
    cdef tuple m
    for m, v in q.items():
        w = out.get(m, 0) + c * v
        if w:
            out[m] = w
        else:
            out.pop(m, None)
    return out


cpdef dict poly_scale(dict p, c):
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


cpdef dict poly_mul(dict p, dict q):
    cdef dict out = {}
    cdef tuple ma, mb, m
    if len(p) > len(q):
        p, q = q, p
    for ma, va in p.items():
        for mb, vb in q.items():
            m = mono_mul(ma, mb)
            w = out.get(m)
            if w is None:
                out[m] = va * vb
            else:
                out[m] = w + va * vb
    return {m: v for m, v in out.items() if v}


cpdef dict poly_pow(dict p, long k):
    cdef dict result = {(): 1}
    cdef dict base = p
    while k:
        if k & 1:
            result = poly_mul(result, base)
        k >>= 1
        if k:
            base = poly_mul(base, base)
    return result


cpdef dict poly_diff(dict p, tuple key):
    cdef dict out = {}
    cdef tuple m, nm, pair
    cdef Py_ssize_t idx, n
    cdef long e
    for m, v in p.items():
        n = len(m)
        for idx in range(n):
            pair = <tuple>m[idx]
            if pair[0] == key:
                e = pair[1]
                if e == 1:
                    nm = m[:idx] + m[idx + 1:]
                else:
                    nm = m[:idx] + ((key, e - 1),) + m[idx + 1:]
                out[nm] = out.get(nm, 0) + v * e
                break
    return {m: v for m, v in out.items() if v}


cpdef poly_eval(dict p, dict values):
    cdef tuple m, pair
    total = 0
    for m, v in p.items():
        t = v
        for pair in m:
            t = t * values[pair[0]] ** pair[1]
        total += t
    return total


cdef tuple _shifted_key(tuple key, tuple shift):
    cdef tuple old = <tuple>key[len(key) - 1]
    cdef Py_ssize_t i, n = len(old)
    cdef list new = [0] * n
    for i in range(n):
        new[i] = old[i] + shift[i]
    return key[:len(key) - 1] + (tuple(new),)


cdef dict _binomial_poly(tuple key, long e, long offset):
    cdef dict out = {}
    cdef long k
    if offset == 0:
        return {((key, e),): 1}
    for k in range(e + 1):
        out[((key, k),) if k else ()] = comb(e, k) * (<object>offset) ** (e - k)
    return out


cpdef dict poly_shift(dict p, tuple shift):
    cdef dict out = {}
    cdef dict factor
    cdef tuple m, k, pair, rest_t, fm, nm
    cdef list rest, lat
    cdef long kind, e, j
    for m, v in p.items():
        coeff = v
        rest = []
        lat = None
        for pair in m:
            k = <tuple>pair[0]
            e = pair[1]
            kind = k[0]
            if kind == LATTICE:
                j = shift[k[1]]
                if j:
                    if lat is None:
                        lat = []
                    lat.append((k, e, j))
                else:
                    rest.append(pair)
            elif kind == SIGN:
                if shift[k[1]] & 1:
                    coeff = -coeff
                rest.append(pair)
            elif kind > SIGN or kind == FUNC:
                rest.append((_shifted_key(k, shift), e))
            else:
                rest.append(pair)
        rest_t = tuple(rest)
        if lat is None:
            out[rest_t] = out.get(rest_t, 0) + coeff
            continue
        factor = {(): coeff}
        for k, e, j in lat:
            factor = poly_mul(factor, _binomial_poly(k, e, j))
        for fm, fv in factor.items():
            nm = mono_mul(fm, rest_t)
            out[nm] = out.get(nm, 0) + fv
    return {m: v for m, v in out.items() if v}
