# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of `pykernel`: the same hot kernels with C-level loops.

Coefficients remain exact (`fractions.Fraction`), so the speedup comes from
removing interpreter dispatch in the merge/multiply/elimination loops, not
from changing arithmetic.  Behaviour must match `pykernel` bit for bit; the
conformance tests drive both lanes with identical inputs.
"""

from fractions import Fraction

ZERO = Fraction(0)


def map_add(dict a, dict b):
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    cdef dict out = dict(a)
    for k, v in b.items():
        cur = out.get(k)
        if cur is None:
            out[k] = v
        else:
            s = cur + v
            if s:
                out[k] = s
            else:
                del out[k]
    return out


def map_sub(dict a, dict b):
    if not b:
        return dict(a)
    cdef dict out = dict(a)
    for k, v in b.items():
        cur = out.get(k)
        if cur is None:
            out[k] = -v
        else:
            s = cur - v
            if s:
                out[k] = s
            else:
                del out[k]
    return out


def map_neg(dict a):
    cdef dict out = {}
    for k, v in a.items():
        out[k] = -v
    return out


def map_scale(dict a, c):
    if not c:
        return {}
    cdef dict out = {}
    for k, v in a.items():
        out[k] = v * c
    return out


def poly_mul(dict a, dict b):
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    cdef dict out = {}
    cdef tuple e
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple([x + y for x, y in zip(<tuple>ea, <tuple>eb)])
            term = ca * cb
            cur = out.get(e)
            if cur is None:
                out[e] = term
            else:
                s = cur + term
                if s:
                    out[e] = s
                else:
                    del out[e]
    return out


def poly_partial(dict a, Py_ssize_t i):
    cdef dict out = {}
    cdef tuple e, e2
    cdef long k
    for key, c in a.items():
        e = <tuple>key
        k = e[i]
        if k:
            e2 = e[:i] + (k - 1,) + e[i + 1:]
            term = c * k
            cur = out.get(e2)
            if cur is None:
                out[e2] = term
            else:
                s = cur + term
                if s:
                    out[e2] = s
                else:
                    del out[e2]
    return out


def poly_eval(dict a, tuple point):
    total = ZERO
    cdef tuple e
    cdef long k
    cdef Py_ssize_t idx
    for key, c in a.items():
        e = <tuple>key
        term = c
        for idx in range(len(e)):
            k = e[idx]
            if k:
                term = term * point[idx] ** k
        total = total + term
    return total


def nested_add(dict a, dict b):
    cdef dict out = {}
    if not a:
        for k, v in b.items():
            out[k] = dict(<dict>v)
        return out
    for k, v in a.items():
        out[k] = dict(<dict>v)
    for e, lf in b.items():
        cur = out.get(e)
        if cur is None:
            out[e] = dict(<dict>lf)
            continue
        s = map_add(<dict>cur, <dict>lf)
        if s:
            out[e] = s
        else:
            del out[e]
    return out


def nested_scale(dict a, c):
    if not c:
        return {}
    cdef dict out = {}
    cdef dict inner
    for e, lf in a.items():
        inner = {}
        for k, v in (<dict>lf).items():
            inner[k] = v * c
        out[e] = inner
    return out


def ppoly_mul_poly(dict a, dict b):
    if not a or not b:
        return {}
    cdef dict out = {}
    cdef tuple e
    cdef dict scaled
    for ea, lf in a.items():
        for eb, cb in b.items():
            e = tuple([x + y for x, y in zip(<tuple>ea, <tuple>eb)])
            scaled = {}
            for k, v in (<dict>lf).items():
                scaled[k] = v * cb
            cur = out.get(e)
            if cur is None:
                out[e] = scaled
            else:
                s = map_add(<dict>cur, scaled)
                if s:
                    out[e] = s
                else:
                    del out[e]
    return out


def ppoly_partial(dict a, Py_ssize_t i):
    cdef dict out = {}
    cdef tuple e, e2
    cdef long k
    cdef dict scaled
    for key, lf in a.items():
        e = <tuple>key
        k = e[i]
        if not k:
            continue
        e2 = e[:i] + (k - 1,) + e[i + 1:]
        scaled = {}
        for p, v in (<dict>lf).items():
            scaled[p] = v * k
        cur = out.get(e2)
        if cur is None:
            out[e2] = scaled
        else:
            s = map_add(<dict>cur, scaled)
            if s:
                out[e2] = s
            else:
                del out[e2]
    return out


def wedge_indices(tuple I, tuple J):
    if not I:
        return 1, J
    if not J:
        return 1, I
    cdef list merged = []
    cdef int sign = 1
    cdef Py_ssize_t i = 0, j = 0, ni = len(I), nj = len(J)
    cdef long a, b
    while i < ni and j < nj:
        a = I[i]
        b = J[j]
        if a == b:
            return None
        if a < b:
            merged.append(a)
            i += 1
        else:
            if (ni - i) & 1:
                sign = -sign
            merged.append(b)
            j += 1
    while i < ni:
        merged.append(I[i])
        i += 1
    while j < nj:
        merged.append(J[j])
        j += 1
    return sign, tuple(merged)


def insert_index(long i, tuple I):
    cdef Py_ssize_t pos
    cdef long existing
    for pos in range(len(I)):
        existing = I[pos]
        if existing == i:
            return None
        if existing > i:
            return (1 if pos % 2 == 0 else -1), I[:pos] + (i,) + I[pos:]
    cdef Py_ssize_t n = len(I)
    return (1 if n % 2 == 0 else -1), I + (i,)


def rref(list rows, Py_ssize_t ncols):
    cdef list work = []
    cdef list pivots = []
    cdef list pivot_rows = []
    cdef dict row, other
    cdef Py_ssize_t col, idx
    for r in rows:
        if r:
            work.append(dict(<dict>r))
    for col in range(ncols):
        piv = -1
        for idx in range(len(work)):
            row = <dict>work[idx]
            c = row.get(col)
            if c is not None and c:
                piv = idx
                break
        if piv < 0:
            continue
        row = <dict>work.pop(piv)
        c = row[col]
        if c != 1:
            scaled = {}
            for k, v in row.items():
                scaled[k] = v / c
            row = scaled
        for prow in pivot_rows:
            other = <dict>prow
            f = other.get(col)
            if f is not None and f:
                for k, v in row.items():
                    cur = other.get(k)
                    if cur is None:
                        other[k] = -f * v
                    else:
                        s = cur - f * v
                        if s:
                            other[k] = s
                        else:
                            del other[k]
        remaining = []
        for wrow in work:
            other = <dict>wrow
            f = other.get(col)
            if f is not None and f:
                for k, v in row.items():
                    cur = other.get(k)
                    if cur is None:
                        other[k] = -f * v
                    else:
                        s = cur - f * v
                        if s:
                            other[k] = s
                        else:
                            del other[k]
            if other:
                remaining.append(other)
        work = remaining
        pivot_rows.append(row)
        pivots.append(col)
    return pivot_rows, pivots
