"""Pure-Python implementations of the hot arithmetic kernels.

Everything above this layer (polynomials, forms, determining systems)
funnels through a handful of inner loops: merging sparse coefficient maps,
multiplying sparse polynomials, shifting exponents for partial derivatives,
wedge index bookkeeping, and exact Gauss-Jordan elimination over Q.

A polynomial is a dict mapping exponent tuples to Fraction; a linear form
(used for ansatz parameters) is a dict mapping parameter id to Fraction;
a matrix row is a dict mapping column index to Fraction.  All functions are
pure: inputs are never mutated.

A compiled twin of this module (`_ckernel`, built from Cython) provides the
same surface; `kdvsym._kernels` picks one at import time.
"""

from __future__ import annotations

from fractions import Fraction

ZERO = Fraction(0)


def map_add(a: dict, b: dict) -> dict:
    """Merge two {key: Fraction} maps by addition, dropping zero entries."""
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    out = dict(a)
    for k, v in b.items():
        s = out.get(k, ZERO) + v
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def map_sub(a: dict, b: dict) -> dict:
    if not b:
        return dict(a)
    out = dict(a)
    for k, v in b.items():
        s = out.get(k, ZERO) - v
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def map_neg(a: dict) -> dict:
    return {k: -v for k, v in a.items()}


def map_scale(a: dict, c: Fraction) -> dict:
    if not c:
        return {}
    return {k: v * c for k, v in a.items()}


def poly_mul(a: dict, b: dict) -> dict:
    """Multiply two sparse polynomials {exponent tuple: Fraction}."""
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            s = out.get(e, ZERO) + ca * cb
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return out


def poly_partial(a: dict, i: int) -> dict:
    """Exact partial derivative with respect to variable index i."""
    out: dict = {}
    for e, c in a.items():
        k = e[i]
        if k:
            e2 = e[:i] + (k - 1,) + e[i + 1 :]
            s = out.get(e2, ZERO) + c * k
            if s:
                out[e2] = s
            else:
                out.pop(e2, None)
    return out


def poly_eval(a: dict, point: tuple) -> Fraction:
    """Evaluate at a tuple of Fractions."""
    total = ZERO
    for e, c in a.items():
        term = c
        for k, v in zip(e, point):
            if k:
                term *= v**k
        total += term
    return total


def nested_add(a: dict, b: dict) -> dict:
    """Merge {exponent: linear-form} maps, adding linear forms pointwise."""
    if not a:
        return {k: dict(v) for k, v in b.items()}
    out = {k: dict(v) for k, v in a.items()}
    for e, lf in b.items():
        cur = out.get(e)
        if cur is None:
            out[e] = dict(lf)
            continue
        s = map_add(cur, lf)
        if s:
            out[e] = s
        else:
            del out[e]
    return out


def nested_scale(a: dict, c: Fraction) -> dict:
    if not c:
        return {}
    return {e: {k: v * c for k, v in lf.items()} for e, lf in a.items()}


def ppoly_mul_poly(a: dict, b: dict) -> dict:
    """Multiply a parameter-linear polynomial by a plain polynomial.

    `a` maps exponent tuple -> {param id: Fraction}; `b` is a plain
    polynomial map.  Parameters stay strictly linear.
    """
    if not a or not b:
        return {}
    out: dict = {}
    for ea, lf in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            cur = out.get(e)
            scaled = {k: v * cb for k, v in lf.items()}
            if cur is None:
                out[e] = scaled
            else:
                s = map_add(cur, scaled)
                if s:
                    out[e] = s
                else:
                    del out[e]
    return out


def ppoly_partial(a: dict, i: int) -> dict:
    out: dict = {}
    for e, lf in a.items():
        k = e[i]
        if not k:
            continue
        e2 = e[:i] + (k - 1,) + e[i + 1 :]
        scaled = {p: v * k for p, v in lf.items()}
        cur = out.get(e2)
        if cur is None:
            out[e2] = scaled
        else:
            s = map_add(cur, scaled)
            if s:
                out[e2] = s
            else:
                del out[e2]
    return out


def wedge_indices(I: tuple, J: tuple):
    """Merge two strictly increasing index tuples.

    Returns (sign, merged tuple) where sign is the parity of the sorting
    permutation, or None when the tuples share an index (the wedge dies).
    """
    if not I:
        return 1, J
    if not J:
        return 1, I
    merged = []
    sign = 1
    i = j = 0
    ni, nj = len(I), len(J)
    while i < ni and j < nj:
        a, b = I[i], J[j]
        if a == b:
            return None
        if a < b:
            merged.append(a)
            i += 1
        else:
            # b jumps over the remaining entries of I
            if (ni - i) & 1:
                sign = -sign
            merged.append(b)
            j += 1
    merged.extend(I[i:])
    merged.extend(J[j:])
    return sign, tuple(merged)


def insert_index(i: int, I: tuple):
    """Insert index i into a strictly increasing tuple with its sign.

    Returns (sign, tuple) or None if i is already present.
    """
    pos = 0
    for pos, existing in enumerate(I):
        if existing == i:
            return None
        if existing > i:
            return (1 if pos % 2 == 0 else -1), I[:pos] + (i,) + I[pos:]
    n = len(I)
    return (1 if n % 2 == 0 else -1), I + (i,)


def rref(rows: list, ncols: int):
    """Exact reduced row echelon form of sparse rows over Q.

    Pivot selection is deterministic: columns are scanned left to right and
    the first remaining row with a nonzero entry in the column is used.
    Returns (new rows, pivot column list); zero rows are dropped.
    """
    work = [dict(r) for r in rows if r]
    pivots = []
    pivot_rows = []
    for col in range(ncols):
        piv = None
        for idx, row in enumerate(work):
            if row.get(col):
                piv = idx
                break
        if piv is None:
            continue
        row = work.pop(piv)
        c = row[col]
        if c != 1:
            row = {k: v / c for k, v in row.items()}
        for other in pivot_rows:
            f = other.get(col)
            if f:
                for k, v in row.items():
                    s = other.get(k, ZERO) - f * v
                    if s:
                        other[k] = s
                    else:
                        other.pop(k, None)
        remaining = []
        for other in work:
            f = other.get(col)
            if f:
                for k, v in row.items():
                    s = other.get(k, ZERO) - f * v
                    if s:
                        other[k] = s
                    else:
                        other.pop(k, None)
            if other:
                remaining.append(other)
        work = remaining
        pivot_rows.append(row)
        pivots.append(col)
    return pivot_rows, pivots
