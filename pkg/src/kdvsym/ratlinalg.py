"""Exact sparse linear algebra over the rationals: RREF, nullspace, spans."""

from __future__ import annotations

from fractions import Fraction

from . import _kernels as K
from .symkernel import as_fraction

QQ = Fraction


class MatrixQ:
    """Row-major sparse matrix of exact rationals; stored entries are nonzero."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows=None):
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            self.rows = [{} for _ in range(nrows)]
        else:
            clean = []
            for r in rows:
                clean.append({j: as_fraction(v) for j, v in r.items() if v})
            if len(clean) != nrows:
                raise ValueError("row count mismatch")
            self.rows = clean

    @classmethod
    def from_dense(cls, data):
        rows = [
            {j: as_fraction(v) for j, v in enumerate(row) if v} for row in data
        ]
        ncols = max((len(row) for row in data), default=0)
        return cls(len(rows), ncols, rows)

    @classmethod
    def from_vectors(cls, vectors, ncols: int):
        """Stack vectors ({index: value} dicts or dense sequences) as rows."""
        rows = []
        for v in vectors:
            if isinstance(v, dict):
                rows.append({j: as_fraction(c) for j, c in v.items() if c})
            else:
                rows.append({j: as_fraction(c) for j, c in enumerate(v) if c})
        return cls(len(rows), ncols, rows)

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i].get(j, QQ(0))

    def dense(self):
        return [[self.entry(i, j) for j in range(self.ncols)] for i in range(self.nrows)]

    def mul_vector(self, vec) -> list:
        """Matrix times a dense vector."""
        out = []
        for row in self.rows:
            out.append(sum((c * vec[j] for j, c in row.items()), QQ(0)))
        return out

    def __eq__(self, other):
        return (
            isinstance(other, MatrixQ)
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __repr__(self):
        return f"MatrixQ({self.nrows}x{self.ncols})"


def rref(m: MatrixQ):
    """Reduced row echelon form.

    Returns (MatrixQ, pivot column list, rank); deterministic by the fixed
    column order and first-nonzero pivot rule.  Zero rows are dropped.
    """
    rows, pivots = K.rref(m.rows, m.ncols)
    return MatrixQ(len(rows), m.ncols, rows), pivots, len(pivots)


def nullspace(m: MatrixQ) -> list[dict]:
    """Canonical basis of the right kernel.

    Each free column, taken in increasing order, yields one basis vector with
    a unit entry in that column.
    """
    reduced, pivots, _ = rref(m)
    pivot_set = set(pivots)
    basis = []
    for j in range(m.ncols):
        if j in pivot_set:
            continue
        vec = {j: QQ(1)}
        for row, pcol in zip(reduced.rows, pivots):
            c = row.get(j)
            if c:
                vec[pcol] = -c
        basis.append(vec)
    return basis


def span_equal(a, b, ncols: int) -> bool:
    """True iff two collections of vectors have identical row spans."""
    ra, _, _ = rref(MatrixQ.from_vectors(list(a), ncols))
    rb, _, _ = rref(MatrixQ.from_vectors(list(b), ncols))
    return ra.rows == rb.rows


def span_contains(a, vectors, ncols: int) -> bool:
    """True iff every given vector lies in the span of `a`."""
    base = list(a)
    ra, _, rank_a = rref(MatrixQ.from_vectors(base, ncols))
    rb, _, rank_b = rref(MatrixQ.from_vectors(base + list(vectors), ncols))
    return rank_a == rank_b


def solve(m: MatrixQ, rhs) -> list | None:
    """One exact solution of m x = rhs, or None when inconsistent.

    Free variables are set to zero; deterministic.
    """
    aug_rows = []
    for row, b in zip(m.rows, rhs):
        r = dict(row)
        b = as_fraction(b)
        if b:
            r[m.ncols] = b
        aug_rows.append(r)
    reduced, pivots = K.rref(aug_rows, m.ncols + 1)
    x = [QQ(0)] * m.ncols
    for row, p in zip(reduced, pivots):
        if p == m.ncols:
            return None
        x[p] = row.get(m.ncols, QQ(0))
    return x


def intersect_spans(a, b, ncols: int) -> list[dict]:
    """Basis of the intersection of two row spans."""
    base_a = [dict(v) if isinstance(v, dict) else {j: as_fraction(c) for j, c in enumerate(v) if c} for v in a]
    base_b = [dict(v) if isinstance(v, dict) else {j: as_fraction(c) for j, c in enumerate(v) if c} for v in b]
    if not base_a or not base_b:
        return []
    # columns of the combination problem: coefficients on a-vectors then b-vectors
    na, nb = len(base_a), len(base_b)
    rows = []
    for j in range(ncols):
        row = {}
        for k, v in enumerate(base_a):
            c = v.get(j)
            if c:
                row[k] = c
        for k, v in enumerate(base_b):
            c = v.get(j)
            if c:
                row[na + k] = -c
        rows.append(row)
    combos = nullspace(MatrixQ(ncols, na + nb, rows))
    out = []
    for combo in combos:
        vec: dict = {}
        for k, coef in combo.items():
            if k >= na:
                continue
            for j, c in base_a[k].items():
                s = vec.get(j, QQ(0)) + coef * c
                if s:
                    vec[j] = s
                else:
                    vec.pop(j, None)
        if vec:
            out.append(vec)
    reduced, _, _ = rref(MatrixQ.from_vectors(out, ncols))
    return reduced.rows
