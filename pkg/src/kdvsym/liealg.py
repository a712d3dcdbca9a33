"""Lie-algebraic analysis of vector-field bases: brackets, structure
constants, derived series, and solvability."""

from __future__ import annotations

from fractions import Fraction

from .chart import ChartError
from .exterior import VectorFieldExpr
from .ratlinalg import MatrixQ, nullspace, rref, solve
from .symkernel import Poly, QQ


class BracketEscapeError(ValueError):
    """A bracket of basis elements left the basis span."""

    def __init__(self, i: int, j: int):
        super().__init__(f"bracket of basis elements {i} and {j} escapes the span")
        self.pair = (i, j)


def bracket(a: VectorFieldExpr, b: VectorFieldExpr) -> VectorFieldExpr:
    """Lie bracket [a, b]^i = a(b^i) - b(a^i)."""
    if a.chart != b.chart:
        raise ChartError("chart mismatch in bracket")
    chart = a.chart
    comps = {}
    for i in set(a.comps) | set(b.comps):
        term = None
        bc = b.comps.get(i)
        if bc is not None:
            term = a.apply(bc)
        ac = a.comps.get(i)
        if ac is not None:
            t2 = b.apply(ac)
            term = -t2 if term is None else term - t2
        if term is not None and not term.is_zero():
            comps[i] = term
    return VectorFieldExpr(chart, comps)


def _coefficient_frame(fields):
    """Fixed (coordinate, monomial) frame spanning the union of supports."""
    keys = set()
    for f in fields:
        for i, c in f.comps.items():
            if not isinstance(c, Poly):
                raise TypeError("coefficient frame needs polynomial components")
            for e in c.terms:
                keys.add((i, e))
    return sorted(keys)


def field_to_vector(field: VectorFieldExpr, frame) -> dict:
    index = {key: k for k, key in enumerate(frame)}
    vec = {}
    for i, c in field.comps.items():
        for e, coeff in c.terms.items():
            k = index.get((i, e))
            if k is None:
                raise ValueError("field leaves the coefficient frame")
            vec[k] = coeff
    return vec


class BracketTable:
    """Structure constants c_ij^k for i < j of an n-dimensional algebra."""

    def __init__(self, n: int, constants: dict | None = None):
        self.n = n
        self.constants = {}
        for (i, j), vec in (constants or {}).items():
            if not (0 <= i < j < n):
                raise ValueError("structure constants must be indexed with i < j")
            vec = tuple(Fraction(v) for v in vec)
            if len(vec) != n:
                raise ValueError("structure constant vector has wrong length")
            if any(vec):
                self.constants[(i, j)] = vec
        self._zero = (QQ(0),) * n

    def c(self, i: int, j: int):
        """Coefficients of [e_i, e_j] in the basis, any i, j."""
        if i == j:
            return self._zero
        if i < j:
            return self.constants.get((i, j), self._zero)
        return tuple(-v for v in self.constants.get((j, i), self._zero))

    def bracket_vectors(self, u, v):
        """Coordinates of [u, v] for coordinate vectors u, v (dicts or dense)."""
        du = u if isinstance(u, dict) else {k: c for k, c in enumerate(u) if c}
        dv = v if isinstance(v, dict) else {k: c for k, c in enumerate(v) if c}
        out = [QQ(0)] * self.n
        for i, ui in du.items():
            for j, vj in dv.items():
                cij = self.c(i, j)
                f = ui * vj
                if f:
                    for k, ck in enumerate(cij):
                        if ck:
                            out[k] += f * ck
        return out

    def to_matrix_rows(self):
        """Dense n x n table of coefficient vectors (for reports)."""
        return [[list(self.c(i, j)) for j in range(self.n)] for i in range(self.n)]


def structure_constants(fields: list[VectorFieldExpr]) -> BracketTable:
    """Expand each pairwise bracket in the given basis, exactly.

    Raises BracketEscapeError (with the offending pair) when some bracket is
    not a rational combination of the basis.
    """
    n = len(fields)
    if n == 0:
        return BracketTable(0)
    brackets = {}
    for i in range(n):
        for j in range(i + 1, n):
            brackets[(i, j)] = bracket(fields[i], fields[j])
    frame = _coefficient_frame(list(fields) + list(brackets.values()))
    columns = [field_to_vector(f, frame) for f in fields]
    m = MatrixQ(
        len(frame),
        n,
        [
            {k: col.get(r) for k, col in enumerate(columns) if col.get(r)}
            for r in range(len(frame))
        ],
    )
    table = {}
    for (i, j), br in brackets.items():
        rhs_vec = field_to_vector(br, frame)
        rhs = [rhs_vec.get(r, QQ(0)) for r in range(len(frame))]
        x = solve(m, rhs)
        if x is None:
            raise BracketEscapeError(i, j)
        table[(i, j)] = x
    return BracketTable(n, table)


def jacobi_check(table: BracketTable) -> bool:
    """True iff the cyclic structure-constant contractions all vanish."""
    n = table.n
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                total = [QQ(0)] * n
                for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                    cab = table.c(a, b)
                    inner = table.bracket_vectors({m: v for m, v in enumerate(cab) if v}, {c: QQ(1)})
                    for l in range(n):
                        total[l] += inner[l]
                if any(total):
                    return False
    return True


def derived_series(table: BracketTable) -> list[int]:
    """Dimensions of g, g', g'', ... until stabilization; ends in 0 iff solvable."""
    n = table.n
    dims = [n]
    current = [{i: QQ(1)} for i in range(n)]
    while dims[-1] != 0:
        products = []
        for a in range(len(current)):
            for b in range(a + 1, len(current)):
                w = table.bracket_vectors(current[a], current[b])
                vec = {k: c for k, c in enumerate(w) if c}
                if vec:
                    products.append(vec)
        reduced, _, rank = rref(MatrixQ.from_vectors(products, n))
        dims.append(rank)
        if rank == dims[-2]:
            break  # stabilized at a nonzero dimension: not solvable
        current = list(reduced.rows)
    return dims


def is_solvable(table: BracketTable) -> bool:
    return derived_series(table)[-1] == 0
