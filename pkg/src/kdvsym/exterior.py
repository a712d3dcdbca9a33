"""Exterior algebra of differential forms over a coordinate chart.

Forms carry coefficients from any of the scalar domains in `symkernel`
(Poly, RatFunc, ParamPoly, RadicalFunc); mixed arithmetic promotes through
the operator protocol of those classes.  Index tuples are kept strictly
increasing, with all signs produced by sorting-permutation parity.
"""

from __future__ import annotations

from fractions import Fraction

from . import _kernels as K
from .chart import ChartError, CoordChart
from .symkernel import Poly, RatFunc, coeff_is_zero


class GradeError(ValueError):
    pass


def _normalize_coeff(chart, c):
    if isinstance(c, (int, Fraction)):
        return Poly.const(chart, c)
    return c


class DiffForm:
    """Grade-k exterior form: {strictly increasing k-tuple of indices: coefficient}."""

    __slots__ = ("chart", "grade", "comps")

    def __init__(self, chart: CoordChart, grade: int, comps: dict | None = None):
        if grade < 0:
            raise GradeError("negative grade")
        self.chart = chart
        self.grade = grade
        clean = {}
        for idx, c in (comps or {}).items():
            idx = tuple(idx)
            if len(idx) != grade or list(idx) != sorted(set(idx)):
                raise GradeError(f"component {idx} is not a strictly increasing {grade}-tuple")
            c = _normalize_coeff(chart, c)
            if not coeff_is_zero(c):
                clean[idx] = c
        self.comps = clean

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, chart, grade=0):
        return cls(chart, grade, {})

    @classmethod
    def scalar(cls, chart, coeff):
        return cls(chart, 0, {(): coeff})

    @classmethod
    def d_coord(cls, chart, name):
        return cls(chart, 1, {(chart.index(name),): Poly.const(chart, 1)})

    def is_zero(self):
        return not self.comps

    def coeff(self, idx):
        """Coefficient of a (possibly unsorted) index tuple, with sign."""
        idx = tuple(idx)
        order = sorted(range(len(idx)), key=lambda m: idx[m])
        key = tuple(idx[m] for m in order)
        if len(set(key)) != len(key):
            return Poly.const(self.chart, 0)
        sign = _permutation_sign(order)
        c = self.comps.get(key)
        if c is None:
            return Poly.const(self.chart, 0)
        return c if sign > 0 else -c

    # -- linear structure ------------------------------------------------------

    def _check(self, other):
        if self.chart != other.chart:
            raise ChartError("chart mismatch between forms")
        if self.grade != other.grade:
            raise GradeError(f"grade mismatch: {self.grade} vs {other.grade}")

    def __add__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        self._check(other)
        out = dict(self.comps)
        for idx, c in other.comps.items():
            s = out[idx] + c if idx in out else c
            if coeff_is_zero(s):
                out.pop(idx, None)
            else:
                out[idx] = s
        return DiffForm(self.chart, self.grade, out)

    def __sub__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return DiffForm(self.chart, self.grade, {i: -c for i, c in self.comps.items()})

    def scale(self, c):
        c = _normalize_coeff(self.chart, c)
        return DiffForm(self.chart, self.grade, {i: c * v for i, v in self.comps.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        if self.chart != other.chart or self.grade != other.grade:
            return False
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("DiffForm is unhashable")

    # -- rendering ---------------------------------------------------------------

    def __str__(self):
        if not self.comps:
            return "0"
        names = self.chart.names
        chunks = []
        for idx in sorted(self.comps):
            c = self.comps[idx]
            basis = "^".join(f"d{names[i]}" for i in idx)
            text = str(c)
            neg = text.startswith("-") and "+" not in text and " - " not in text
            if neg:
                text = text[1:]
            one = text == "1"
            multi = (" + " in text) or (" - " in text)
            if not basis:
                body = f"({text})" if multi else text
            elif one:
                body = basis
            elif multi:
                body = f"({text}) {basis}"
            else:
                body = f"{text} {basis}"
            if not chunks:
                chunks.append(f"-{body}" if neg else body)
            else:
                chunks.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(chunks)

    def __repr__(self):
        return f"DiffForm<{self.grade}>({self})"


def _permutation_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


class VectorFieldExpr:
    """Vector field: {coordinate index: coefficient}."""

    __slots__ = ("chart", "comps")

    def __init__(self, chart: CoordChart, comps: dict | None = None):
        self.chart = chart
        clean = {}
        for i, c in (comps or {}).items():
            i = chart.index(i) if isinstance(i, str) else i
            c = _normalize_coeff(chart, c)
            if not coeff_is_zero(c):
                clean[i] = c
        self.comps = clean

    @classmethod
    def basis(cls, chart, name):
        return cls(chart, {chart.index(name): Poly.const(chart, 1)})

    def is_zero(self):
        return not self.comps

    def component(self, name_or_idx):
        i = self.chart.index(name_or_idx) if isinstance(name_or_idx, str) else name_or_idx
        c = self.comps.get(i)
        return c if c is not None else Poly.const(self.chart, 0)

    def apply(self, f):
        """Act as a derivation on a scalar coefficient."""
        out = None
        for i, c in self.comps.items():
            term = c * f.partial(i)
            out = term if out is None else out + term
        return out if out is not None else _zero_like(self.chart, f)

    def __add__(self, other):
        if not isinstance(other, VectorFieldExpr):
            return NotImplemented
        if self.chart != other.chart:
            raise ChartError("chart mismatch between vector fields")
        out = dict(self.comps)
        for i, c in other.comps.items():
            s = out[i] + c if i in out else c
            if coeff_is_zero(s):
                out.pop(i, None)
            else:
                out[i] = s
        return VectorFieldExpr(self.chart, out)

    def __sub__(self, other):
        if not isinstance(other, VectorFieldExpr):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return VectorFieldExpr(self.chart, {i: -c for i, c in self.comps.items()})

    def scale(self, c):
        c = _normalize_coeff(self.chart, c)
        return VectorFieldExpr(self.chart, {i: c * v for i, v in self.comps.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VectorFieldExpr):
            return NotImplemented
        if self.chart != other.chart:
            return False
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("VectorFieldExpr is unhashable")

    def __str__(self):
        if not self.comps:
            return "0"
        names = self.chart.names
        chunks = []
        for i in sorted(self.comps):
            c = self.comps[i]
            text = str(c)
            neg = text.startswith("-") and "+" not in text and " - " not in text
            if neg:
                text = text[1:]
            multi = (" + " in text) or (" - " in text)
            if text == "1":
                body = f"@{names[i]}"
            elif multi:
                body = f"({text})*@{names[i]}"
            else:
                body = f"{text}*@{names[i]}"
            if not chunks:
                chunks.append(f"-{body}" if neg else body)
            else:
                chunks.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(chunks)

    def __repr__(self):
        return f"VectorFieldExpr({self})"


def _zero_like(chart, template):
    """Zero scalar in the same coefficient domain as `template`."""
    return template - template


# -- core operations --------------------------------------------------------------


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    if a.chart != b.chart:
        raise ChartError("chart mismatch in wedge")
    grade = a.grade + b.grade
    if grade > a.chart.dim:
        return DiffForm.zero(a.chart, min(grade, a.chart.dim))
    out: dict = {}
    for I, ca in a.comps.items():
        for J, cb in b.comps.items():
            merged = K.wedge_indices(I, J)
            if merged is None:
                continue
            sign, idx = merged
            term = ca * cb
            if sign < 0:
                term = -term
            if idx in out:
                s = out[idx] + term
                if coeff_is_zero(s):
                    del out[idx]
                else:
                    out[idx] = s
            else:
                out[idx] = term
    return DiffForm(a.chart, grade, out)


def ext_d(a: DiffForm) -> DiffForm:
    """Exterior derivative; d of d is zero."""
    grade = a.grade + 1
    if grade > a.chart.dim:
        return DiffForm.zero(a.chart, a.grade)
    out: dict = {}
    for I, c in a.comps.items():
        for i in range(a.chart.dim):
            dc = c.partial(i)
            if coeff_is_zero(dc):
                continue
            ins = K.insert_index(i, I)
            if ins is None:
                continue
            sign, idx = ins
            term = dc if sign > 0 else -dc
            if idx in out:
                s = out[idx] + term
                if coeff_is_zero(s):
                    del out[idx]
                else:
                    out[idx] = s
            else:
                out[idx] = term
    return DiffForm(a.chart, grade, out)


def interior(v: VectorFieldExpr, a: DiffForm) -> DiffForm:
    """Contraction i_v a, linear in both arguments."""
    if v.chart != a.chart:
        raise ChartError("chart mismatch in interior product")
    if a.grade == 0:
        raise GradeError("interior product of a grade-0 form")
    out: dict = {}
    for I, c in a.comps.items():
        for pos, i in enumerate(I):
            vc = v.comps.get(i)
            if vc is None:
                continue
            term = vc * c
            if pos % 2:
                term = -term
            idx = I[:pos] + I[pos + 1 :]
            if idx in out:
                s = out[idx] + term
                if coeff_is_zero(s):
                    del out[idx]
                else:
                    out[idx] = s
            else:
                out[idx] = term
    return DiffForm(a.chart, a.grade - 1, out)


def lie_derivative(v: VectorFieldExpr, a: DiffForm) -> DiffForm:
    """Lie derivative by Cartan's magic formula L_v = i_v d + d i_v."""
    if v.chart != a.chart:
        raise ChartError("chart mismatch in Lie derivative")
    if a.grade == 0:
        coeff = a.comps.get(())
        if coeff is None:
            return DiffForm.zero(a.chart, 0)
        return DiffForm.scalar(a.chart, v.apply(coeff))
    part1 = interior(v, ext_d(a))
    part2 = ext_d(interior(v, a))
    return part1 + part2


def lie_derivative_transport(v: VectorFieldExpr, a: DiffForm) -> DiffForm:
    """Independent component formula for the Lie derivative.

    L_v(f dX_I) = v(f) dX_I + f * sum_m dX_{i_1} ^ ... ^ d(v^{i_m}) ^ ... ^ dX_{i_k},
    used as the consistency oracle for `lie_derivative`.
    """
    if v.chart != a.chart:
        raise ChartError("chart mismatch in Lie derivative")
    chart = a.chart
    if a.grade == 0:
        return lie_derivative(v, a)
    total = DiffForm.zero(chart, a.grade)
    for I, f in a.comps.items():
        total = total + DiffForm(chart, a.grade, {I: v.apply(f)})
        for pos, i in enumerate(I):
            vc = v.comps.get(i)
            if vc is None:
                continue
            rest = I[:pos] + I[pos + 1 :]
            for j in range(chart.dim):
                dvc = vc.partial(j)
                if coeff_is_zero(dvc):
                    continue
                ins = K.insert_index(j, rest)
                if ins is None:
                    continue
                sign, idx = ins
                # the replaced factor sits at slot `pos`; insert_index signs the
                # landing slot, so the move costs (-1)^pos on top of it
                term = f * dvc
                if pos % 2:
                    sign = -sign
                if sign < 0:
                    term = -term
                total = total + DiffForm(chart, a.grade, {idx: term})
    return total


def proportionality_test(beta: DiffForm, alpha: DiffForm):
    """Decide beta = lambda * alpha; return the RatFunc multiplier or None.

    A zero beta yields the zero multiplier.  The witness is beta_I/alpha_I
    for the first nonzero component of alpha, validated against every other
    component by exact cross-multiplication.
    """
    if alpha.chart != beta.chart:
        raise ChartError("chart mismatch in proportionality test")
    if alpha.grade != beta.grade:
        raise GradeError("grade mismatch in proportionality test")
    chart = alpha.chart
    if beta.is_zero():
        return RatFunc.const(chart, 0)
    if alpha.is_zero():
        return None
    pivot = min(alpha.comps)
    alpha_p = _as_ratfunc(alpha.comps[pivot])
    beta_p = _as_ratfunc(beta.comps.get(pivot, Poly.const(chart, 0)))
    lam = beta_p / alpha_p
    keys = set(alpha.comps) | set(beta.comps)
    zero = Poly.const(chart, 0)
    for idx in keys:
        b = _as_ratfunc(beta.comps.get(idx, zero))
        a = _as_ratfunc(alpha.comps.get(idx, zero))
        if not (b - lam * a).is_zero():
            return None
    return simplify_scalar_multiple(lam)


def simplify_scalar_multiple(r: RatFunc) -> RatFunc:
    """Collapse p/q to a constant when p is a scalar multiple of q."""
    if r.is_zero() or r.is_poly():
        return r
    c = r.num.leading()[1] / r.den.leading()[1]
    if (r.num - c * r.den).is_zero():
        return RatFunc.const(r.chart, c)
    return r


def _as_ratfunc(c):
    if isinstance(c, RatFunc):
        return c
    if isinstance(c, Poly):
        return RatFunc.from_poly(c)
    raise TypeError(f"cannot interpret {type(c).__name__} as a rational function")
