"""Distributions, Frobenius tests, integrating factors, first integrals.

Distributions are handled through annihilator 1-forms.  The complete
integrability test for a single 1-form is the wedge criterion omega ^
d(omega) = 0; for several forms the involutivity test d(omega^i) ^ omega^1
^ ... ^ omega^{n-k} = 0 per form.  A commuting symmetry basis turns the
annihilator into closed 1-forms via the inverse of the pairing matrix
Z_ij = omega^i(v_j), whose line integrals are first integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield
from fractions import Fraction

from .chart import ChartError, CoordChart
from .exterior import (
    DiffForm,
    VectorFieldExpr,
    ext_d,
    interior,
    lie_derivative,
    wedge,
)
from .ratlinalg import MatrixQ, rref
from .symkernel import Poly, QQ, RadicalFunc, RatFunc, as_fraction


class DistributionError(ValueError):
    pass


@dataclass
class Distribution:
    """A tangent distribution given by generators, annihilators, or both."""

    chart: CoordChart
    fields: list = dfield(default_factory=list)
    forms: list = dfield(default_factory=list)

    def __post_init__(self):
        for v in self.fields:
            for omega in self.forms:
                pairing = interior(v, omega)
                coeff = pairing.comps.get(())
                if coeff is not None and not coeff.is_zero():
                    raise DistributionError(
                        "annihilator forms must vanish on the generating fields"
                    )


def frobenius_1form(omega: DiffForm):
    """The wedge criterion for a single annihilator form.

    Returns (is_completely_integrable, witness) where the witness is the
    3-form omega ^ d(omega); the distribution is completely integrable iff
    the witness vanishes identically.
    """
    if omega.grade != 1:
        raise DistributionError("the wedge criterion applies to 1-forms")
    witness = wedge(omega, ext_d(omega))
    return witness.is_zero(), witness


def _generic_point_rank(forms, chart) -> int:
    points = (
        tuple(QQ(k + 2, 2 * k + 3) for k in range(chart.dim)),
        tuple(QQ(-(k + 1), k + 4) for k in range(chart.dim)),
        tuple(QQ(2 * k + 1, 3) for k in range(chart.dim)),
    )
    best = 0
    for pt in points:
        rows = []
        try:
            for omega in forms:
                row = {}
                for (i,), c in omega.comps.items():
                    val = c.eval(pt)
                    if val:
                        row[i] = val
                rows.append(row)
        except ZeroDivisionError:
            continue
        _, _, rank = rref(MatrixQ.from_vectors(rows, chart.dim))
        best = max(best, rank)
    return best


def involutivity(forms: list) -> list[bool]:
    """Per-form verdicts of d(omega^i) ^ omega^1 ^ ... ^ omega^{n-k} = 0.

    The forms must be pointwise independent (checked at generic rational
    points); all verdicts true is the complete-integrability criterion.
    """
    if not forms:
        raise DistributionError("no annihilator forms given")
    chart = forms[0].chart
    for omega in forms:
        if omega.grade != 1:
            raise DistributionError("annihilators must be 1-forms")
        if omega.chart != chart:
            raise ChartError("annihilator forms on different charts")
    if _generic_point_rank(forms, chart) < len(forms):
        raise DistributionError("annihilator forms are dependent")
    wedge_all = None
    for omega in forms:
        wedge_all = omega if wedge_all is None else wedge(wedge_all, omega)
    return [wedge(ext_d(omega), wedge_all).is_zero() for omega in forms]


def _solve_ratfunc_combination(targets, basis, chart):
    """Solve target = sum_j c_j * basis_j with RatFunc coefficients c_j.

    `targets` and `basis` are 1-forms.  Gaussian elimination over the
    rational-function field; returns the coefficient list or None.
    """
    keys = sorted({k for omega in basis + [targets] for k in omega.comps})
    rows = []
    rhs = []
    zero = RatFunc.const(chart, 0)
    for key in keys:
        rows.append([_as_rf(omega.comps.get(key), chart) for omega in basis])
        rhs.append(_as_rf(targets.comps.get(key), chart))
    n = len(basis)
    # forward elimination with exact rational-function pivots
    pivot_rows = []
    used = [False] * len(rows)
    col_of = []
    for col in range(n):
        pidx = None
        for r, row in enumerate(rows):
            if not used[r] and not row[col].is_zero():
                pidx = r
                break
        if pidx is None:
            col_of.append(None)
            continue
        used[pidx] = True
        col_of.append(pidx)
        piv = rows[pidx][col]
        for r, row in enumerate(rows):
            if r == pidx or row[col].is_zero():
                continue
            factor = row[col] / piv
            rows[r] = [a - factor * b for a, b in zip(row, rows[pidx])]
            rhs[r] = rhs[r] - factor * rhs[pidx]
    coeffs = [zero] * n
    for col in range(n - 1, -1, -1):
        pidx = col_of[col]
        if pidx is None:
            continue
        acc = rhs[pidx]
        for j in range(col + 1, n):
            if not rows[pidx][j].is_zero():
                acc = acc - rows[pidx][j] * coeffs[j]
        coeffs[col] = acc / rows[pidx][col]
    # consistency: rows without pivots must have zero residual
    for r, row in enumerate(rows):
        if used[r]:
            continue
        residual = rhs[r]
        for j in range(n):
            if not row[j].is_zero():
                residual = residual - row[j] * coeffs[j]
        if not residual.is_zero():
            return None
    return coeffs


def _as_rf(c, chart):
    if c is None:
        return RatFunc.const(chart, 0)
    if isinstance(c, RatFunc):
        return c
    if isinstance(c, Poly):
        return RatFunc.from_poly(c)
    raise TypeError("rational-function coefficients required")


def sym_of_distribution(v: VectorFieldExpr, dist: Distribution):
    """Symmetry criterion: L_v omega^i stays in the annihilator span.

    Returns (verdict, per-form multiplier lists or None).
    """
    if not dist.forms:
        raise DistributionError("distribution needs annihilator forms")
    chart = dist.chart
    witnesses = []
    for omega in dist.forms:
        L = lie_derivative(v, omega)
        coeffs = _solve_ratfunc_combination(L, dist.forms, chart)
        if coeffs is None:
            return False, None
        witnesses.append(coeffs)
    return True, witnesses


def z_matrix(dist: Distribution, fields: list):
    """Pairing matrix Z_ij = omega^i(v_j) against a symmetry basis, its
    inverse, and the barred forms.

    The rows of Z^{-1} recombine the annihilators into candidate closed
    forms; each barred form's exact closedness is checked and reported.
    """
    forms = dist.forms
    if not forms or len(forms) != len(fields):
        raise DistributionError("need as many annihilator forms as fields")
    chart = dist.chart
    k = len(forms)
    z = [
        [_scalar_of(interior(v, omega), chart) for v in fields]
        for omega in forms
    ]
    zinv = _invert_scalar_matrix(z, chart)
    barred = []
    closed = []
    for i in range(k):
        acc = None
        for j in range(k):
            term = forms[j].scale(zinv[i][j])
            acc = term if acc is None else acc + term
        barred.append(acc)
        closed.append(ext_d(acc).is_zero())
    return z, barred, closed


def _scalar_of(form0: DiffForm, chart):
    c = form0.comps.get(())
    if c is None:
        return RatFunc.const(chart, 0)
    if isinstance(c, Poly):
        return RatFunc.from_poly(c)
    return c


def _invert_scalar_matrix(z, chart):
    """Gauss-Jordan inverse over the scalar field (RatFunc or RadicalFunc)."""
    k = len(z)
    work = [list(row) for row in z]
    one_like = None
    for row in work:
        for c in row:
            one_like = c
            break
        if one_like is not None:
            break
    identity = []
    for i in range(k):
        row = []
        for j in range(k):
            if isinstance(one_like, RadicalFunc):
                row.append(RadicalFunc.lift(QQ(1 if i == j else 0), one_like.radicand))
            else:
                row.append(RatFunc.const(chart, QQ(1 if i == j else 0)))
        identity.append(row)
    for col in range(k):
        pidx = None
        for r in range(col, k):
            if not work[r][col].is_zero():
                pidx = r
                break
        if pidx is None:
            raise DistributionError("pairing matrix is identically singular")
        work[col], work[pidx] = work[pidx], work[col]
        identity[col], identity[pidx] = identity[pidx], identity[col]
        piv = work[col][col]
        work[col] = [c / piv for c in work[col]]
        identity[col] = [c / piv for c in identity[col]]
        for r in range(k):
            if r == col or work[r][col].is_zero():
                continue
            f = work[r][col]
            work[r] = [a - f * b for a, b in zip(work[r], work[col])]
            identity[r] = [a - f * b for a, b in zip(identity[r], identity[col])]
    return identity


# -- numeric first integrals -----------------------------------------------------


@dataclass
class FirstIntegralSpec:
    """A closed 1-form, a base point, and quadrature settings."""

    form: DiffForm
    base_point: tuple
    tol: float = 1e-10
    closed_checked: bool = False


def adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 30) -> float:
    """Classic adaptive Simpson quadrature to the given absolute tolerance."""
    if a == b:
        return 0.0

    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def rec(lo, hi, flo, fmid, fhi, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = simpson(lo, mid, flo, flm, fmid)
        right = simpson(mid, hi, fmid, frm, fhi)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return rec(lo, mid, flo, flm, fmid, left, eps / 2.0, depth + 1) + rec(
            mid, hi, fmid, frm, fhi, right, eps / 2.0, depth + 1
        )

    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = simpson(a, b, fa, fm, fb)
    return rec(a, b, fa, fm, fb, whole, tol, 0)


def _coeff_eval_float(c, point):
    if isinstance(c, (Poly, RatFunc, RadicalFunc)):
        return c.eval_float(point)
    raise TypeError("cannot evaluate coefficient numerically")


def first_integral_numeric(spec: FirstIntegralSpec, point, waypoints=None) -> float:
    """Line integral of the closed form along an axis-parallel polyline.

    The default path changes one coordinate at a time, in chart order, from
    the base point to the target; explicit intermediate `waypoints` may be
    supplied to dodge singularities.
    """
    form = spec.form
    if form.grade != 1:
        raise DistributionError("first integrals integrate 1-forms")
    chart = form.chart
    pts = [tuple(float(x) for x in spec.base_point)]
    for w in waypoints or []:
        pts.append(tuple(float(x) for x in w))
    pts.append(tuple(float(x) for x in point))
    total = 0.0
    for start, end in zip(pts, pts[1:]):
        current = list(start)
        for i in range(chart.dim):
            if end[i] == current[i]:
                continue
            coeff = form.comps.get((i,))
            if coeff is not None:

                def integrand(s, _i=i, _coeff=coeff, _cur=tuple(current)):
                    p = list(_cur)
                    p[_i] = s
                    return _coeff_eval_float(_coeff, p)

                total += adaptive_simpson(integrand, current[i], end[i], spec.tol)
            current[i] = end[i]
    return total


@dataclass
class ConstancyReport:
    spec: FirstIntegralSpec
    samples: list  # (y, v, phi)
    max_drift: float
    truncated_at: float | None = None


def kdv_first_integral(
    c,
    c1,
    c2,
    v0,
    y_max: float = 2.0,
    steps: int = 4000,
    samples: int = 41,
    quad_tol: float = 1e-10,
):
    """First integral of the traveling-wave reduction and its constancy.

    Builds the closed form dy - dv/sqrt(c v^2 + 2 c1 v + 2 c2 - v^3/3) from
    the translation symmetry, integrates the once-integrated profile
    equation v'' = -v^2/2 + c v + c1 with a classical fixed-step RK4 from
    (v0, +sqrt(Q(v0))), and reports the drift of the line integral along the
    trajectory.  The window is truncated (and reported) at turning points.
    """
    c, c1, c2 = as_fraction(c), as_fraction(c1), as_fraction(c2)
    chart = CoordChart(("y", "v"))
    v = Poly.var(chart, "v")
    radicand = c * v * v + 2 * c1 * v + 2 * c2 - v * v * v / 3
    sqrtq = RadicalFunc.sqrt(radicand)
    omega = DiffForm(
        chart,
        1,
        {
            (chart.index("v"),): RadicalFunc.lift(QQ(1), radicand),
            (chart.index("y"),): -sqrtq,
        },
    )
    sym = VectorFieldExpr.basis(chart, "y")
    pairing = _scalar_of_radical(interior(sym, omega))
    barred = omega.scale(pairing.inverse())
    closed = ext_d(barred).is_zero()

    q0 = radicand.eval_float((0.0, float(v0)))
    if q0 <= 0.0:
        raise ValueError(f"radicand is {q0} <= 0 at the starting value {v0}")

    def accel(vv: float) -> float:
        return -0.5 * vv * vv + float(c) * vv + float(c1)

    h = y_max / steps
    vv, pp = float(v0), math.sqrt(q0)
    trajectory = [(0.0, vv)]
    truncated_at = None
    for n in range(steps):
        k1v, k1p = pp, accel(vv)
        k2v, k2p = pp + 0.5 * h * k1p, accel(vv + 0.5 * h * k1v)
        k3v, k3p = pp + 0.5 * h * k2p, accel(vv + 0.5 * h * k2v)
        k4v, k4p = pp + h * k3p, accel(vv + h * k3v)
        vv = vv + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        pp = pp + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        y = (n + 1) * h
        if pp <= 0.0 or radicand.eval_float((y, vv)) <= 0.0:
            truncated_at = y
            break
        trajectory.append((y, vv))

    stride = max(1, len(trajectory) // (samples - 1)) if samples > 1 else 1
    picked = trajectory[::stride]
    if trajectory[-1] not in picked:
        picked.append(trajectory[-1])
    spec = FirstIntegralSpec(
        form=barred, base_point=(0.0, float(v0)), tol=quad_tol, closed_checked=closed
    )
    values = []
    for y, vv in picked:
        phi = first_integral_numeric(spec, (y, vv))
        values.append((y, vv, phi))
    phis = [p for (_, _, p) in values]
    drift = max(phis) - min(phis) if phis else 0.0
    return ConstancyReport(spec=spec, samples=values, max_drift=drift, truncated_at=truncated_at)


def _scalar_of_radical(form0: DiffForm):
    c = form0.comps.get(())
    if c is None:
        raise DistributionError("pairing vanished identically")
    return c
