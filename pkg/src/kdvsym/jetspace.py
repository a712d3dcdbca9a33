"""Jet-space structure: contact forms, total derivatives, prolongation,
and reduction of expressions modulo an equation.

A `JetSpec` generates the coordinate chart for p independent and q dependent
variables up to a fixed derivative order.  Derivative coordinates are named
``u_J`` with the multi-index J written as a sorted string of independent
variable names (``u_tx``, never ``u_xt``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement

from .chart import DEPENDENT, DERIVATIVE, INDEPENDENT, ChartError, CoordChart
from .exterior import DiffForm, VectorFieldExpr
from .symkernel import ParamPoly, Poly, RatFunc


class OrderOverflowError(ChartError):
    """A total derivative needs a coordinate beyond the chart's order."""


def _multi_indices(p: int, order: int):
    """All multi-indices of exact total order `order` over p independents,
    enumerated in lexicographic order of their sorted letter strings."""
    return list(combinations_with_replacement(range(p), order))


class JetSpec:
    """Independent/dependent variable names plus a maximum derivative order."""

    def __init__(self, independents, dependents, order: int):
        self.independents = tuple(independents)
        self.dependents = tuple(dependents)
        if order < 0:
            raise ValueError("order must be nonnegative")
        self.order = order

        names = list(self.independents) + list(self.dependents)
        kinds = [INDEPENDENT] * len(self.independents) + [DEPENDENT] * len(self.dependents)
        self._coord_of: dict[tuple[str, tuple[int, ...]], int] = {}
        for dep_i, dep in enumerate(self.dependents):
            self._coord_of[(dep, ())] = len(self.independents) + dep_i
        for k in range(1, order + 1):
            for dep in self.dependents:
                for J in _multi_indices(len(self.independents), k):
                    suffix = "".join(self.independents[i] for i in J)
                    self._coord_of[(dep, J)] = len(names)
                    names.append(f"{dep}_{suffix}")
                    kinds.append(DERIVATIVE)
        self.chart = CoordChart(names, kinds)

    def coord_index(self, dep: str, J) -> int:
        key = (dep, tuple(sorted(J)))
        try:
            return self._coord_of[key]
        except KeyError:
            raise OrderOverflowError(
                f"derivative of {dep} with multi-index {tuple(J)} exceeds order {self.order}"
            ) from None

    def has_derivative(self, dep: str, J) -> bool:
        return (dep, tuple(sorted(J))) in self._coord_of

    def derivative_entries(self):
        """All (dep, multi-index, chart index) triples, by increasing order."""
        return [(dep, J, i) for (dep, J), i in self._coord_of.items()]

    def raise_order(self, order: int) -> "JetSpec":
        if order == self.order:
            return self
        return JetSpec(self.independents, self.dependents, order)

    def __repr__(self):
        return (
            f"JetSpec(independents={self.independents}, dependents={self.dependents}, "
            f"order={self.order})"
        )


@dataclass
class PdeSpec:
    """A polynomial equation on a jet chart with a designated leading derivative."""

    spec: JetSpec
    equation: Poly
    leading: str

    def __post_init__(self):
        if self.equation.chart != self.spec.chart:
            raise ChartError("equation polynomial lives on a different chart")
        lead_idx = self.spec.chart.index(self.leading)
        if not self.equation.depends_on(lead_idx):
            raise ValueError(f"equation does not depend on leading derivative {self.leading}")

    @property
    def chart(self):
        return self.spec.chart


def contact_forms(spec: JetSpec) -> list[DiffForm]:
    """Contact 1-forms du_J - sum_i u_{J,i} dx^i for every |J| < order."""
    if spec.order < 1:
        raise ValueError("contact forms need order >= 1")
    chart = spec.chart
    forms = []
    for dep, J, idx in spec.derivative_entries():
        if len(J) >= spec.order:
            continue
        comps = {(idx,): Poly.const(chart, 1)}
        for i, x in enumerate(spec.independents):
            xi = chart.index(x)
            shifted = spec.coord_index(dep, J + (i,))
            comps[(xi,)] = -Poly.var(chart, chart.names[shifted])
        forms.append(DiffForm(chart, 1, comps))
    return forms


def total_derivative(expr, wrt: str, spec: JetSpec):
    """Total derivative D_i = d/dx_i + sum_J u_{J,i} d/du_J.

    Raises OrderOverflowError when `expr` depends on a top-order coordinate
    whose shifted image is missing from the chart.
    """
    chart = spec.chart
    i = spec.independents.index(wrt)
    out = expr.partial(chart.index(wrt))
    for dep, J, idx in spec.derivative_entries():
        d = expr.partial(idx)
        if d.is_zero() if hasattr(d, "is_zero") else not d:
            continue
        shifted = spec.coord_index(dep, J + (i,))
        out = out + Poly.var(chart, chart.names[shifted]) * d
    return out


def is_point_field(field: VectorFieldExpr, spec: JetSpec) -> bool:
    """Components only on base coordinates and depending only on them."""
    base = set(spec.chart.base_indices())
    for idx, coeff in field.comps.items():
        if idx not in base:
            return False
        for j in range(spec.chart.dim):
            if j in base:
                continue
            d = coeff.partial(j)
            if not (d.is_zero() if hasattr(d, "is_zero") else not d):
                return False
    return True


def prolong(field: VectorFieldExpr, order: int, spec: JetSpec) -> VectorFieldExpr:
    """Prolong a point vector field to the order-`order` jet chart.

    Uses the standard recursion phi^{J,i} = D_i phi^J - sum_j u_{J,j} D_i xi^j,
    which needs only coordinates already present on the target chart.
    """
    target = spec.raise_order(order)
    chart = target.chart
    if not is_point_field(field, spec):
        raise ValueError("prolongation requires a point vector field")

    def move(c):
        if isinstance(c, Poly):
            return c.remap(chart)
        if isinstance(c, ParamPoly):
            mapping = [chart.index(n) for n in c.chart.names]

            def remap_exp(e):
                e2 = [0] * chart.dim
                for i, k in enumerate(e):
                    if k:
                        e2[mapping[i]] = k
                return tuple(e2)

            return ParamPoly(
                chart, c.registry, {remap_exp(e): dict(lf) for e, lf in c.terms.items()}
            )
        raise TypeError("point field components must be Poly or ParamPoly")

    xi = {}  # independent-direction components, remapped
    comps = {}
    for idx, coeff in field.comps.items():
        name = field.chart.names[idx]
        moved = move(coeff)
        comps[chart.index(name)] = moved
        if name in target.independents:
            xi[target.independents.index(name)] = moved

    phi: dict[tuple[str, tuple[int, ...]], object] = {}
    for dep in target.dependents:
        base_idx = field.chart.index(dep) if field.chart.has(dep) else None
        coeff = field.comps.get(base_idx) if base_idx is not None else None
        phi[(dep, ())] = move(coeff) if coeff is not None else Poly.zero(chart)

    for k in range(1, order + 1):
        for dep in target.dependents:
            for J in _multi_indices(len(target.independents), k):
                # build from the parent multi-index by stripping the last entry
                parent, i = J[:-1], J[-1]
                direction = target.independents[i]
                prev = phi[(dep, parent)]
                comp = total_derivative(prev, direction, target)
                for j in range(len(target.independents)):
                    xi_j = xi.get(j)
                    if xi_j is None:
                        continue
                    u_parent_j = Poly.var(
                        chart, chart.names[target.coord_index(dep, parent + (j,))]
                    )
                    comp = comp - u_parent_j * total_derivative(xi_j, direction, target)
                phi[(dep, J)] = comp
                comps[target.coord_index(dep, J)] = comp

    return VectorFieldExpr(chart, comps)


@dataclass
class ReductionResult:
    """Outcome of reducing an expression modulo an equation.

    `multiplier * expr = quotient * equation + remainder` holds exactly, with
    the multiplier a power of the equation's leading coefficient.  `cofactor`
    is quotient/multiplier when that division is exact (so expr = cofactor *
    equation when the remainder vanishes).
    """

    remainder: object
    multiplier: Poly
    quotient: object | None
    cofactor: object | None

    @property
    def is_zero(self) -> bool:
        r = self.remainder
        return r.is_zero() if hasattr(r, "is_zero") else not r


def _lead_decompose(eq: Poly, lead_idx: int):
    d = eq.degree_in(lead_idx)
    lc = eq.coeff_of_power(lead_idx, d)
    return d, lc


def on_solution_reduce(expr, pde: PdeSpec) -> ReductionResult:
    """Pseudo-reduce `expr` by the equation and its total-derivative images.

    Treats each applicable relation's leading derivative as main variable and
    eliminates it by pseudo-division, iterating until no leading derivative
    remains.  Reports the exact cofactor when the overall relation is a single
    exact division by the original equation.
    """
    chart = pde.chart
    if isinstance(expr, RatFunc):
        inner = on_solution_reduce(expr.num, pde)
        return ReductionResult(
            remainder=RatFunc(inner.remainder, expr.den * inner.multiplier)
            if not (inner.remainder.is_zero())
            else RatFunc.const(chart, 0),
            multiplier=inner.multiplier,
            quotient=None,
            cofactor=None,
        )

    spec = pde.spec
    lead_idx = chart.index(pde.leading)

    # the equation plus every total-derivative image whose leading coordinate
    # exists on this chart, ordered so higher-order leads are eliminated first
    relations = [(lead_idx, pde.equation)]
    dep, J0 = _split_derivative_name(pde.leading, spec)
    frontier = [(J0, pde.equation)]
    while frontier:
        J, eq = frontier.pop()
        for i, x in enumerate(spec.independents):
            J2 = tuple(sorted(J + (i,)))
            if not spec.has_derivative(dep, J2):
                continue
            idx2 = spec.coord_index(dep, J2)
            if any(idx2 == li for li, _ in relations):
                continue
            eq2 = total_derivative(eq, x, spec)
            relations.append((idx2, eq2))
            frontier.append((J2, eq2))
    relations.sort(key=lambda r: -r[0])

    one = Fraction(1)
    multiplier = Poly.const(chart, 1)
    quotient_by_main = None  # quotient against the original equation only
    exact_single = True
    current = expr
    changed = True
    while changed:
        changed = False
        for li, eq in relations:
            deg_eq, lc = _lead_decompose(eq, li)
            while True:
                d = _degree_in(current, li)
                if d < deg_eq:
                    break
                changed = True
                top = _coeff_of_power(current, li, d)
                shift = [0] * chart.dim
                shift[li] = d - deg_eq
                mono = Poly(chart, {tuple(shift): one})
                # lc * current - top * x^{d-deg} * eq removes the top power
                current = current * lc - top * mono * eq
                multiplier = multiplier * lc
                q_term = top * mono
                if li == lead_idx and eq is pde.equation:
                    quotient_by_main = (
                        q_term if quotient_by_main is None else quotient_by_main * lc + q_term
                    )
                else:
                    exact_single = False

    cofactor = None
    if exact_single:
        if quotient_by_main is None:
            if current.is_zero():
                cofactor = Poly.zero(chart)
        elif isinstance(quotient_by_main, Poly):
            cofactor = _try_exact_divide(quotient_by_main, multiplier)
    return ReductionResult(
        remainder=current, multiplier=multiplier, quotient=quotient_by_main, cofactor=cofactor
    )


def _split_derivative_name(name: str, spec: JetSpec):
    for dep in spec.dependents:
        if name.startswith(dep + "_"):
            suffix = name[len(dep) + 1 :]
            J = []
            rest = suffix
            while rest:
                for i, x in enumerate(spec.independents):
                    if rest.startswith(x):
                        J.append(i)
                        rest = rest[len(x) :]
                        break
                else:
                    raise ChartError(f"cannot parse derivative name {name!r}")
            return dep, tuple(sorted(J))
    raise ChartError(f"{name!r} is not a derivative coordinate")


def _degree_in(expr, i: int) -> int:
    if isinstance(expr, Poly):
        return expr.degree_in(i)
    return max((e[i] for e in expr.terms), default=0)


def _coeff_of_power(expr, i: int, k: int):
    if isinstance(expr, Poly):
        return expr.coeff_of_power(i, k)
    out = {}
    for e, lf in expr.terms.items():
        if e[i] == k:
            out[e[:i] + (0,) + e[i + 1 :]] = dict(lf)
    return ParamPoly(expr.chart, expr.registry, out)


def _try_exact_divide(num: Poly, den: Poly):
    """Exact polynomial division for the monomial-times-scalar denominators
    produced by pseudo-division; None when the division is not exact."""
    if den.is_constant():
        return num / den.constant_value()
    if len(den.terms) == 1:
        (e, c), = den.terms.items()
        out = {}
        for e2, c2 in num.terms.items():
            diff = tuple(a - b for a, b in zip(e2, e))
            if any(k < 0 for k in diff):
                return None
            out[diff] = c2 / c
        return Poly(num.chart, out)
    return None
