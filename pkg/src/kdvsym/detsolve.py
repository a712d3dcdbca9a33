"""Build and solve symmetry determining systems.

Two routes to the same answer:

* the form-ideal route: a vector field with unknown polynomial components
  must carry each ideal generator back into the ideal under the Lie
  derivative.  Each generator can be constrained in one of three modes:
  ``prop`` (a single unknown multiplier, the literal per-form statement),
  ``span`` (an unknown combination of all generators), or ``span_theta``
  (additionally allowing unknown 1-forms wedged with the contact forms).
* the classical route: the prolonged action of a point-field ansatz on the
  equation must vanish after reduction modulo the equation.

Both produce one exact homogeneous linear system over the ansatz
coefficients; solutions are nullspace vectors projected back to fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield
from fractions import Fraction
from itertools import combinations

from .chart import ChartError, CoordChart
from .exterior import (
    DiffForm,
    VectorFieldExpr,
    ext_d,
    lie_derivative,
    proportionality_test,
    wedge,
)
from .jetspace import JetSpec, PdeSpec, contact_forms, on_solution_reduce, prolong
from .ratlinalg import MatrixQ, nullspace, rref, solve, span_equal
from .symkernel import CONST, ParamPoly, ParamRegistry, Poly, QQ, RatFunc

KDV_GENERATOR_COUNT = 7


class UnsupportedShapeError(ValueError):
    pass


@dataclass
class ContactIdeal:
    """The contact forms plus the closed set of 2-form generators."""

    spec: JetSpec
    contact: list  # contact 1-forms
    generators: list  # 2-form generators, 1-indexed by convention


def build_ideal(spec: JetSpec, pde: PdeSpec | None = None) -> ContactIdeal:
    """The seven 2-form generators for the second-order KdV jet chart.

    theta1^theta2, theta1^theta3, theta2^theta3, d(theta1..3), and the
    equation 2-form u dt^du - dt^du_xx - dx^du.
    """
    if (
        spec.independents != ("t", "x")
        or spec.dependents != ("u",)
        or spec.order != 2
    ):
        raise UnsupportedShapeError(
            "ideal construction is implemented for the (t, x; u) order-2 chart"
        )
    chart = spec.chart
    thetas = contact_forms(spec)
    th1, th2, th3 = thetas
    u = Poly.var(chart, "u")
    one = Poly.const(chart, 1)
    dt_du = wedge(DiffForm.d_coord(chart, "t"), DiffForm.d_coord(chart, "u"))
    dt_duxx = wedge(DiffForm.d_coord(chart, "t"), DiffForm.d_coord(chart, "u_xx"))
    dx_du = wedge(DiffForm.d_coord(chart, "x"), DiffForm.d_coord(chart, "u"))
    equation_form = dt_du.scale(u) - dt_duxx - dx_du
    generators = [
        wedge(th1, th2),
        wedge(th1, th3),
        wedge(th2, th3),
        ext_d(th1),
        ext_d(th2),
        ext_d(th3),
        equation_form,
    ]
    return ContactIdeal(spec=spec, contact=thetas, generators=generators)


def monomials_up_to(chart: CoordChart, degree: int, indices=None):
    """Exponent tuples of total degree <= degree, ascending graded-lex order."""
    idxs = list(indices) if indices is not None else list(range(chart.dim))
    out = [(0,) * chart.dim]
    for d in range(1, degree + 1):
        level = []

        def rec(pos, remaining, acc):
            if pos == len(idxs):
                if remaining == 0:
                    e = [0] * chart.dim
                    for i, k in zip(idxs, acc):
                        e[i] = k
                    level.append(tuple(e))
                return
            for k in range(remaining + 1):
                rec(pos + 1, remaining - k, acc + [k])

        rec(0, d, [])
        out.extend(sorted(level))
    return out


def _mono_label(chart: CoordChart, e) -> str:
    s = Poly(chart, {e: QQ(1)})._mono_str(e)
    return s if s else "1"


def _ansatz_poly(chart, registry, prefix, monos):
    ids = []
    terms = {}
    for e in monos:
        pid = registry.new_param(f"{prefix}[{_mono_label(chart, e)}]")
        ids.append(pid)
        terms[e] = {pid: QQ(1)}
    return ParamPoly(chart, registry, terms), ids


@dataclass
class DeterminingSystem:
    """A homogeneous exact linear system over ansatz parameters."""

    registry: ParamRegistry
    matrix: MatrixQ
    provenance: list  # one (tag, component tuple, monomial) per row
    chart: CoordChart  # chart the conditions live on
    ansatz_chart: CoordChart  # chart the solved fields live on
    field_param_ids: dict  # ansatz-chart coordinate index -> list of param ids
    field_monomials: list  # shared monomial list for the field ansatz
    meta: dict = dfield(default_factory=dict)

    @property
    def unknown_count(self) -> int:
        return self.registry.size

    def field_param_set(self):
        return {pid for ids in self.field_param_ids.values() for pid in ids}


@dataclass
class SymmetryBasis:
    """Solved generators with exact coefficients, plus solve metadata."""

    fields: list
    chart: CoordChart
    mode: str
    meta: dict = dfield(default_factory=dict)

    def __len__(self):
        return len(self.fields)


def _collect_rows(registry, forms_with_tags):
    """Rows of the homogeneous system from parameter-linear form components."""
    rows = []
    provenance = []
    for tag, form in forms_with_tags:
        for comp in sorted(form.comps):
            coeff = form.comps[comp]
            if isinstance(coeff, Poly):
                coeff = ParamPoly.from_poly(coeff, registry)
            if not isinstance(coeff, ParamPoly):
                raise TypeError("expected parameter-linear coefficients")
            for e in sorted(coeff.terms):
                lf = coeff.terms[e]
                if lf.get(CONST):
                    raise ValueError("determining system is not homogeneous")
                row = {pid: c for pid, c in lf.items() if pid != CONST and c}
                if row:
                    rows.append(row)
                    provenance.append((tag, comp, e))
    return rows, provenance


DEFAULT_MODES = {i: "span" for i in range(1, KDV_GENERATOR_COUNT + 1)}


def assemble_harrison(
    ideal: ContactIdeal,
    ansatz_degree_field: int = 1,
    ansatz_degree_mult: int = 1,
    condition_set=(1, 2, 3),
    modes: dict | None = None,
    max_unknowns: int = 20000,
) -> DeterminingSystem:
    """Linear conditions making the field ansatz preserve the form ideal.

    One condition per generator index in `condition_set`; the mode of each
    (``prop`` / ``span`` / ``span_theta``) comes from `modes`, defaulting to
    ``span``.  All ansatz components are polynomial of the given degrees.
    """
    chart = ideal.spec.chart
    registry = ParamRegistry()
    monos_field = monomials_up_to(chart, ansatz_degree_field)
    monos_mult = monomials_up_to(chart, ansatz_degree_mult)
    modes = dict(modes or DEFAULT_MODES)

    field_param_ids = {}
    comps = {}
    for i, name in enumerate(chart.names):
        pp, ids = _ansatz_poly(chart, registry, f"A{i + 1}", monos_field)
        comps[i] = pp
        field_param_ids[i] = ids
    v = VectorFieldExpr(chart, comps)

    conditions = sorted(set(condition_set))
    for k in conditions:
        if not 1 <= k <= len(ideal.generators):
            raise ValueError(f"condition index {k} out of range")

    forms = []
    for k in conditions:
        mode = modes.get(k, "span")
        alpha = ideal.generators[k - 1]
        residual = lie_derivative(v, alpha)
        if mode == "prop":
            lam, _ = _ansatz_poly(chart, registry, f"lam{k}", monos_mult)
            residual = residual - alpha.scale(lam)
        elif mode in ("span", "span_theta"):
            for j, gen in enumerate(ideal.generators, start=1):
                f_kj, _ = _ansatz_poly(chart, registry, f"f{k}_{j}", monos_mult)
                residual = residual - gen.scale(f_kj)
            if mode == "span_theta":
                for j, theta in enumerate(ideal.contact, start=1):
                    sigma_comps = {}
                    for ci, cname in enumerate(chart.names):
                        pp, _ = _ansatz_poly(
                            chart, registry, f"s{k}_{j}[d{cname}]", monos_mult
                        )
                        sigma_comps[(ci,)] = pp
                    sigma = DiffForm(chart, 1, sigma_comps)
                    residual = residual - wedge(sigma, theta)
        else:
            raise ValueError(f"unknown condition mode {mode!r}")
        if registry.size > max_unknowns:
            raise ValueError(f"unknown count exceeds cap ({max_unknowns})")
        forms.append((k, residual))

    rows, provenance = _collect_rows(registry, forms)
    matrix = MatrixQ(len(rows), registry.size, rows)
    return DeterminingSystem(
        registry=registry,
        matrix=matrix,
        provenance=provenance,
        chart=chart,
        ansatz_chart=chart,
        field_param_ids=field_param_ids,
        field_monomials=monos_field,
        meta={
            "kind": "harrison",
            "conditions": conditions,
            "modes": {k: modes.get(k, "span") for k in conditions},
            "ansatz_degrees": {"field": ansatz_degree_field, "multiplier": ansatz_degree_mult},
        },
    )


def assemble_classical(
    pde: PdeSpec, prolong_order: int | None = None, ansatz_degree: int = 2
) -> DeterminingSystem:
    """Linear conditions for a point-field ansatz to be a classical symmetry.

    The prolonged ansatz is applied to the equation and reduced modulo the
    equation; every residual monomial coefficient must vanish.
    """
    spec = pde.spec
    if prolong_order is None:
        prolong_order = spec.order
    base = JetSpec(spec.independents, spec.dependents, 0)
    bchart = base.chart
    registry = ParamRegistry()
    monos = monomials_up_to(bchart, ansatz_degree)

    comps = {}
    field_param_ids = {}
    for i, name in enumerate(bchart.names):
        pp, ids = _ansatz_poly(bchart, registry, f"X[{name}]", monos)
        comps[i] = pp
        field_param_ids[i] = ids
    ansatz = VectorFieldExpr(bchart, comps)

    prolonged = prolong(ansatz, prolong_order, base)
    chart = prolonged.chart
    if chart != pde.chart:
        raise ChartError("prolonged chart does not match the equation chart")
    applied = None
    for i, c in prolonged.comps.items():
        d = pde.equation.partial(i)
        if d.is_zero():
            continue
        term = c * d
        applied = term if applied is None else applied + term
    if applied is None:
        applied = ParamPoly.zero(chart, registry)

    reduction = on_solution_reduce(applied, pde)
    remainder = DiffForm(chart, 0, {(): reduction.remainder})
    rows, provenance = _collect_rows(registry, [("classical", remainder)])
    matrix = MatrixQ(len(rows), registry.size, rows)
    return DeterminingSystem(
        registry=registry,
        matrix=matrix,
        provenance=provenance,
        chart=chart,
        ansatz_chart=bchart,
        field_param_ids=field_param_ids,
        field_monomials=monos,
        meta={
            "kind": "classical",
            "prolong_order": prolong_order,
            "ansatz_degrees": {"field": ansatz_degree},
        },
    )


def solve_system(system: DeterminingSystem) -> SymmetryBasis:
    """Exact nullspace, projected to field coefficients and deduplicated."""
    null = nullspace(system.matrix)
    field_pids = system.field_param_set()
    projected = []
    for vec in null:
        pv = {pid: c for pid, c in vec.items() if pid in field_pids}
        if pv:
            projected.append(pv)
    reduced, _, rank = rref(
        MatrixQ.from_vectors(projected, system.registry.size)
    )
    out_chart = system.ansatz_chart
    fields = []
    for row in reduced.rows:
        comps = {}
        for i, ids in system.field_param_ids.items():
            terms = {}
            for e, pid in zip(system.field_monomials, ids):
                c = row.get(pid)
                if c:
                    terms[e] = c
            if terms:
                comps[i] = Poly(out_chart, terms)
        fields.append(VectorFieldExpr(out_chart, comps))
    mode = system.meta.get("kind", "harrison")
    return SymmetryBasis(
        fields=fields,
        chart=out_chart,
        mode=mode,
        meta={**system.meta, "dims": rank, "nullity": len(null), "rows": system.matrix.nrows},
    )


# -- span utilities ------------------------------------------------------------


def field_frame(fields):
    keys = set()
    for f in fields:
        for i, c in f.comps.items():
            for e in c.terms:
                keys.add((i, e))
    return sorted(keys)


def fields_to_vectors(fields, frame=None):
    if frame is None:
        frame = field_frame(fields)
    index = {k: n for n, k in enumerate(frame)}
    vectors = []
    for f in fields:
        vec = {}
        for i, c in f.comps.items():
            for e, coeff in c.terms.items():
                vec[index[(i, e)]] = coeff
        vectors.append(vec)
    return vectors, frame


def fields_span_equal(fields_a, fields_b) -> bool:
    """Exact rational span comparison of two vector-field families."""
    frame = field_frame(list(fields_a) + list(fields_b))
    va, _ = fields_to_vectors(fields_a, frame)
    vb, _ = fields_to_vectors(fields_b, frame)
    return span_equal(va, vb, len(frame))


# -- verification --------------------------------------------------------------


@dataclass
class GeneratorVerdict:
    generator: int
    status: str  # "proportional" | "member" | "fail"
    multiplier: str | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"


_REFUTATION_POINTS = (
    (QQ(1, 2), QQ(-1, 3), QQ(2), QQ(1, 5), QQ(-3, 7), QQ(1), QQ(-2, 5), QQ(3, 4)),
    (QQ(-1), QQ(2, 7), QQ(1, 3), QQ(-2), QQ(5, 2), QQ(-1, 4), QQ(1, 6), QQ(2, 3)),
    (QQ(3), QQ(1, 2), QQ(-1, 5), QQ(4, 3), QQ(-1, 2), QQ(2, 9), QQ(-3), QQ(1, 7)),
)


def _eval_form_at(form: DiffForm, point):
    out = {}
    for comp, coeff in form.comps.items():
        if isinstance(coeff, RatFunc):
            val = coeff.eval(point)
        else:
            val = coeff.eval(point)
        if val:
            out[comp] = val
    return out


def _membership_refuted(L: DiffForm, ideal: ContactIdeal) -> bool:
    """Sound pointwise test: if L(p) is outside the ideal's 2-form fiber at
    some rational point p, no function multipliers can ever express it."""
    chart = ideal.spec.chart
    comp_index = {c: i for i, c in enumerate(combinations(range(chart.dim), 2))}
    ncols = len(comp_index)
    for point in _REFUTATION_POINTS:
        span_vecs = []
        for gen in ideal.generators:
            vec = {comp_index[c]: v for c, v in _eval_form_at(gen, point).items()}
            span_vecs.append(vec)
        for theta in ideal.contact:
            for i in range(chart.dim):
                basis_1form = DiffForm(chart, 1, {(i,): Poly.const(chart, 1)})
                w = wedge(basis_1form, theta)
                vec = {comp_index[c]: v for c, v in _eval_form_at(w, point).items()}
                if vec:
                    span_vecs.append(vec)
        target = {comp_index[c]: v for c, v in _eval_form_at(L, point).items()}
        _, _, rank_span = rref(MatrixQ.from_vectors(span_vecs, ncols))
        _, _, rank_aug = rref(MatrixQ.from_vectors(span_vecs + [target], ncols))
        if rank_aug > rank_span:
            return True
    return False


def _membership_witness(L: DiffForm, ideal: ContactIdeal, degree: int, with_theta: bool):
    """Solve for polynomial multipliers expressing L inside the ideal."""
    chart = ideal.spec.chart
    registry = ParamRegistry()
    monos = monomials_up_to(chart, degree)
    total = DiffForm(
        chart, 2, {c: ParamPoly.from_poly(-k, registry) for c, k in L.comps.items()}
    )
    f_ids = []
    for j, gen in enumerate(ideal.generators, start=1):
        f_j, ids = _ansatz_poly(chart, registry, f"f{j}", monos)
        f_ids.append(ids)
        total = total + gen.scale(f_j)
    if with_theta:
        for j, theta in enumerate(ideal.contact, start=1):
            sigma_comps = {}
            for ci, cname in enumerate(chart.names):
                pp, _ = _ansatz_poly(chart, registry, f"s{j}[d{cname}]", monos)
                sigma_comps[(ci,)] = pp
            total = total + wedge(DiffForm(chart, 1, sigma_comps), theta)
    rows = []
    rhs = []
    for comp in sorted(total.comps):
        coeff = total.comps[comp]
        if isinstance(coeff, Poly):
            coeff = ParamPoly.from_poly(coeff, registry)
        for e in sorted(coeff.terms):
            lf = coeff.terms[e]
            row = {pid: c for pid, c in lf.items() if pid != CONST}
            rows.append(row)
            rhs.append(-lf.get(CONST, QQ(0)))
    solution = solve(MatrixQ(len(rows), registry.size, rows), rhs)
    if solution is None:
        return None
    witness = {}
    for j, ids in enumerate(f_ids, start=1):
        poly = Poly(chart, {e: solution[pid] for e, pid in zip(monos, ids) if solution[pid]})
        if not poly.is_zero():
            witness[j] = str(poly)
    return witness


def verify_symmetry(field: VectorFieldExpr, ideal: ContactIdeal, max_degree: int = 2):
    """Per-generator verdicts for L_v alpha^k staying inside the ideal.

    Proportionality is reported with its multiplier when it holds; otherwise
    an exact membership witness is sought, and a pointwise fiber test can
    certify failure outright.
    """
    verdicts = []
    for k, alpha in enumerate(ideal.generators, start=1):
        L = lie_derivative(field, alpha)
        if L.is_zero():
            verdicts.append(GeneratorVerdict(k, "proportional", "0"))
            continue
        lam = proportionality_test(L, alpha)
        if lam is not None:
            verdicts.append(GeneratorVerdict(k, "proportional", str(lam)))
            continue
        found = None
        for degree, with_theta in ((1, False), (1, True)):
            found = _membership_witness(L, ideal, degree, with_theta)
            if found is not None:
                break
        if found is None and _membership_refuted(L, ideal):
            verdicts.append(
                GeneratorVerdict(k, "fail", None, "derivative leaves the ideal fiber at a sample point")
            )
            continue
        if found is None:
            for degree in range(2, max_degree + 1):
                found = _membership_witness(L, ideal, degree, True)
                if found is not None:
                    break
        if found is None:
            verdicts.append(
                GeneratorVerdict(k, "fail", None, f"no polynomial witness up to degree {max_degree}")
            )
        else:
            detail = ", ".join(f"f{j}={w}" for j, w in sorted(found.items())) or "0"
            verdicts.append(GeneratorVerdict(k, "member", None, detail))
    return verdicts
