"""Built-in problems, vector fields, and solution families.

Everything the CLI and the verification suite address by name lives here:
the third-order KdV equation, its second-order jet chart for the form-ideal
route, three reduced ordinary differential equations obtained from it, and
the explicit solution families.  Families carry a `printed` and a
`corrected` variant: the printed text of some families does not satisfy the
equation, and the checker is expected to say so rather than silently fix it.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field as dfield
from fractions import Fraction

from .chart import CoordChart
from .closedform import (
    Expr,
    TransformParams,
    app,
    const,
    mul,
    parse_closedform,
    power,
    subst,
    var,
)
from .jetspace import JetSpec, PdeSpec
from .parsing import parse_field, parse_poly
from .symkernel import Poly, QQ, RatFunc


@dataclass
class Problem:
    """A named jet chart with an optional equation and named fields."""

    name: str
    spec: JetSpec
    equation_text: str | None = None
    leading: str | None = None
    field_texts: dict = dfield(default_factory=dict)

    @property
    def chart(self):
        return self.spec.chart

    def pde(self) -> PdeSpec:
        if self.equation_text is None:
            raise ValueError(f"problem {self.name!r} has no polynomial equation")
        eq = parse_poly(self.equation_text, self.chart)
        return PdeSpec(self.spec, eq, self.leading)

    def field(self, name: str):
        try:
            text = self.field_texts[name]
        except KeyError:
            raise KeyError(
                f"problem {self.name!r} has no builtin field {name!r} "
                f"(available: {', '.join(sorted(self.field_texts))})"
            ) from None
        return parse_field(text, self.chart)

    def field_names(self):
        return list(self.field_texts)


_KDV_POINT_FIELDS = {
    "X1": "@x",
    "X2": "@t",
    "X3": "t*@x + @u",
    "X4": "x*@x + 3*t*@t - 2*u*@u",
}

_KDV_JET_FIELDS = {
    "v1": "@x",
    "v2": "@t",
    "v3": "t*@x + @u - u_x*@u_t - 2*u_tx*@u_tt - u_xx*@u_tx",
    "v4": (
        "x*@x + 3*t*@t - 2*u*@u - 5*u_t*@u_t - 3*u_x*@u_x"
        " - 8*u_tt*@u_tt - 6*u_tx*@u_tx - 4*u_xx*@u_xx"
    ),
}


def _builtin_problems():
    problems = {}
    problems["kdv3"] = Problem(
        name="kdv3",
        spec=JetSpec(("t", "x"), ("u",), 3),
        equation_text="u_xxx + u*u_x + u_t",
        leading="u_xxx",
        field_texts=dict(_KDV_POINT_FIELDS),
    )
    problems["kdv2w"] = Problem(
        name="kdv2w",
        spec=JetSpec(("t", "x"), ("u",), 2),
        field_texts={**_KDV_POINT_FIELDS, **_KDV_JET_FIELDS},
    )
    problems["ode-1.8"] = Problem(
        name="ode-1.8",
        spec=JetSpec(("x",), ("y",), 3),
        equation_text="y_xxx + y*y_x",
        leading="y_xxx",
        field_texts={"X1": "@x", "X2": "x*@x - 2*y*@y"},
    )
    problems["ode-1.10"] = Problem(
        name="ode-1.10",
        spec=JetSpec(("u",), ("eta",), 2),
        equation_text="u*eta^4 + 3*eta_u^2 - eta*eta_uu",
        leading="eta_uu",
        field_texts={
            "X1": "eta^3*@eta",
            "X2": "u*eta^3*@eta",
            "X3": "2*u*@u - 3*eta*@eta",
        },
    )
    problems["ode-1.11"] = Problem(
        name="ode-1.11",
        spec=JetSpec(("t",), ("xi",), 1),
        equation_text="4*t^4*xi^3 + 3*xi - 10*t*xi^2 + 12*t^2*xi^3 + t*xi_t",
        leading="xi_t",
        field_texts={"X1": "(3*t + t^3)*@t - (3 + 3*t^2)*xi*@xi"},
    )
    return problems


PROBLEMS = _builtin_problems()


def get_problem(name: str) -> Problem:
    try:
        return PROBLEMS[name]
    except KeyError:
        raise KeyError(
            f"unknown problem {name!r} (builtin: {', '.join(sorted(PROBLEMS))})"
        ) from None


def load_problem_file(path: str) -> Problem:
    """Problem from a key/value file with [jet], [equation], [fields] sections."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    if "jet" not in cp:
        raise ValueError(f"{path}: missing [jet] section")
    jet = cp["jet"]
    spec = JetSpec(
        tuple(jet["independents"].split()),
        tuple(jet["dependents"].split()),
        int(jet["order"]),
    )
    equation_text = None
    leading = None
    if "equation" in cp:
        equation_text = cp["equation"].get("delta")
        leading = cp["equation"].get("leading")
    fields = dict(cp["fields"]) if "fields" in cp else {}
    return Problem(
        name=path,
        spec=spec,
        equation_text=equation_text,
        leading=leading,
        field_texts=fields,
    )


# -- solution families -----------------------------------------------------------


@dataclass
class SolutionCheck:
    label: str
    kind: str  # "exact" | "numeric"
    expr: Expr | None = None
    rational: RatFunc | None = None
    # (t, x) -> float distance to the nearest singularity, for grid exclusion
    singular_distance: object = None


def soliton_expr(c, eps=QQ(0)) -> Expr:
    """3c sech^2( sqrt(c)/2 (x - c t) + eps )."""
    c = Fraction(c)
    arg = mul(
        const(Fraction(1, 2)),
        power(const(c), Fraction(1, 2)),
        var("x") - mul(const(c), var("t")),
    )
    return mul(const(3 * c), power(app("sech", arg + const(eps)), Fraction(2)))


def soliton_profile_expr(c, eps=QQ(0), variant: str = "corrected") -> Expr:
    """The traveling profile v(y); the printed variant drops the y factor."""
    c = Fraction(c)
    half_root = mul(const(Fraction(1, 2)), power(const(c), Fraction(1, 2)))
    if variant == "printed":
        arg = half_root + const(eps)
    else:
        arg = mul(half_root, var("y")) + const(eps)
    return mul(const(3 * c), power(app("sech", arg), Fraction(2)))


def rational_family_ratfunc(alpha, beta, gamma, variant: str) -> RatFunc:
    """(+|-) 12 gamma^2 / (beta t + gamma x + alpha)^2 - beta/gamma, exactly."""
    alpha, beta, gamma = Fraction(alpha), Fraction(beta), Fraction(gamma)
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    sign = 1 if variant == "printed" else -1
    chart = CoordChart(("t", "x"))
    line = (
        beta * Poly.var(chart, "t")
        + gamma * Poly.var(chart, "x")
        + Poly.const(chart, alpha)
    )
    return RatFunc.const(chart, sign * 12 * gamma**2) / RatFunc.from_poly(
        line * line
    ) - RatFunc.const(chart, beta / gamma)


def rational_family_expr(alpha, beta, gamma, variant: str) -> Expr:
    alpha, beta, gamma = Fraction(alpha), Fraction(beta), Fraction(gamma)
    sign = 1 if variant == "printed" else -1
    line = mul(const(beta), var("t")) + mul(const(gamma), var("x")) + const(alpha)
    return mul(const(sign * 12 * gamma**2), power(line, Fraction(-2))) - const(
        beta / gamma
    )


def rational_singular_distance(alpha, beta, gamma):
    a, b, g = float(alpha), float(beta), float(gamma)
    norm = math.hypot(b, g)

    def dist(t, x):
        return abs(b * t + g * x + a) / norm

    return dist


def tanh_family_expr(alpha, beta, gamma, variant: str) -> Expr:
    """Corrected: -12 g^2 tanh^2(bt+gx+a) + 8 g^2 - b/g; printed is the
    literal -12 tanh(x^2) + 8."""
    if variant == "printed":
        return mul(const(-12), app("tanh", power(var("x"), Fraction(2)))) + const(8)
    alpha, beta, gamma = Fraction(alpha), Fraction(beta), Fraction(gamma)
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    w = mul(const(beta), var("t")) + mul(const(gamma), var("x")) + const(alpha)
    return (
        mul(const(-12 * gamma**2), power(app("tanh", w), Fraction(2)))
        + const(8 * gamma**2)
        - const(beta / gamma)
    )


FAMILY_NAMES = ("soliton", "rational", "tanh", "constant")

DEFAULT_SOLITON_SPEEDS = (QQ(1), QQ(4), QQ(9))
DEFAULT_RATIONAL_TRIPLES = ((QQ(0), QQ(2), QQ(1)), (QQ(1), QQ(0), QQ(1)), (QQ(3), QQ(5), QQ(2)))
DEFAULT_TANH_TRIPLES = ((QQ(0), QQ(0), QQ(1)), (QQ(0), QQ(1), QQ(2)), (QQ(2), QQ(3), QQ(1)))
DEFAULT_CONSTANTS = (QQ(0), QQ(7, 3))


def family_checks(family: str, variant: str = "corrected", params=None):
    """The checks (exact or numeric) run for a named family and variant."""
    if variant not in ("printed", "corrected"):
        raise ValueError("variant must be 'printed' or 'corrected'")
    checks = []
    if family == "soliton":
        speeds = params or DEFAULT_SOLITON_SPEEDS
        for c in speeds:
            checks.append(
                SolutionCheck(label=f"c={c}", kind="numeric", expr=soliton_expr(c))
            )
    elif family == "rational":
        triples = params or DEFAULT_RATIONAL_TRIPLES
        for a, b, g in triples:
            checks.append(
                SolutionCheck(
                    label=f"alpha={a},beta={b},gamma={g}",
                    kind="exact",
                    rational=rational_family_ratfunc(a, b, g, variant),
                    expr=rational_family_expr(a, b, g, variant),
                    singular_distance=rational_singular_distance(a, b, g),
                )
            )
    elif family == "tanh":
        if variant == "printed":
            checks.append(
                SolutionCheck(
                    label="literal", kind="numeric", expr=tanh_family_expr(0, 0, 1, "printed")
                )
            )
        else:
            triples = params or DEFAULT_TANH_TRIPLES
            for a, b, g in triples:
                checks.append(
                    SolutionCheck(
                        label=f"alpha={a},beta={b},gamma={g}",
                        kind="numeric",
                        expr=tanh_family_expr(a, b, g, variant),
                    )
                )
    elif family == "constant":
        for k in params or DEFAULT_CONSTANTS:
            checks.append(
                SolutionCheck(label=f"kappa={k}", kind="numeric", expr=const(Fraction(k)))
            )
    else:
        raise KeyError(f"unknown family {family!r} (builtin: {', '.join(FAMILY_NAMES)})")
    return checks


DEFAULT_FLOW_PARAMS = {
    "theta1": (TransformParams(s=QQ(1)), TransformParams(s=QQ(-3, 2))),
    "theta2": (TransformParams(s=QQ(1, 2)), TransformParams(s=QQ(-1))),
    "theta3": (TransformParams(s=QQ(1)), TransformParams(s=QQ(-2))),
    "theta4": (TransformParams(s=0.7), TransformParams(s=-0.4)),
    "five-param": (
        TransformParams(alpha=QQ(1), beta=QQ(2), gamma=QQ(3), delta=QQ(2), lam=QQ(3)),
        TransformParams(alpha=QQ(0), beta=QQ(1), gamma=QQ(0), delta=QQ(1, 2), lam=QQ(0)),
    ),
}
