"""Elementary-function expression trees and residual verification.

Trees are built from constants, variables, sums, products, rational powers
and the function nodes exp/ln/sqrt/sech/tanh.  Differentiation is closed
over this node set; evaluation is deterministic double precision.  The KdV
residual u_t + u*u_x + u_xxx is checked numerically on a fixed grid for
closed-form candidates and exactly (as a rational function) for rational
candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .chart import CoordChart
from .parsing import ParseError, _Parser
from .symkernel import Poly, RatFunc, as_fraction

FUNCTIONS = ("exp", "ln", "sqrt", "sech", "tanh")


class Expr:
    """Base class for closed-form expression nodes."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(lift(other)))

    def __rsub__(self, other):
        return add(lift(other), neg(self))

    def __mul__(self, other):
        return mul(self, lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return mul(self, power(lift(other), Fraction(-1)))

    def __rtruediv__(self, other):
        return mul(lift(other), power(self, Fraction(-1)))

    def __neg__(self):
        return neg(self)

    def __pow__(self, e):
        return power(self, as_fraction(e))


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple

    def __str__(self):
        return "(" + " + ".join(str(t) for t in self.terms) + ")"


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple

    def __str__(self):
        return "*".join(f"({f})" if isinstance(f, Add) else str(f) for f in self.factors)


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Fraction

    def __str__(self):
        e = self.exponent
        e_str = str(e) if e.denominator == 1 and e >= 0 else f"({e})"
        return f"({self.base})^{e_str}"


@dataclass(frozen=True)
class App(Expr):
    func: str
    arg: Expr

    def __str__(self):
        return f"{self.func}({self.arg})"


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def _to_fraction(x) -> Fraction:
    # floats convert exactly (binary expansion), keeping evaluation deterministic
    return x if isinstance(x, Fraction) else Fraction(x)


def lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return Const(_to_fraction(x))


def const(v) -> Expr:
    return Const(_to_fraction(v))


def var(name: str) -> Expr:
    return Var(name)


def add(*xs) -> Expr:
    terms = []
    c = Fraction(0)
    for x in xs:
        x = lift(x)
        if isinstance(x, Add):
            for t in x.terms:
                if isinstance(t, Const):
                    c += t.value
                else:
                    terms.append(t)
        elif isinstance(x, Const):
            c += x.value
        else:
            terms.append(x)
    if c:
        terms.append(Const(c))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


def neg(x) -> Expr:
    return mul(Const(Fraction(-1)), lift(x))


def mul(*xs) -> Expr:
    factors = []
    c = Fraction(1)
    for x in xs:
        x = lift(x)
        if isinstance(x, Mul):
            for f in x.factors:
                if isinstance(f, Const):
                    c *= f.value
                else:
                    factors.append(f)
        elif isinstance(x, Const):
            c *= x.value
        else:
            factors.append(x)
    if not c:
        return ZERO
    if c != 1:
        factors.insert(0, Const(c))
    if not factors:
        return ONE
    if len(factors) == 1:
        return factors[0]
    return Mul(tuple(factors))


def power(base, exponent) -> Expr:
    base = lift(base)
    exponent = _to_fraction(exponent)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Const):
        if exponent.denominator == 1:
            return Const(base.value**exponent.numerator)
    if isinstance(base, Pow):
        return power(base.base, base.exponent * exponent)
    return Pow(base, exponent)


def app(func: str, arg) -> Expr:
    if func not in FUNCTIONS:
        raise ValueError(f"unsupported function {func!r}")
    return App(func, lift(arg))


def subst(e: Expr, mapping: dict) -> Expr:
    """Substitute expression trees for variables."""
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Add):
        return add(*(subst(t, mapping) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(subst(f, mapping) for f in e.factors))
    if isinstance(e, Pow):
        return power(subst(e.base, mapping), e.exponent)
    if isinstance(e, App):
        return App(e.func, subst(e.arg, mapping))
    raise TypeError(f"unsupported node {type(e).__name__}")


def diff(e: Expr, name: str) -> Expr:
    """Exact symbolic derivative with respect to a variable."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == name else ZERO
    if isinstance(e, Add):
        return add(*(diff(t, name) for t in e.terms))
    if isinstance(e, Mul):
        terms = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = diff(f, name)
            if df is ZERO or (isinstance(df, Const) and not df.value):
                continue
            terms.append(mul(*fs[:i], df, *fs[i + 1 :]))
        return add(*terms) if terms else ZERO
    if isinstance(e, Pow):
        db = diff(e.base, name)
        if isinstance(db, Const) and not db.value:
            return ZERO
        return mul(Const(e.exponent), power(e.base, e.exponent - 1), db)
    if isinstance(e, App):
        da = diff(e.arg, name)
        if isinstance(da, Const) and not da.value:
            return ZERO
        g = e.arg
        if e.func == "exp":
            outer = App("exp", g)
        elif e.func == "ln":
            outer = power(g, Fraction(-1))
        elif e.func == "sqrt":
            outer = mul(Const(Fraction(1, 2)), power(g, Fraction(-1, 2)))
        elif e.func == "sech":
            outer = neg(mul(App("sech", g), App("tanh", g)))
        elif e.func == "tanh":
            outer = add(ONE, neg(power(App("tanh", g), Fraction(2))))
        else:
            raise ValueError(f"no derivative rule for {e.func}")
        return mul(outer, da)
    raise TypeError(f"unsupported node {type(e).__name__}")


def evaluate(e: Expr, env: dict) -> float:
    """Evaluate to a double; raises on undefined variables or domain errors."""
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        try:
            return float(env[e.name])
        except KeyError:
            raise ValueError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Add):
        return sum(evaluate(t, env) for t in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= evaluate(f, env)
        return out
    if isinstance(e, Pow):
        b = evaluate(e.base, env)
        ex = e.exponent
        if ex.denominator == 1:
            n = ex.numerator
            if b == 0.0 and n < 0:
                raise ZeroDivisionError("zero base with negative exponent")
            return b**n
        if b < 0:
            raise ValueError(f"negative base {b} for fractional power {ex}")
        return b ** float(ex)
    if isinstance(e, App):
        a = evaluate(e.arg, env)
        if e.func == "exp":
            return math.exp(a)
        if e.func == "ln":
            return math.log(a)
        if e.func == "sqrt":
            return math.sqrt(a)
        if e.func == "sech":
            return 1.0 / math.cosh(a)
        if e.func == "tanh":
            return math.tanh(a)
    raise TypeError(f"unsupported node {type(e).__name__}")


class _ClosedFormParser(_Parser):
    """The shared grammar extended with function calls; identifiers are free."""

    def atom(self):
        kind, val, pos = self.next()
        if kind == "int":
            return Const(Fraction(int(val)))
        if kind == "name":
            k2, v2, _ = self.peek()
            if val in FUNCTIONS and k2 == "op" and v2 == "(":
                self.i += 1
                arg = self.expr()
                self.expect_op(")")
                return App(val, arg)
            return Var(val)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ParseError(f"unexpected token {val!r}", pos, self.source)

    def add(self, a, b):
        return add(a, b)

    def sub(self, a, b):
        return add(a, neg(b))

    def neg(self, a):
        return neg(a)

    def mul(self, a, b):
        return mul(a, b)

    def div(self, a, b):
        return mul(a, power(b, Fraction(-1)))

    def pow(self, a, b):
        if isinstance(b, Const):
            return power(a, b.value)
        raise ParseError("exponent must be a rational constant", 0, self.source)


def parse_closedform(source: str) -> Expr:
    return _ClosedFormParser(source).parse()


# -- residual verification -----------------------------------------------------


def standard_grid(exclude=None, singular_margin: float = 1e-3):
    """The fixed verification grid t in {-2,...,2} x in {-5,...,5}, step 1/2.

    `exclude(t, x)` returns the distance to the nearest singularity; points
    closer than `singular_margin` are dropped.  Order is deterministic.
    """
    ts = [(-4 + i) / 2.0 for i in range(9)]
    xs = [(-10 + i) / 2.0 for i in range(21)]
    grid = []
    for t in ts:
        for x in xs:
            if exclude is not None and exclude(t, x) < singular_margin:
                continue
            grid.append((t, x))
    return grid


def kdv_residual_tree(u: Expr) -> Expr:
    """The KdV residual u_t + u*u_x + u_xxx as an expression tree."""
    u_t = diff(u, "t")
    u_x = diff(u, "x")
    u_xxx = diff(diff(u_x, "x"), "x")
    return add(u_t, mul(u, u_x), u_xxx)


def residual_numeric(u: Expr, grid, env: dict | None = None) -> float:
    """Maximum absolute KdV residual over the grid (double precision)."""
    res = kdv_residual_tree(u)
    base = dict(env or {})
    worst = 0.0
    for t, x in grid:
        base["t"] = t
        base["x"] = x
        value = abs(evaluate(res, base))
        if value > worst:
            worst = value
    return worst


def residual_exact_rational(u: RatFunc) -> RatFunc:
    """Exact KdV residual of a rational candidate in the coordinates (t, x)."""
    chart = u.chart
    ti, xi = chart.index("t"), chart.index("x")
    u_x = u.partial(xi)
    return u.partial(ti) + u * u_x + u_x.partial(xi).partial(xi)


@dataclass
class TransformParams:
    """Parameters of the four symmetry flows and the combined transform."""

    s: Fraction | float = Fraction(0)
    alpha: Fraction | float = Fraction(0)
    beta: Fraction | float = Fraction(0)
    gamma: Fraction | float = Fraction(1)
    delta: Fraction | float = Fraction(1)
    lam: Fraction | float = Fraction(0)


FLOWS = ("theta1", "theta2", "theta3", "theta4", "five-param")


def apply_flow(u: Expr, flow: str, params: TransformParams) -> Expr:
    """Transform a solution by one of the symmetry flows.

    theta1: x -> x + s                      theta2: t -> t + s
    theta3: u(t, x) -> u(t, x - s t) + s    theta4: u -> e^{-2s} u(e^{-3s} t, e^{-s} x)
    five-param: u(t, x) = delta^2 H(delta^3 t + alpha, delta x + beta + gamma delta t) - lam
    """
    t, x = Var("t"), Var("x")
    if flow == "theta1":
        return subst(u, {"x": add(x, lift(params.s))})
    if flow == "theta2":
        return subst(u, {"t": add(t, lift(params.s))})
    if flow == "theta3":
        s = lift(params.s)
        return add(subst(u, {"x": add(x, neg(mul(s, t)))}), s)
    if flow == "theta4":
        # round e^{-s} once to a nearby rational k: the transform with factors
        # (k^3, k, k^2) is then itself an exact group element
        k = _approx_fraction(math.exp(-float(params.s)))
        scaled = subst(u, {"t": mul(Const(k**3), t), "x": mul(Const(k), x)})
        return mul(Const(k**2), scaled)
    if flow == "five-param":
        d = lift(params.delta)
        if isinstance(params.delta, Fraction) and params.delta == 0:
            raise ValueError("delta must be nonzero")
        new_t = add(mul(power(d, Fraction(3)), t), lift(params.alpha))
        new_x = add(mul(d, x), lift(params.beta), mul(lift(params.gamma), d, t))
        return add(mul(power(d, Fraction(2)), subst(u, {"t": new_t, "x": new_x})), neg(lift(params.lam)))
    raise ValueError(f"unknown flow {flow!r} (expected one of {FLOWS})")


def _approx_fraction(x: float) -> Fraction:
    return Fraction(x).limit_denominator(10**15)


def traveling_wave_check(c, c1, c2, v: Expr, ys=None, tol: float = 1e-9):
    """Check the twice-integrated traveling-wave relations for v(y).

    Verifies (1/2) v'^2 + v^3/6 - (c/2) v^2 - c1 v - c2 = 0 and the
    once-integrated relation v'(v'' + v^2/2 - c v - c1) = 0 on a y-grid.
    Returns (max residual of the first, max of the second, verdict).
    """
    c, c1, c2 = as_fraction(c), as_fraction(c1), as_fraction(c2)
    if ys is None:
        ys = [(-12 + i) / 4.0 for i in range(25)]
    vp = diff(v, "y")
    vpp = diff(vp, "y")
    first = add(
        mul(Const(Fraction(1, 2)), power(vp, Fraction(2))),
        mul(Const(Fraction(1, 6)), power(v, Fraction(3))),
        neg(mul(Const(c / 2), power(v, Fraction(2)))),
        neg(mul(Const(c1), v)),
        Const(-c2),
    )
    second = mul(vp, add(vpp, mul(Const(Fraction(1, 2)), power(v, Fraction(2))), neg(mul(Const(c), v)), Const(-c1)))
    worst1 = max(abs(evaluate(first, {"y": y})) for y in ys)
    worst2 = max(abs(evaluate(second, {"y": y})) for y in ys)
    return worst1, worst2, (worst1 < tol and worst2 < tol)


def rational_chart() -> CoordChart:
    return CoordChart(("t", "x"))


def finite_difference(e: Expr, name: str, env: dict, step: float = 1e-5) -> float:
    """Central finite difference, the numeric oracle for `diff`."""
    hi = dict(env)
    lo = dict(env)
    hi[name] = env[name] + step
    lo[name] = env[name] - step
    return (evaluate(e, hi) - evaluate(e, lo)) / (2 * step)
