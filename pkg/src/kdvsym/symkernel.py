"""Exact arithmetic foundation.

Scalars are arbitrary-precision rationals (`fractions.Fraction`).  On top of
them live three coefficient domains over a shared `CoordChart`:

* `Poly` - sparse multivariate polynomials, canonical (no zero terms),
  ordered by graded lexicographic order on the chart's coordinate order.
* `RatFunc` - fractions of polynomials.  Stored form only cancels scalar and
  monomial content; equality is semantic, by cross-multiplication.
* `ParamPoly` - polynomials whose coefficients are affine-linear forms in
  unknown parameters from a shared `ParamRegistry`.  Any operation that
  would multiply two parameters raises `LinearityError`; determining systems
  stay linear by construction.

`RadicalFunc` adjoins a single square root sqrt(Q) of a polynomial to the
rational-function field: values a + b*sqrt(Q).  That is exactly enough for
first-integral 1-forms whose coefficients involve sqrt of a polynomial, with
differentiation staying inside the representation.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, sqrt as _fsqrt

from . import _kernels as K
from .chart import ChartError, CoordChart, require_same_chart

QQ = Fraction


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def grlex_key(exp):
    """Sort key for graded lexicographic order (ascending)."""
    return (sum(exp), exp)


class LinearityError(TypeError):
    """Raised when an operation would produce parameter-by-parameter terms."""


class Poly:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart: CoordChart, terms: dict):
        self.chart = chart
        self.terms = terms  # {exponent tuple: Fraction}, canonical

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, chart):
        return cls(chart, {})

    @classmethod
    def const(cls, chart, value):
        value = as_fraction(value)
        if not value:
            return cls(chart, {})
        return cls(chart, {(0,) * chart.dim: value})

    @classmethod
    def var(cls, chart, name):
        i = chart.index(name)
        e = [0] * chart.dim
        e[i] = 1
        return cls(chart, {tuple(e): QQ(1)})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return QQ(0)
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=0)

    def coeff_of_power(self, i: int, k: int) -> "Poly":
        """Coefficient of (coordinate i)^k, a polynomial in the rest."""
        out = {}
        for e, c in self.terms.items():
            if e[i] == k:
                out[e[:i] + (0,) + e[i + 1 :]] = c
        return Poly(self.chart, out)

    def leading(self):
        """(exponent, coefficient) of the grlex-largest monomial."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def depends_on(self, i: int) -> bool:
        return any(e[i] for e in self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.chart == other.chart and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == Poly.const(self.chart, other).terms
        return NotImplemented

    def __hash__(self):
        return hash((self.chart, tuple(sorted(self.terms.items()))))

    # -- arithmetic --------------------------------------------------------

    def _lift(self, other):
        if isinstance(other, Poly):
            require_same_chart(self, other)
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.chart, other)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Poly(self.chart, K.map_add(self.terms, o.terms))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Poly(self.chart, K.map_sub(self.terms, o.terms))

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Poly(self.chart, K.map_sub(o.terms, self.terms))

    def __neg__(self):
        return Poly(self.chart, K.map_neg(self.terms))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly(self.chart, K.map_scale(self.terms, as_fraction(other)))
        if isinstance(other, Poly):
            require_same_chart(self, other)
            return Poly(self.chart, K.poly_mul(self.terms, other.terms))
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Poly.const(self.chart, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            c = as_fraction(other)
            if not c:
                raise ZeroDivisionError("division by zero scalar")
            return self * (1 / c)
        if isinstance(other, Poly):
            if other.is_constant():
                return self / other.constant_value()
            return RatFunc(self, other)
        return NotImplemented

    # -- calculus and evaluation -------------------------------------------

    def partial(self, coord) -> "Poly":
        i = coord if isinstance(coord, int) else self.chart.index(coord)
        return Poly(self.chart, K.poly_partial(self.terms, i))

    def eval(self, point) -> Fraction:
        pt = tuple(as_fraction(v) for v in point)
        if len(pt) != self.chart.dim:
            raise ValueError("point dimension mismatch")
        return K.poly_eval(self.terms, pt)

    def eval_float(self, point) -> float:
        total = 0.0
        for e, c in self.terms.items():
            term = float(c)
            for k, v in zip(e, point):
                if k:
                    term *= float(v) ** k
            total += term
        return total

    def remap(self, chart: CoordChart) -> "Poly":
        """Reinterpret on another chart containing the same named coordinates."""
        if chart == self.chart:
            return self
        mapping = [chart.index(n) for n in self.chart.names]
        out = {}
        for e, c in self.terms.items():
            e2 = [0] * chart.dim
            for i, k in enumerate(e):
                if k:
                    e2[mapping[i]] = k
            out[tuple(e2)] = c
        return Poly(chart, out)

    def monomial_content(self):
        """Componentwise minimum exponent across all terms."""
        if not self.terms:
            return (0,) * self.chart.dim
        its = iter(self.terms)
        acc = list(next(its))
        for e in its:
            for i, k in enumerate(e):
                if k < acc[i]:
                    acc[i] = k
        return tuple(acc)

    def scalar_content(self) -> Fraction:
        """Positive rational c such that self/c has coprime integer coefficients."""
        if not self.terms:
            return QQ(1)
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        return QQ(num, den)

    def shift_monomial(self, delta) -> "Poly":
        """Multiply by the monomial with exponent vector delta (entries may be negative
        if every term stays a polynomial)."""
        out = {}
        for e, c in self.terms.items():
            e2 = tuple(a + b for a, b in zip(e, delta))
            if any(k < 0 for k in e2):
                raise ValueError("monomial shift below zero exponent")
            out[e2] = c
        return Poly(self.chart, out)

    # -- rendering ----------------------------------------------------------

    def _mono_str(self, e) -> str:
        parts = []
        for i, k in enumerate(e):
            if k == 1:
                parts.append(self.chart.names[i])
            elif k > 1:
                parts.append(f"{self.chart.names[i]}^{k}")
        return "*".join(parts)

    def __str__(self):
        if not self.terms:
            return "0"
        chunks = []
        for e in sorted(self.terms, key=grlex_key, reverse=True):
            c = self.terms[e]
            mono = self._mono_str(e)
            mag = abs(c)
            if mono:
                body = mono if mag == 1 else f"{mag}*{mono}"
            else:
                body = str(mag)
            if not chunks:
                chunks.append(body if c > 0 else f"-{body}")
            else:
                chunks.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(chunks)

    def __repr__(self):
        return f"Poly({self})"


class RatFunc:
    """Quotient of two polynomials on a common chart.

    Normalisation cancels monomial and scalar content and fixes the sign of
    the denominator's leading coefficient; no polynomial gcd is attempted.
    Equality is semantic (cross-multiplication).
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        require_same_chart(num, den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator polynomial")
        if num.is_zero():
            den = Poly.const(num.chart, 1)
        else:
            shared = tuple(
                min(a, b) for a, b in zip(num.monomial_content(), den.monomial_content())
            )
            if any(shared):
                neg = tuple(-k for k in shared)
                num = num.shift_monomial(neg)
                den = den.shift_monomial(neg)
            # scale so the denominator has coprime integer coefficients with a
            # positive leading coefficient; no polynomial gcd is attempted
            scale = den.scalar_content()
            if den.leading()[1] < 0:
                scale = -scale
            num = num * (1 / scale)
            den = den * (1 / scale)
        self.num = num
        self.den = den

    @property
    def chart(self):
        return self.num.chart

    @classmethod
    def from_poly(cls, p: Poly):
        return cls(p, Poly.const(p.chart, 1))

    @classmethod
    def const(cls, chart, value):
        return cls.from_poly(Poly.const(chart, value))

    def is_zero(self):
        return self.num.is_zero()

    def is_poly(self):
        return self.den.is_constant()

    def as_poly(self) -> Poly:
        if not self.is_poly():
            raise ValueError(f"{self} has a nontrivial denominator")
        return self.num / self.den.constant_value()

    def __bool__(self):
        return not self.is_zero()

    def _lift(self, other):
        if isinstance(other, RatFunc):
            require_same_chart(self, other)
            return other
        if isinstance(other, Poly):
            require_same_chart(self, other)
            return RatFunc.from_poly(other)
        if isinstance(other, (int, Fraction)):
            return RatFunc.const(self.chart, other)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return RatFunc(self.num * o.den - o.num * self.den, self.den * o.den)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return RatFunc(self.den, self.num) ** (-n)
        return RatFunc(self.num**n, self.den**n)

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return (self.num * o.den - o.num * self.den).is_zero()

    def __hash__(self):
        raise TypeError("RatFunc is unhashable (semantic equality)")

    def partial(self, coord) -> "RatFunc":
        i = coord if isinstance(coord, int) else self.chart.index(coord)
        if self.is_poly():
            return RatFunc.from_poly(self.as_poly().partial(i))
        n, d = self.num, self.den
        return RatFunc(n.partial(i) * d - n * d.partial(i), d * d)

    def eval(self, point) -> Fraction:
        d = self.den.eval(point)
        if not d:
            raise ZeroDivisionError("denominator vanishes at evaluation point")
        return self.num.eval(point) / d

    def eval_float(self, point) -> float:
        d = self.den.eval_float(point)
        if d == 0.0:
            raise ZeroDivisionError("denominator vanishes at evaluation point")
        return self.num.eval_float(point) / d

    def __str__(self):
        if self.is_poly():
            return str(self.as_poly())
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RatFunc({self})"


class ParamRegistry:
    """Shared registry of unknown ansatz parameters for one determining system."""

    def __init__(self):
        self.names: list[str] = []

    def new_param(self, name: str) -> int:
        self.names.append(name)
        return len(self.names) - 1

    def new_block(self, prefix: str, labels) -> list[int]:
        return [self.new_param(f"{prefix}[{lab}]") for lab in labels]

    @property
    def size(self) -> int:
        return len(self.names)


CONST = -1  # linear-form key reserved for the parameter-free part


class ParamPoly:
    """Polynomial whose coefficients are affine-linear in registry parameters.

    Internally ``terms`` maps an exponent tuple to a linear form
    {param id: Fraction} where id -1 holds the constant part.
    """

    __slots__ = ("chart", "registry", "terms")

    def __init__(self, chart, registry, terms):
        self.chart = chart
        self.registry = registry
        self.terms = terms

    @classmethod
    def zero(cls, chart, registry):
        return cls(chart, registry, {})

    @classmethod
    def from_poly(cls, p: Poly, registry):
        return cls(p.chart, registry, {e: {CONST: c} for e, c in p.terms.items()})

    @classmethod
    def param(cls, chart, registry, pid: int, exp=None):
        e = exp if exp is not None else (0,) * chart.dim
        return cls(chart, registry, {tuple(e): {pid: QQ(1)}})

    def is_zero(self):
        return not self.terms

    def is_param_free(self):
        return all(set(lf) <= {CONST} for lf in self.terms.values())

    def as_poly(self) -> Poly:
        if not self.is_param_free():
            raise LinearityError(f"{self} still contains parameters")
        return Poly(self.chart, {e: lf[CONST] for e, lf in self.terms.items() if lf.get(CONST)})

    def _check(self, other):
        require_same_chart(self, other)
        if self.registry is not other.registry:
            raise ValueError("parameter registries differ")

    def _lift(self, other):
        if isinstance(other, ParamPoly):
            self._check(other)
            return other
        if isinstance(other, Poly):
            require_same_chart(self, other)
            return ParamPoly.from_poly(other, self.registry)
        if isinstance(other, (int, Fraction)):
            return ParamPoly.from_poly(Poly.const(self.chart, other), self.registry)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return ParamPoly(self.chart, self.registry, K.nested_add(self.terms, o.terms))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __neg__(self):
        return ParamPoly(
            self.chart, self.registry, {e: K.map_neg(lf) for e, lf in self.terms.items()}
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ParamPoly(
                self.chart, self.registry, K.nested_scale(self.terms, as_fraction(other))
            )
        if isinstance(other, Poly):
            require_same_chart(self, other)
            return ParamPoly(
                self.chart, self.registry, K.ppoly_mul_poly(self.terms, other.terms)
            )
        if isinstance(other, ParamPoly):
            self._check(other)
            if other.is_param_free():
                return self * other.as_poly()
            if self.is_param_free():
                return other * self.as_poly()
            raise LinearityError("product of two parameter-dependent polynomials")
        return NotImplemented

    __rmul__ = __mul__

    def partial(self, coord) -> "ParamPoly":
        i = coord if isinstance(coord, int) else self.chart.index(coord)
        return ParamPoly(self.chart, self.registry, K.ppoly_partial(self.terms, i))

    def specialize(self, assignment: dict) -> Poly:
        """Substitute rationals for parameters; unlisted parameters become 0."""
        out = {}
        for e, lf in self.terms.items():
            total = QQ(0)
            for pid, c in lf.items():
                if pid == CONST:
                    total += c
                else:
                    total += c * as_fraction(assignment.get(pid, 0))
            if total:
                out[e] = total
        return Poly(self.chart, out)

    def __str__(self):
        if not self.terms:
            return "0"
        reg = self.registry
        chunks = []
        for e in sorted(self.terms, key=grlex_key, reverse=True):
            lf = self.terms[e]
            inner = []
            for pid in sorted(lf, key=lambda p: (p < 0, p)):
                c = lf[pid]
                label = "1" if pid == CONST else reg.names[pid]
                inner.append(f"{c}*{label}" if label != "1" else str(c))
            body = " + ".join(inner)
            mono = Poly(self.chart, {e: QQ(1)})._mono_str(e)
            chunks.append(f"({body})*{mono}" if mono else f"({body})")
        return " + ".join(chunks)

    def __repr__(self):
        return f"ParamPoly({self})"


class RadicalFunc:
    """Element a + b*sqrt(Q) over the rational functions of a chart.

    Q is a fixed polynomial (the radicand).  Sums, products, quotients and
    partial derivatives stay in this form; 1/sqrt(Q) is sqrt(Q)/Q.
    """

    __slots__ = ("rat", "rad", "radicand")

    def __init__(self, rat: RatFunc, rad: RatFunc, radicand: Poly):
        require_same_chart(rat, rad)
        require_same_chart(rat, radicand)
        self.rat = rat
        self.rad = rad
        self.radicand = radicand

    @property
    def chart(self):
        return self.rat.chart

    @classmethod
    def sqrt(cls, radicand: Poly):
        chart = radicand.chart
        return cls(RatFunc.const(chart, 0), RatFunc.const(chart, 1), radicand)

    @classmethod
    def lift(cls, value, radicand: Poly):
        chart = radicand.chart
        if isinstance(value, RadicalFunc):
            return value
        if isinstance(value, RatFunc):
            r = value
        elif isinstance(value, Poly):
            r = RatFunc.from_poly(value)
        else:
            r = RatFunc.const(chart, as_fraction(value))
        return cls(r, RatFunc.const(chart, 0), radicand)

    def is_zero(self):
        return self.rat.is_zero() and self.rad.is_zero()

    def _lift(self, other):
        if isinstance(other, RadicalFunc):
            if not (other.radicand - self.radicand).is_zero():
                raise ValueError("mixed radicands")
            return other
        if isinstance(other, (RatFunc, Poly, int, Fraction)):
            return RadicalFunc.lift(other, self.radicand)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return RadicalFunc(self.rat + o.rat, self.rad + o.rad, self.radicand)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return RadicalFunc(self.rat - o.rat, self.rad - o.rad, self.radicand)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return RadicalFunc(-self.rat, -self.rad, self.radicand)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        q = RatFunc.from_poly(self.radicand)
        return RadicalFunc(
            self.rat * o.rat + self.rad * o.rad * q,
            self.rat * o.rad + self.rad * o.rat,
            self.radicand,
        )

    __rmul__ = __mul__

    def inverse(self) -> "RadicalFunc":
        # 1/(a + b S) = (a - b S)/(a^2 - b^2 Q)
        q = RatFunc.from_poly(self.radicand)
        denom = self.rat * self.rat - self.rad * self.rad * q
        if denom.is_zero():
            raise ZeroDivisionError("radical element is not invertible")
        return RadicalFunc(self.rat / denom, -self.rad / denom, self.radicand)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def partial(self, coord) -> "RadicalFunc":
        i = coord if isinstance(coord, int) else self.chart.index(coord)
        # d(b*S) = b' S + b Q'/(2S) = (b' + b Q'/(2Q)) S
        new_rad = self.rad.partial(i)
        if not self.rad.is_zero():
            q = RatFunc.from_poly(self.radicand)
            dq = RatFunc.from_poly(self.radicand.partial(i))
            new_rad = new_rad + self.rad * dq / (2 * q)
        return RadicalFunc(self.rat.partial(i), new_rad, self.radicand)

    def eval_float(self, point) -> float:
        qv = self.radicand.eval_float(point)
        if qv < 0:
            raise ValueError(f"negative radicand {qv} at {point}")
        return self.rat.eval_float(point) + self.rad.eval_float(point) * _fsqrt(qv)

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return (self - o).is_zero()

    def __hash__(self):
        raise TypeError("RadicalFunc is unhashable")

    def __str__(self):
        if self.rad.is_zero():
            return str(self.rat)
        s = f"sqrt({self.radicand})"
        if self.rat.is_zero():
            return f"({self.rad})*{s}"
        return f"({self.rat}) + ({self.rad})*{s}"

    def __repr__(self):
        return f"RadicalFunc({self})"


def coeff_is_zero(c) -> bool:
    """Zero test across all coefficient domains (incl. bare scalars)."""
    if isinstance(c, (int, Fraction)):
        return not c
    return c.is_zero()


def coeff_partial(c, i: int):
    return c.partial(i)
