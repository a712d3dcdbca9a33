"""Recursive-descent parser for the shared expression grammar.

Grammar (whitespace-insensitive; juxtaposition multiplies):

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/" | juxtaposition) unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          -- right associative
    atom   := INT | NAME | "@" NAME | "(" expr ")" | FUNC "(" expr ")"

Identifiers are `[a-zA-Z][a-zA-Z0-9_]*`; integers combine with "/" into
exact rationals.  On a coordinate chart, a NAME resolves to a coordinate,
`d<coord>` to the coordinate differential, and `@<coord>` to the partial
derivative basis field.  `^` is the integer power between scalars and the
wedge product when either side is a form.  The closed-form dialect adds
function calls (sech, tanh, exp, ln, sqrt) and leaves identifiers free.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .chart import CoordChart
from .exterior import DiffForm, VectorFieldExpr, wedge
from .symkernel import Poly, RatFunc

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<name>[a-zA-Z][a-zA-Z0-9_]*)|(?P<op>[-+*/^()@,]))"
)


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, source: str = ""):
        self.pos = pos
        marker = f" (at position {pos})"
        super().__init__(f"{message}{marker}")


def tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos, source)
        if m.lastgroup == "int":
            tokens.append(("int", m.group("int"), m.start("int")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    return tokens


class _Parser:
    """Shared parsing skeleton; subclasses define atoms and the value algebra."""

    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.source))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos, self.source)

    def parse(self):
        value = self.expr()
        kind, val, pos = self.peek()
        if kind is not None:
            raise ParseError(f"unexpected trailing {val!r}", pos, self.source)
        return value

    def expr(self):
        value = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.i += 1
                rhs = self.term()
                value = self.add(value, rhs) if val == "+" else self.sub(value, rhs)
            else:
                return value

    _ATOM_STARTS = {("op", "("), ("op", "@")}

    def _starts_atom(self, kind, val):
        return kind in ("int", "name") or (kind, val) in self._ATOM_STARTS

    def term(self):
        value = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.i += 1
                rhs = self.unary()
                value = self.mul(value, rhs) if val == "*" else self.div(value, rhs)
            elif self._starts_atom(kind, val):
                rhs = self.unary()
                value = self.mul(value, rhs)
            else:
                return value

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.i += 1
            return self.neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.i += 1
            return self.pow(base, self.unary())
        return base

    # the value algebra, provided by subclasses
    def atom(self):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def div(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def pow(self, a, b):
        raise NotImplementedError


class _ChartParser(_Parser):
    """Evaluates expressions to Poly/RatFunc scalars, DiffForms, or fields."""

    def __init__(self, source: str, chart: CoordChart):
        super().__init__(source)
        self.chart = chart

    # values are Poly | RatFunc | DiffForm | VectorFieldExpr

    def atom(self):
        kind, val, pos = self.next()
        if kind == "int":
            return Poly.const(self.chart, Fraction(int(val)))
        if kind == "name":
            if self.chart.has(val):
                return Poly.var(self.chart, val)
            if val.startswith("d") and self.chart.has(val[1:]):
                return DiffForm.d_coord(self.chart, val[1:])
            raise ParseError(f"unknown identifier {val!r}", pos, self.source)
        if kind == "op" and val == "@":
            k2, v2, p2 = self.next()
            if k2 != "name" or not self.chart.has(v2):
                raise ParseError("expected a coordinate name after '@'", p2, self.source)
            return VectorFieldExpr.basis(self.chart, v2)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ParseError(f"unexpected token {val!r}", pos, self.source)

    @staticmethod
    def _is_scalar(v):
        return isinstance(v, (Poly, RatFunc))

    def add(self, a, b):
        if self._is_scalar(a) and self._is_scalar(b):
            return a + b
        if isinstance(a, DiffForm) and isinstance(b, DiffForm):
            return a + b
        if isinstance(a, VectorFieldExpr) and isinstance(b, VectorFieldExpr):
            return a + b
        raise ParseError("cannot add values of different kinds", 0, self.source)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def neg(self, a):
        return -a

    def mul(self, a, b):
        if self._is_scalar(a) and self._is_scalar(b):
            return a * b
        if isinstance(a, DiffForm) and isinstance(b, DiffForm):
            return wedge(a, b)
        if self._is_scalar(a) and isinstance(b, (DiffForm, VectorFieldExpr)):
            return b.scale(a)
        if self._is_scalar(b) and isinstance(a, (DiffForm, VectorFieldExpr)):
            return a.scale(b)
        raise ParseError("invalid product", 0, self.source)

    def div(self, a, b):
        if not self._is_scalar(b):
            raise ParseError("division by a non-scalar", 0, self.source)
        if self._is_scalar(a):
            return a / b
        inv = RatFunc.const(self.chart, 1) / (b if isinstance(b, RatFunc) else RatFunc.from_poly(b))
        return a.scale(inv)

    def pow(self, a, b):
        if isinstance(a, DiffForm) or isinstance(b, DiffForm):
            fa = a if isinstance(a, DiffForm) else DiffForm.scalar(self.chart, a)
            fb = b if isinstance(b, DiffForm) else DiffForm.scalar(self.chart, b)
            return wedge(fa, fb)
        if self._is_scalar(a) and self._is_scalar(b):
            n = _constant_int(b)
            if n is None:
                raise ParseError("exponent must be a constant integer", 0, self.source)
            if n < 0:
                return (RatFunc.from_poly(a) if isinstance(a, Poly) else a) ** n
            return a**n
        raise ParseError("invalid power", 0, self.source)


def _constant_int(v):
    try:
        c = v.as_poly().constant_value() if isinstance(v, RatFunc) else v.constant_value()
    except ValueError:
        return None
    if c.denominator != 1:
        return None
    return c.numerator


def parse_expression(source: str, chart: CoordChart):
    """Parse to whatever the expression denotes: scalar, form, or field."""
    return _ChartParser(source, chart).parse()


def parse_poly(source: str, chart: CoordChart) -> Poly:
    value = parse_expression(source, chart)
    if isinstance(value, RatFunc):
        if not value.is_poly():
            raise ParseError("expression is not polynomial", 0, source)
        return value.as_poly()
    if not isinstance(value, Poly):
        raise ParseError("expression is not a polynomial scalar", 0, source)
    return value


def parse_ratfunc(source: str, chart: CoordChart) -> RatFunc:
    value = parse_expression(source, chart)
    if isinstance(value, Poly):
        return RatFunc.from_poly(value)
    if not isinstance(value, RatFunc):
        raise ParseError("expression is not a scalar", 0, source)
    return value


def parse_form(source: str, chart: CoordChart, grade: int | None = None) -> DiffForm:
    value = parse_expression(source, chart)
    if isinstance(value, (Poly, RatFunc)):
        value = DiffForm.scalar(chart, value)
    if not isinstance(value, DiffForm):
        raise ParseError("expression is not a differential form", 0, source)
    if grade is not None and not value.is_zero() and value.grade != grade:
        raise ParseError(f"expected a grade-{grade} form", 0, source)
    return value


def parse_field(source: str, chart: CoordChart) -> VectorFieldExpr:
    value = parse_expression(source, chart)
    if not isinstance(value, VectorFieldExpr):
        raise ParseError("expression is not a vector field", 0, source)
    return value
