"""Exact Lie-symmetry analysis of the KdV equation via differential forms."""

from .chart import CoordChart
from .symkernel import ParamPoly, ParamRegistry, Poly, QQ, RadicalFunc, RatFunc
from .exterior import (
    DiffForm,
    VectorFieldExpr,
    ext_d,
    interior,
    lie_derivative,
    proportionality_test,
    wedge,
)

__version__ = "0.1.0"
