"""Coordinate charts: ordered, named coordinates with jet roles."""

from __future__ import annotations

INDEPENDENT = "independent"
DEPENDENT = "dependent"
DERIVATIVE = "derivative"


class ChartError(ValueError):
    pass


class CoordChart:
    """An ordered tuple of coordinate names, each tagged with a jet role.

    The index order of the chart fixes the monomial order, the rendering
    order of forms, and every pivoting decision downstream, so two charts
    compare equal only when names and roles agree exactly.
    """

    __slots__ = ("names", "kinds", "_index")

    def __init__(self, names, kinds=None):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ChartError(f"duplicate coordinate names in {names}")
        if kinds is None:
            kinds = (INDEPENDENT,) * len(names)
        kinds = tuple(kinds)
        if len(kinds) != len(names):
            raise ChartError("kinds must match names")
        for k in kinds:
            if k not in (INDEPENDENT, DEPENDENT, DERIVATIVE):
                raise ChartError(f"unknown coordinate kind {k!r}")
        self.names = names
        self.kinds = kinds
        self._index = {n: i for i, n in enumerate(names)}

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ChartError(f"unknown coordinate {name!r} in chart {self.names}") from None

    def has(self, name: str) -> bool:
        return name in self._index

    def base_indices(self):
        """Indices of independent and dependent (non-derivative) coordinates."""
        return tuple(
            i for i, k in enumerate(self.kinds) if k in (INDEPENDENT, DEPENDENT)
        )

    def independent_indices(self):
        return tuple(i for i, k in enumerate(self.kinds) if k == INDEPENDENT)

    def __eq__(self, other):
        return (
            isinstance(other, CoordChart)
            and self.names == other.names
            and self.kinds == other.kinds
        )

    def __hash__(self):
        return hash((self.names, self.kinds))

    def __repr__(self):
        return f"CoordChart({', '.join(self.names)})"


def require_same_chart(a, b):
    if a.chart != b.chart:
        raise ChartError(f"chart mismatch: {a.chart!r} vs {b.chart!r}")
