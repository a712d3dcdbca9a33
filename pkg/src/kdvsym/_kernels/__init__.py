"""Kernel lane selection.

The package ships two implementations of its hot arithmetic kernels: a
Cython extension (`_ckernel`) and a pure-Python twin (`pykernel`).  The
compiled lane is preferred when the extension was built; the environment
variable KDVSYM_KERNEL ("c" or "py") overrides the choice.  Both lanes are
drop-in equivalent; `benchmarks/bench_kernels.py` compares them.
"""

from __future__ import annotations

import os


def load_lane(name: str):
    """Return the kernel module for an explicit lane ("c" or "py")."""
    if name == "py":
        from . import pykernel

        return pykernel
    if name == "c":
        from . import _ckernel  # type: ignore[attr-defined]

        return _ckernel
    raise ValueError(f"unknown kernel lane {name!r} (expected 'c' or 'py')")


def _select():
    forced = os.environ.get("KDVSYM_KERNEL")
    if forced:
        return load_lane(forced), forced
    try:
        return load_lane("c"), "c"
    except ImportError:
        return load_lane("py"), "py"


impl, _lane = _select()


def kernel_name() -> str:
    """Name of the active kernel lane ("c" or "py")."""
    return _lane


map_add = impl.map_add
map_sub = impl.map_sub
map_neg = impl.map_neg
map_scale = impl.map_scale
poly_mul = impl.poly_mul
poly_partial = impl.poly_partial
poly_eval = impl.poly_eval
nested_add = impl.nested_add
nested_scale = impl.nested_scale
ppoly_mul_poly = impl.ppoly_mul_poly
ppoly_partial = impl.ppoly_partial
wedge_indices = impl.wedge_indices
insert_index = impl.insert_index
rref = impl.rref
