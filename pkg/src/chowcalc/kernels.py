"""Kernel backend selection.

The compiled extension is used when it imports; setting
``CHOWCALC_PURE_PYTHON=1`` forces the reference implementation.  Calls that
overflow 64-bit coefficients in the compiled path are retried in Python.
"""

from __future__ import annotations

import os

from . import _kernels_py as _py

BITS = _py.BITS
MASK = _py.MASK

_c = None
if os.environ.get("CHOWCALC_PURE_PYTHON", "").strip() not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _c
    except ImportError:
        _c = None

BACKEND = _c.BACKEND if _c is not None else _py.BACKEND


def _dispatch(name):
    pyf = getattr(_py, name)
    if _c is None:
        return pyf
    cf = getattr(_c, name)

    def call(*args):
        try:
            return cf(*args)
        except OverflowError:
            return pyf(*args)

    call.__name__ = name
    call.__doc__ = pyf.__doc__
    return call


apply_table = _dispatch("apply_table")
multiply = _dispatch("multiply")
leibniz_rows = _dispatch("leibniz_rows")
delta_tree = _dispatch("delta_tree")
add_into = _py.add_into


def pack(exps) -> int:
    k = 0
    for i, e in enumerate(exps):
        if not 0 <= e <= MASK:
            raise OverflowError(f"exponent {e} does not fit the packed encoding")
        k |= e << (BITS * i)
    return k


def unpack(key: int, n: int) -> tuple:
    return tuple((key >> (BITS * i)) & MASK for i in range(n))
