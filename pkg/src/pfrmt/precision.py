"""Scalar precision handling.

``"double"`` arrays are plain ``complex128``.  ``"extended"`` arrays are
object arrays of :class:`mpmath.mpc`; arithmetic on them must run inside
:func:`working_precision` so that intermediate results keep the extra
digits.
"""

import contextlib

import mpmath
import numpy as np

EXTENDED_DPS = 32

PRECISIONS = ("double", "extended")

# reciprocal condition number below which a matrix counts as singular
RCOND_THRESHOLD = {"double": 1e-13, "extended": 1e-28}

# moment matrices beyond this order should be built in extended precision
EXTENDED_RECOMMENDED_ABOVE = 10


def check_precision(precision):
    if precision not in PRECISIONS:
        raise ValueError(f"unknown precision {precision!r}; expected one of {PRECISIONS}")
    return precision


def working_precision(precision):
    if precision == "extended":
        return mpmath.workdps(EXTENDED_DPS)
    return contextlib.nullcontext()


def is_extended(a):
    return isinstance(a, np.ndarray) and a.dtype == object


def precision_of(a):
    return "extended" if is_extended(a) else "double"


def as_array(a, precision="double"):
    """Convert ``a`` to a 2D/1D array in the requested precision."""
    check_precision(precision)
    if precision == "double":
        if is_extended(a):
            return np.vectorize(complex, otypes=[complex])(a)
        return np.asarray(a, dtype=complex)
    if is_extended(a):
        return a.copy()
    src = np.asarray(a, dtype=complex)
    with working_precision("extended"):
        out = np.empty(src.shape, dtype=object)
        for idx, v in np.ndenumerate(src):
            out[idx] = mpmath.mpc(v.real, v.imag)
    return out


def to_complex(x):
    """Collapse a scalar of either precision to a Python complex."""
    return complex(x)
