"""Double-double primitives.

Written against ``+ - *`` and ``np.floor`` only, so the same functions run
elementwise on numpy arrays and compile unchanged under numba.
"""
import numpy as np

from ._backend import jitable

_SPLITTER = 134217729.0  # 2**27 + 1


@jitable
def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


@jitable
def quick_two_sum(a, b):
    s = a + b
    err = b - (s - a)
    return s, err


@jitable
def split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@jitable
def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


@jitable
def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


@jitable
def dd_mul_d(ah, al, b):
    """(ah + al) * b for a double b; exact-input products keep ~106 bits."""
    p, e = two_prod(ah, b)
    e = e + al * b
    return quick_two_sum(p, e)


@jitable
def dd_frac(h, l):
    """Reduce a double-double modulo 1 into [0, 1] (1.0 only by rounding)."""
    h = h - np.floor(h)
    s, e = two_sum(h, l)
    f = np.floor(s)
    s = s - f
    return quick_two_sum(s, e)
