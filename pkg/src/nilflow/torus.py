"""The skew-shift (x, y) -> (x + alpha, y + x + beta) on the 2-torus."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._backend import ANCHOR_INTERVAL
from .arith import (ExtendedReal, _check_range, _fixed_to_dd, _phase_fixed, cf_expand, circle_dist,
                    named_rotation)
from .errors import DomainError


@dataclass(frozen=True)
class SkewShiftParams:
    alpha: ExtendedReal
    beta: ExtendedReal
    cf: object = field(repr=False, compare=False)
    name: str = "custom"

    @classmethod
    def create(cls, alpha, beta=0.0, depth=40, rel_eps=None, name=None):
        """Validate alpha in (0, 1) irrational (at the given CF depth) and reduce beta."""
        if isinstance(alpha, str):
            name = name or alpha
            alpha = named_rotation(alpha)
        alpha = ExtendedReal.coerce(alpha)
        cf = cf_expand(alpha, depth, rel_eps=rel_eps)
        if cf.is_rational:
            raise DomainError(f"alpha = {alpha.hi!r} is rational to working precision")
        beta = ExtendedReal.coerce(beta).frac()
        return cls(alpha, beta, cf, name or "custom")

    @property
    def dd(self):
        """(alpha_hi, alpha_lo, beta_hi, beta_lo) for kernels."""
        return self.alpha.hi, self.alpha.lo, self.beta.hi, self.beta.lo


@dataclass(frozen=True)
class TorusPoint:
    x: ExtendedReal
    y: ExtendedReal

    def __post_init__(self):
        object.__setattr__(self, "x", ExtendedReal.coerce(self.x).frac())
        object.__setattr__(self, "y", ExtendedReal.coerce(self.y).frac())

    @classmethod
    def of(cls, x, y):
        return cls(ExtendedReal.coerce(x), ExtendedReal.coerce(y))

    def vertical_shift(self, dy):
        return TorusPoint(self.x, self.y + dy)

    def shift(self, dx, dy):
        return TorusPoint(self.x + dx, self.y + dy)

    def as_floats(self):
        return self.x.hi + self.x.lo, self.y.hi + self.y.lo

    @property
    def dd(self):
        return self.x.hi, self.x.lo, self.y.hi, self.y.lo


def d1(p, q):
    return circle_dist(p.x - q.x)


def d2(p, q):
    return circle_dist(p.y - q.y)


def step(params, p):
    return TorusPoint(p.x + params.alpha, p.y + p.x + params.beta)


def iterate(params, p, n):
    """Closed form (x + n alpha, y + n x + n beta + n(n-1)/2 alpha), any sign of n.

    The polynomial is the exact algebraic form of the n-th power for negative
    n as well, so no backward stepping is needed.
    """
    n = _check_range(n)
    A, B = params.alpha.fixed, params.beta.fixed
    X, Y = p.x.fixed, p.y.fixed
    x = _fixed_to_dd(_phase_fixed(1, 0, n, A, X, Y, B))
    y = _fixed_to_dd(_phase_fixed(0, 1, n, A, X, Y, B))
    return TorusPoint(ExtendedReal(*x), ExtendedReal(*y))


def blocks(n0, count, size=ANCHOR_INTERVAL):
    """Split [n0, n0 + count) into anchored blocks (start, length)."""
    start = n0
    end = n0 + count
    while start < end:
        length = min(size, end - start)
        yield start, length
        start += length


def orbit_segment(params, p, n0, count):
    """Points Phi^{n0} p, ..., Phi^{n0+count-1} p as a (count, 2) float array.

    Each block of 2**20 points is re-anchored at its exact closed-form start and
    advanced by compensated double-double increments.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    _check_range(n0)
    _check_range(n0 + count - 1)
    out = np.empty((count, 2))
    ah, al, bh, bl = params.dd
    pos = 0
    for start, length in blocks(n0, count):
        anchor = iterate(params, p, start)
        xs, ys = kernels.orbit_block(*anchor.dd, ah, al, bh, bl, length)
        out[pos:pos + length, 0] = xs
        out[pos:pos + length, 1] = ys
        pos += length
    return out


def orbit_points(params, p, n0, count):
    """Like `orbit_segment` but returns exact `TorusPoint` objects (small counts)."""
    return [iterate(params, p, n0 + k) for k in range(count)]
