"""Continued fractions of rotation numbers and exact reduction of quadratic phases.

Rotation numbers and torus coordinates are carried as `ExtendedReal`
double-doubles.  Double-doubles are dyadic rationals, so every phase of the
form ``a(x + n alpha) + b(y + n x + n beta + C(n,2) alpha)`` is reduced mod 1
*exactly* in integer fixed point before a single final rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from . import _dd
from .errors import DomainError, PreconditionError

_FRAC_BITS = 256
_ONE = 1 << _FRAC_BITS
_MASK = _ONE - 1
MAX_ITERATE = 1 << 40

# relative uncertainty attributed to a double-double value
DD_REL_EPS = 2.0 ** -104
# a disagreement interval narrower than this means the remainder vanished
_RATIONAL_WIDTH = 1e-6


@dataclass(frozen=True)
class ExtendedReal:
    """Unevaluated sum ``hi + lo`` with ``|lo| <= ulp(hi)/2`` (about 32 digits)."""

    hi: float
    lo: float = 0.0

    def __post_init__(self):
        hi, lo = float(self.hi), float(self.lo)
        if not (math.isfinite(hi) and math.isfinite(lo)):
            raise DomainError("ExtendedReal components must be finite")
        s = hi + lo
        err = lo - (s - hi)
        object.__setattr__(self, "hi", s)
        object.__setattr__(self, "lo", err)

    @classmethod
    def from_fraction(cls, value):
        value = Fraction(value)
        hi = float(value)
        lo = float(value - Fraction(hi))
        return cls(hi, lo)

    @classmethod
    def from_string(cls, text):
        """Parse a decimal literal exactly, then round to double-double."""
        return cls.from_fraction(Fraction(text.strip()))

    @classmethod
    def coerce(cls, value):
        if isinstance(value, ExtendedReal):
            return value
        if isinstance(value, str):
            return cls.from_string(value)
        if isinstance(value, (Fraction, int)):
            return cls.from_fraction(value)
        return cls(float(value))

    def to_fraction(self):
        return Fraction(self.hi) + Fraction(self.lo)

    @cached_property
    def fixed(self):
        """floor(value * 2**256) as an integer."""
        nh, dh = self.hi.as_integer_ratio()
        nl, dl = self.lo.as_integer_ratio()
        return ((nh * dl + nl * dh) << _FRAC_BITS) // (dh * dl)

    def frac(self):
        return ExtendedReal(*_fixed_to_dd(self.fixed))

    def __float__(self):
        return self.hi

    def __add__(self, other):
        other = ExtendedReal.coerce(other)
        return ExtendedReal(*_dd.dd_add(self.hi, self.lo, other.hi, other.lo))

    __radd__ = __add__

    def __neg__(self):
        return ExtendedReal(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-ExtendedReal.coerce(other))

    def __rsub__(self, other):
        return ExtendedReal.coerce(other) - self

    def __repr__(self):
        return f"ExtendedReal({self.hi!r}, {self.lo!r})"


def quadratic_surd(D):
    """Fractional part of sqrt(D) for a non-square positive integer D."""
    r = math.isqrt(D)
    if r * r == D:
        raise DomainError(f"{D} is a perfect square")
    bits = 240
    root = Fraction(math.isqrt(D << (2 * bits)), 1 << bits)
    return ExtendedReal.from_fraction(root - r)


def golden():
    """(sqrt(5) - 1)/2, partial quotients all 1."""
    bits = 240
    root = Fraction(math.isqrt(5 << (2 * bits)), 1 << bits)
    return ExtendedReal.from_fraction((root - 1) / 2)


def silver():
    """sqrt(2) - 1, partial quotients all 2."""
    return quadratic_surd(2)


NAMED_NUMBERS = {"golden": golden, "silver": silver}


def named_rotation(spec):
    """Resolve 'golden', 'silver', 'sqrtD' or a decimal literal."""
    key = spec.strip().lower()
    if key in NAMED_NUMBERS:
        return NAMED_NUMBERS[key]()
    if key.startswith("sqrt"):
        return quadratic_surd(int(key[4:]))
    return ExtendedReal.from_string(key)


@dataclass(frozen=True)
class ContinuedFraction:
    value: ExtendedReal
    partial_quotients: tuple
    # (p_k, q_k) for k = 0..depth with (p_0, q_0) = (0, 1)
    convergents: tuple
    is_rational: bool
    precision_limited: bool

    @property
    def depth(self):
        return len(self.partial_quotients)

    @property
    def denominators(self):
        return [q for _, q in self.convergents]


def cf_expand(x, depth, rel_eps=None):
    """Partial quotients of x in (0, 1) that are certain at the given precision.

    The expansion is run on both ends of ``[x - eps, x + eps]`` and stops when
    their quotients disagree.  A disagreement on a very narrow interval means
    the remainder vanished (rational input); otherwise precision ran out and
    ``precision_limited`` is set.
    """
    x = ExtendedReal.coerce(x)
    if depth < 1:
        raise PreconditionError("depth must be >= 1")
    value = x.to_fraction()
    if not (0 < value < 1):
        raise DomainError(f"cf_expand needs 0 < x < 1, got {x.hi!r}")
    eps = Fraction(DD_REL_EPS if rel_eps is None else rel_eps) * value
    lo, hi = max(value - eps, Fraction(0)), min(value + eps, Fraction(1))

    quotients = []
    rational = False
    limited = False
    while len(quotients) < depth:
        if lo <= 0:
            if hi < _RATIONAL_WIDTH:
                rational = True
            else:
                limited = True
            break
        a_lo = 1 / hi
        a_hi = 1 / lo
        fl, fh = math.floor(a_lo), math.floor(a_hi)
        if fl == fh:
            quotients.append(fl)
            lo, hi = a_lo - fl, a_hi - fl
            continue
        if fh - fl == 1 and a_hi - a_lo < _RATIONAL_WIDTH:
            quotients.append(fh)
            rational = True
        else:
            limited = True
        break

    convergents = [(0, 1)]
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for a in quotients:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        convergents.append((p, q))
    return ContinuedFraction(x, tuple(quotients), tuple(convergents), rational, limited)


@dataclass(frozen=True)
class BoundedTypeReport:
    max_quotient: int
    C_alpha_estimate: float
    depth: int
    is_rational: bool
    precision_limited: bool

    @property
    def certified_depth(self):
        # a finite expansion certifies nothing beyond what was computed
        return self.depth


def is_bounded_type(cf):
    """Largest stored quotient and max q_{k+1}/q_k, valid up to ``cf.depth`` only."""
    qs = cf.denominators
    if cf.is_rational:
        ratio = max((b / a for a, b in zip(qs, qs[1:])), default=float("nan"))
        return BoundedTypeReport(max(cf.partial_quotients, default=0), ratio, cf.depth, True,
                                 cf.precision_limited)
    if cf.depth < 3:
        raise PreconditionError("bounded-type report needs depth >= 3")
    ratio = max(b / a for a, b in zip(qs, qs[1:]))
    return BoundedTypeReport(max(cf.partial_quotients), ratio, cf.depth, False, cf.precision_limited)


def circle_dist(t):
    """Distance from t to the nearest integer, ||t||."""
    if isinstance(t, ExtendedReal):
        r = t.fixed & _MASK
        return min(r, _ONE - r) / _ONE
    return abs(t - math.floor(t + 0.5))


def _fixed_to_dd(v):
    r = v & _MASK
    hi = r / _ONE
    hi_fixed = int(math.ldexp(hi, _FRAC_BITS))
    lo = (r - hi_fixed) / _ONE
    return hi, lo


def _check_range(n):
    if not isinstance(n, int):
        n = int(n)
    if abs(n) > MAX_ITERATE:
        raise DomainError(f"iterate index {n} exceeds 2**40")
    return n


def _fixed_of(v):
    """floor(v * 2**256) for an ExtendedReal or anything `ExtendedReal.coerce` accepts."""
    if isinstance(v, float):
        num, den = v.as_integer_ratio()
        return (num << _FRAC_BITS) // den
    return ExtendedReal.coerce(v).fixed


def _phase_fixed(a, b, n, A, X, Y, B):
    c = n * (n - 1) // 2
    return a * (X + n * A) + b * (Y + n * X + n * B + c * A)


def quadratic_phase_dd(a, b, n, alpha, x, y, beta):
    """Double-double of frac(a(x+n alpha) + b(y + n x + n beta + C(n,2) alpha))."""
    n = _check_range(n)
    A, X, Y, B = (_fixed_of(v) for v in (alpha, x, y, beta))
    return _fixed_to_dd(_phase_fixed(int(a), int(b), n, A, X, Y, B))


def reduce_quadratic_phase(a, b, n, alpha, x, y, beta):
    """Fractional part in [0, 1) of the phase of e_{a,b} at the n-th skew-shift iterate.

    The binomial n(n-1)/2 and all products are exact integers; the only
    rounding is the final conversion to double, so the absolute error is
    below 1.2e-16 for |n| <= 2**40.
    """
    hi, lo = quadratic_phase_dd(a, b, n, alpha, x, y, beta)
    s = hi + lo
    return s if s < 1.0 else 0.0


def step_phases_dd(a, b, n, alpha, x, y, beta):
    """Anchor data for the rotation scheme at index n.

    Returns double-doubles of theta_n, the first difference
    ``theta_{n+1} - theta_n = a alpha + b(x + n alpha + beta)`` and the
    constant second difference ``b alpha``, all reduced mod 1.
    """
    n = _check_range(n)
    A, X, Y, B = (_fixed_of(v) for v in (alpha, x, y, beta))
    a, b = int(a), int(b)
    theta = _phase_fixed(a, b, n, A, X, Y, B)
    delta = a * A + b * (X + n * A + B)
    return _fixed_to_dd(theta), _fixed_to_dd(delta), _fixed_to_dd(b * A)
