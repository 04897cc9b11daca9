"""Real observables on the 2-torus as finite Fourier series.

``e_{a,b}(x, y) = exp(2 pi i (a x + b y))``.  Real-valuedness is the
Hermitian symmetry ``c_{-a,-b} = conj(c_{a,b})``; kernels only see the
*half spectrum* (b > 0, or b = 0 and a > 0) and double its real part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType

import numpy as np

from .errors import DomainError, IntegrityError

HERMITIAN_TOL = 1e-12


class FourierObservable:
    """Finitely supported Fourier series; immutable."""

    def __init__(self, coeffs=None, sobolev_hint=4.0, name=None):
        clean = {}
        for (a, b), c in dict(coeffs or {}).items():
            c = complex(c)
            if c != 0:
                clean[(int(a), int(b))] = c
        self._coeffs = MappingProxyType(clean)
        self.sobolev_hint = float(sobolev_hint)
        self.name = name

    @property
    def coefficients(self):
        return self._coeffs

    @classmethod
    def constant(cls, value):
        return cls({(0, 0): value})

    @classmethod
    def cos_mode(cls, a, b, amplitude=1.0, phase=0.0):
        """amplitude * cos(2 pi (a x + b y) + phase)."""
        c = 0.5 * amplitude * complex(math.cos(phase), math.sin(phase))
        if (a, b) == (0, 0):
            return cls({(0, 0): amplitude * math.cos(phase)})
        return cls({(a, b): c, (-a, -b): c.conjugate()})

    @classmethod
    def random(cls, rng, radius=16, decay=4.0, modes=None, zero_mean=True):
        """Random real observable with |c_{a,b}| ~ (1 + a^2 + b^2)^(-decay/2)."""
        pairs = [(a, b) for a in range(-radius, radius + 1) for b in range(0, radius + 1)
                 if b > 0 or a > 0]
        if modes is not None and modes < len(pairs):
            pick = rng.choice(len(pairs), size=modes, replace=False)
            pairs = [pairs[i] for i in sorted(pick)]
        coeffs = {}
        for a, b in pairs:
            scale = (1.0 + a * a + b * b) ** (-decay / 2)
            c = scale * complex(rng.standard_normal(), rng.standard_normal())
            coeffs[(a, b)] = c
            coeffs[(-a, -b)] = c.conjugate()
        if not zero_mean:
            coeffs[(0, 0)] = float(rng.standard_normal())
        return cls(coeffs, sobolev_hint=decay)

    # -- structure ---------------------------------------------------------

    @property
    def radius(self):
        return max((max(abs(a), abs(b)) for a, b in self._coeffs), default=0)

    @property
    def mean(self):
        return float(self._coeffs.get((0, 0), 0j).real)

    def is_zero(self):
        return not self._coeffs

    def hermitian_defect(self):
        return max((abs(c - self._coeffs.get((-a, -b), 0j).conjugate())
                    for (a, b), c in self._coeffs.items()), default=0.0)

    def is_real(self, tol=HERMITIAN_TOL):
        return self.hermitian_defect() <= tol and abs(self.mean.imag) <= tol

    def require_real(self):
        if not self.is_real():
            raise IntegrityError(
                f"observable is not real-valued (Hermitian defect {self.hermitian_defect():.2e})")

    @cached_property
    def half_spectrum(self):
        """(a, b, c) int64/int64/complex128 arrays over b>0 or (b=0, a>0), and c_{0,0}."""
        self.require_real()
        items = sorted(((a, b), c) for (a, b), c in self._coeffs.items()
                       if b > 0 or (b == 0 and a > 0))
        a = np.array([k[0] for k, _ in items], dtype=np.int64)
        b = np.array([k[1] for k, _ in items], dtype=np.int64)
        c = np.array([v for _, v in items], dtype=np.complex128)
        return a, b, c, float(self.mean.real)

    def items(self):
        return sorted(self._coeffs.items())

    # -- algebra -----------------------------------------------------------

    def _combine(self, other, sign):
        if not isinstance(other, FourierObservable):
            other = FourierObservable.constant(other)
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0j) + sign * v
        return FourierObservable(out, min(self.sobolev_hint, other.sobolev_hint))

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return FourierObservable.constant(other)._combine(self, -1)

    def __mul__(self, scalar):
        return FourierObservable({k: v * scalar for k, v in self._coeffs.items()},
                                 self.sobolev_hint)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __neg__(self):
        return self * -1

    def __eq__(self, other):
        return isinstance(other, FourierObservable) and dict(self._coeffs) == dict(other._coeffs)

    def __hash__(self):
        return hash(tuple(self.items()))

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<FourierObservable{label} modes={len(self._coeffs)} R={self.radius}>"

    def max_abs_distance(self, other):
        keys = set(self._coeffs) | set(other._coeffs)
        return max((abs(self._coeffs.get(k, 0j) - other._coeffs.get(k, 0j)) for k in keys),
                   default=0.0)

    def l1(self):
        return sum(abs(c) for c in self._coeffs.values())

    def lipschitz_bound(self):
        """Bound on |g(p) - g(q)| / max(|dx|, |dy|)."""
        return sum(abs(c) * 2 * math.pi * (abs(a) + abs(b)) for (a, b), c in self._coeffs.items())


@dataclass(frozen=True)
class HmnComponent:
    """Projection of an observable on H_{m,n} = span{e_{m+jn, n} : j in Z}."""

    m: int
    n: int
    coefficients: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n == 0 or not (0 <= self.m < abs(self.n)):
            raise DomainError(f"invalid component indices (m, n) = ({self.m}, {self.n})")

    def mode(self, j):
        return (self.m + j * self.n, self.n)

    def to_observable(self):
        return FourierObservable({self.mode(j): c for j, c in self.coefficients.items()})

    def l2(self):
        return math.sqrt(sum(abs(c) ** 2 for c in self.coefficients.values()))

    def sobolev_norm(self, s):
        return math.sqrt(sum((1 + a * a + b * b) ** s * abs(c) ** 2
                             for (a, b), c in ((self.mode(j), c)
                                               for j, c in self.coefficients.items())))


def component_index(a, b):
    """(m, n, j) with (a, b) = (m + j n, n), 0 <= m < |n|."""
    if b == 0:
        raise DomainError("modes with b = 0 belong to the abelian remainder")
    m = a % abs(b)
    return m, b, (a - m) // b


def evaluate(obs, x, y=None):
    """Value at (x, y); accepts scalars, arrays or a TorusPoint as x."""
    from .torus import TorusPoint

    if isinstance(x, TorusPoint):
        x, y = x.as_floats()
    obs.require_real()
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    total = np.zeros(np.broadcast(xs, ys).shape, dtype=np.complex128)
    for (a, b), c in obs.items():
        ph = a * xs + b * ys
        total = total + c * np.exp(2j * math.pi * (ph - np.floor(ph)))
    if np.max(np.abs(total.imag), initial=0.0) > 1e-12 * max(1.0, obs.l1()):
        raise IntegrityError("evaluation produced a non-negligible imaginary part")
    out = total.real
    return float(out) if out.ndim == 0 else out


def project_zero_mean(obs):
    out = dict(obs.coefficients)
    out.pop((0, 0), None)
    return FourierObservable(out, obs.sobolev_hint)


def decompose_Hmn(obs):
    """Split into H_{m,n} components (sorted by (n, m)) and the b = 0 remainder."""
    comps = {}
    rest = {}
    for (a, b), c in obs.coefficients.items():
        if b == 0:
            rest[(a, b)] = c
            continue
        m, n, j = component_index(a, b)
        comps.setdefault((m, n), {})[j] = c
    components = [HmnComponent(m, n, comps[(m, n)]) for (m, n) in sorted(comps, key=lambda k: (k[1], k[0]))]
    return components, FourierObservable(rest, obs.sobolev_hint)


def reassemble(components, remainder):
    total = dict(remainder.coefficients)
    for comp in components:
        for j, c in comp.coefficients.items():
            total[comp.mode(j)] = total.get(comp.mode(j), 0j) + c
    return FourierObservable(total, remainder.sobolev_hint)


def partial_derivative(obs, axis):
    if axis not in ("x", "y"):
        raise DomainError(f"axis must be 'x' or 'y', got {axis!r}")
    idx = 0 if axis == "x" else 1
    return FourierObservable({k: c * 2j * math.pi * k[idx] for k, c in obs.coefficients.items()},
                             obs.sobolev_hint - 1)


def sobolev_norm(obs, s):
    if s < 0:
        raise DomainError("Sobolev index must be >= 0")
    return math.sqrt(sum((1 + a * a + b * b) ** s * abs(c) ** 2
                         for (a, b), c in obs.coefficients.items()))


def grid_extrema(obs, grid):
    """(min, max) of obs over the grid x = i/grid, y = j/grid."""
    t = np.arange(grid) / grid
    X, Y = np.meshgrid(t, t, indexing="ij")
    vals = evaluate(obs, X, Y)
    return float(vals.min()), float(vals.max())


def certified_bounds(obs, grid=256):
    """Grid extrema widened by a Lipschitz margin; every point is within 1/(2 grid)."""
    if obs.is_zero():
        return 0.0, 0.0
    lo, hi = grid_extrema(obs, grid)
    margin = obs.lipschitz_bound() / (2 * grid)
    return lo - margin, hi + margin


def make_positive_roof(obs, floor, grid=256):
    """obs + C with the smallest C >= 0 making the certified minimum >= floor."""
    if floor <= 0:
        raise DomainError("floor must be positive")
    if obs.is_zero():
        return FourierObservable.constant(floor)
    lo, _ = certified_bounds(obs, grid)
    shift = max(0.0, floor - lo)
    return obs + shift if shift > 0 else obs


# -- exchange format ---------------------------------------------------------

def parse_observable(text, name=None):
    """Records ``a b re im`` one per line; ``#`` starts a comment."""
    coeffs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise DomainError(f"line {lineno}: expected 'a b re im', got {raw!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
            c = complex(float(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise DomainError(f"line {lineno}: {exc}") from None
        if (a, b) in coeffs:
            raise DomainError(f"line {lineno}: duplicate mode ({a}, {b})")
        coeffs[(a, b)] = c
    return FourierObservable(coeffs, name=name)


def format_observable(obs):
    lines = ["# a b re im"]
    for (a, b), c in obs.items():
        lines.append(f"{a} {b} {c.real!r} {c.imag!r}")
    return "\n".join(lines) + "\n"


def load_observable(path):
    with open(path, encoding="utf-8") as fh:
        return parse_observable(fh.read(), name=str(path))
