"""Special flow over the skew-shift under a positive roof f.

States are (p, s) with 0 <= s < f(p).  The flow moves s at unit speed and
applies Phi at the roof, so Phi_t(p, s) = (Phi^N p, s + t - S_N(f)(p)) where
N is the hitting index: S_N(f)(p) <= s + t < S_{N+1}(f)(p).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from ._backend import ANCHOR_INTERVAL
from .birkhoff import birkhoff_sum_direct, orbit_values
from .errors import DomainError
from .observables import FourierObservable, certified_bounds, evaluate
from .torus import TorusPoint, iterate

MAX_JUMP = 1 << 33


@dataclass(frozen=True)
class RoofFunction:
    obs: FourierObservable
    certified_min: float
    certified_max: float

    @classmethod
    def from_observable(cls, obs, grid=256):
        obs.require_real()
        lo, hi = certified_bounds(obs, grid)
        if lo <= 0:
            raise DomainError(f"roof is not certified positive (certified min {lo:.3g})")
        return cls(obs, float(lo), float(hi))

    @classmethod
    def constant(cls, c):
        return cls.from_observable(FourierObservable.constant(c))

    def __call__(self, p):
        return evaluate(self.obs, p)

    @property
    def mean(self):
        return self.obs.mean


@dataclass(frozen=True)
class SpecialFlowState:
    base: TorusPoint
    s: float

    def check(self, f):
        fp = f(self.base)
        if not (0.0 <= self.s < fp):
            raise DomainError(f"invalid state: s = {self.s!r} not in [0, f(p) = {fp!r})")
        return self


def make_state(f, x, y, s):
    return SpecialFlowState(TorusPoint.of(x, y), float(s)).check(f)


def _check_time(f, state, t):
    state.check(f)
    if abs(t) > MAX_JUMP * f.certified_min:
        raise DomainError("|t| exceeds 2**33 * certified_min")


@dataclass
class FlowSamples:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    N: np.ndarray

    def to_csv(self):
        lines = ["t,x,y,s,N"]
        for row in zip(self.t.tolist(), self.x.tolist(), self.y.tolist(), self.s.tolist(),
                       self.N.tolist()):
            lines.append("{!r},{!r},{!r},{!r},{}".format(*row))
        return "\n".join(lines) + "\n"


def _forward_walk(f, params, p, targets):
    """For sorted targets >= 0 return (N, x, y, remainder, f(Phi^N p)) per target."""
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    m = targets.shape[0]
    out_n = np.zeros(m, dtype=np.int64)
    out_x = np.zeros(m)
    out_y = np.zeros(m)
    out_s = np.zeros(m)
    out_f = np.zeros(m)
    amodes, bmodes, coefs, c0 = f.obs.half_spectrum
    radius = max(f.obs.radius, 1)
    ah, al, bh, bl = params.dd
    j = 0
    k0 = 0
    partial = 0.0
    # jump over the part of the orbit that certainly lies below the first target
    if m:
        k0 = max(0, int(targets[0] // f.certified_max) - 1)
        if k0:
            partial = birkhoff_sum_direct(f.obs, params, p, k0)
    while j < m:
        anchor = iterate(params, p, k0)
        span = ANCHOR_INTERVAL
        if kernels._backend.active() == "numpy":
            # do not materialize far more of the orbit than the pending targets need
            need = int((targets[-1] - partial) / f.certified_min) + 2
            span = max(1, min(span, need))
        before = j
        j, steps, partial_new = kernels.special_walk(
            *anchor.dd, ah, al, bh, bl, amodes, bmodes, coefs, c0, radius,
            partial, targets, span, out_n, out_x, out_y, out_s, out_f, j)
        out_n[before:j] += k0
        k0 += steps
        partial = partial_new
    return out_n, out_x, out_y, out_s, out_f


def _backward_scan(f, params, p, target, chunk=1 << 12):
    """Largest-magnitude scan for t < 0: N < 0 with S_N <= target < S_{N+1}."""
    top = 0
    S_top = 0.0
    while True:
        lo = top - chunk
        vals = orbit_values(f.obs, params, p, lo, chunk)[::-1]
        S = S_top - np.cumsum(vals)
        hit = np.flatnonzero(S <= target)
        if hit.size:
            i = int(hit[0])
            N = top - i - 1
            return N, float(S[i]), float(vals[i])
        top, S_top = lo, float(S[-1])
        chunk = min(chunk * 2, ANCHOR_INTERVAL)


def _finish(params, p, N, s, fN):
    base = iterate(params, p, N)
    s = min(max(s, 0.0), math.nextafter(fN, 0.0))
    return SpecialFlowState(base, s)


def hitting_index(f, params, p, s, t):
    state = SpecialFlowState(p, float(s))
    _check_time(f, state, t)
    if t == 0:
        return 0
    if s + t >= 0:
        return int(_forward_walk(f, params, p, [s + t])[0][0])
    return _backward_scan(f, params, p, s + t)[0]


def flow(f, params, state, t):
    _check_time(f, state, t)
    if t == 0:
        return state
    target = state.s + t
    if target >= 0:
        n, _, _, rem, fN = _forward_walk(f, params, state.base, [target])
        return _finish(params, state.base, int(n[0]), float(rem[0]), float(fN[0]))
    N, S_N, fN = _backward_scan(f, params, state.base, target)
    return _finish(params, state.base, N, target - S_N, fN)


def flow_samples(f, params, state, times):
    """States Phi_t(state) for many t >= 0 in one pass along the base orbit."""
    state.check(f)
    times = np.asarray(times, dtype=np.float64)
    if times.size and times.min() < 0:
        raise DomainError("flow_samples needs t >= 0")
    order = np.argsort(times, kind="stable")
    n, x, y, rem, _ = _forward_walk(f, params, state.base, times[order] + state.s)
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    return FlowSamples(times.copy(), x[inv], y[inv], rem[inv], n[inv])


def hitting_indices(f, params, states, t):
    """Hitting indices of many states at one time t >= 0 (short horizons)."""
    if t < 0:
        raise DomainError("hitting_indices needs t >= 0")
    if t / f.certified_min > ANCHOR_INTERVAL:
        return np.array([hitting_index(f, params, st.base, st.s, t) for st in states])
    amodes, bmodes, coefs, c0 = f.obs.half_spectrum
    xh = np.array([st.base.x.hi for st in states])
    xl = np.array([st.base.x.lo for st in states])
    yh = np.array([st.base.y.hi for st in states])
    yl = np.array([st.base.y.lo for st in states])
    s = np.array([st.s for st in states])
    out = np.zeros(len(states), dtype=np.int64)
    return kernels.flow_many(xh, xl, yh, yl, s, float(t), *params.dd, amodes, bmodes, coefs, c0,
                             max(f.obs.radius, 1), out)


def flow_batch(f, params, states, t):
    return [flow(f, params, st, t) for st in states]


def time_rescale(f, r):
    """Roof f / r: the flow under f at time r t is the flow under f / r at time t."""
    r = Fraction(r) if not isinstance(r, float) else r
    if r <= 0:
        raise DomainError("rescaling factor must be positive")
    rf = float(r)
    if rf == 1.0:
        return f
    return RoofFunction(f.obs / rf, f.certified_min / rf, f.certified_max / rf)


def sample_under_roof(f, rng, size):
    """States distributed by the normalized flow-invariant measure (rejection sampling)."""
    xs, ys, ss = [], [], []
    have = 0
    while have < size:
        k = max(64, 2 * (size - have))
        x = rng.random(k)
        y = rng.random(k)
        s = rng.random(k) * f.certified_max
        fv = evaluate(f.obs, x, y)
        keep = s < fv
        xs.append(x[keep])
        ys.append(y[keep])
        ss.append(s[keep])
        have += int(keep.sum())
    x = np.concatenate(xs)[:size]
    y = np.concatenate(ys)[:size]
    s = np.concatenate(ss)[:size]
    return [SpecialFlowState(TorusPoint.of(a, b), float(c)) for a, b, c in zip(x, y, s)]
