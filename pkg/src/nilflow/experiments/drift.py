"""Finite-window drift searches for the Ratner property and power-disjointness.

Ratner mode follows a_n = S_n(f)(p) - S_n(f)(q) until |a_n| > 1 and then
checks a window [M, M(1 + kappa)] in which a_n stays eps-close to one of
the drift values +1 or -1 while the base orbits stay eps-close.

Disjointness mode follows, with zeta = q / p,
    a_s = [S_s(f/p)(z,w) - S_s(f/p)(z,w')] - [S_[zeta s](f/q)(x,y) - S_[zeta s](f/q)(x',y')].
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..arith import circle_dist
from ..birkhoff import birkhoff_sum_direct
from ..errors import DegeneratePairError, DomainError, PreconditionError
from ..torus import TorusPoint, d1, d2
from .streams import SumStream

DEFAULT_CHUNK = 1 << 22
TRACE_POINTS = 10_000


@dataclass
class RatnerConfig:
    eps: float = 0.5
    kappa: float = 0.01
    D_max: float = 1e3
    max_steps: int = 10 ** 9
    chunk: int = DEFAULT_CHUNK
    trace_points: int = TRACE_POINTS


@dataclass
class DisjointConfig:
    threshold: float = 0.05
    D_max: float = 1e3
    max_steps: int = 10 ** 9
    full_scan: bool = False
    chunk: int = DEFAULT_CHUNK
    trace_points: int = TRACE_POINTS


@dataclass
class DriftReport:
    kind: str
    descriptor: dict
    T: float
    n0: int | None
    M: int | None
    L: int | None
    kappa: float | None
    drift_trace: list = field(default_factory=list)
    measured_constants: dict = field(default_factory=dict)
    passed: bool = False
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def to_json_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    @classmethod
    def from_json_dict(cls, d):
        d = dict(d)
        d["passed"] = d.pop("pass")
        return cls(**d)

    def trace_csv(self):
        return "n,a_n\n" + "".join(f"{n},{a!r}\n" for n, a in self.drift_trace)


class _Thinner:
    """Keeps (n, a_n) at multiples of a power-of-two stride, at most ~2*target entries."""

    def __init__(self, target):
        self.target = max(int(target), 1)
        self.stride = 1
        self.n = np.zeros(0, dtype=np.int64)
        self.v = np.zeros(0)

    def add(self, start, values):
        while self.n.size + values.shape[0] // self.stride > 2 * self.target:
            self.stride *= 2
            keep = self.n % self.stride == 0
            self.n, self.v = self.n[keep], self.v[keep]
        first = (-start) % self.stride
        self.n = np.concatenate((self.n, np.arange(start + first, start + values.shape[0],
                                                   self.stride, dtype=np.int64)))
        self.v = np.concatenate((self.v, values[first::self.stride]))

    def pairs(self, extra=()):
        out = dict(zip(self.n.tolist(), self.v.tolist()))
        out.update(dict(extra))
        return [[n, out[n]] for n in sorted(out)]


def _signed(d):
    """Representative of d mod 1 in [-1/2, 1/2)."""
    return d - math.floor(d + 0.5)


def _time_scale(*terms):
    """min over (delta, exponent) of delta**(-exponent), skipping zero deltas."""
    vals = [dlt ** (-e) for dlt, e in terms if dlt > 0]
    if not vals:
        raise DegeneratePairError("all perturbation sizes vanish")
    return min(vals)


def window_base_distance(p, q, M, W):
    """max over n in [M, W] of d1 + d2 between Phi^n p and Phi^n q (closed form)."""
    dx = _signed(float((q.x - p.x).frac()))
    dy = _signed(float((q.y - p.y).frac()))
    v0, v1 = dy + M * dx, dy + W * dx
    if math.floor(v0 - 0.5) != math.floor(v1 - 0.5):
        worst_y = 0.5
    else:
        worst_y = max(circle_dist(v0), circle_dist(v1))
    return abs(dx) + worst_y


def _describe(p):
    x, y = p.as_floats()
    return [x, y]


def ratner_drift(f, params, p, q, cfg=None, seed=None):
    """Drift search for one pair; see module docstring."""
    cfg = cfg or RatnerConfig()
    if p == q:
        raise DegeneratePairError("p and q coincide")
    dx, dy = d1(p, q), d2(p, q)
    if dx + dy > 1e-2:
        raise PreconditionError("pair too far apart: need d1 + d2 <= 1e-2")
    T = _time_scale((dx, 2.0 / 3.0), (dy, 2.0))
    budget = int(min(math.ceil(cfg.D_max * T), cfg.max_steps))
    stream = SumStream(f.obs, params, [(p, 1.0), (q, -1.0)])
    trace = _Thinner(cfg.trace_points)
    n0 = M = W = None
    sign = 0.0
    a_n0 = a_M = None
    worst_dev = 0.0
    horizon = budget
    near = cfg.eps / 3.0
    chunk = 1 << 12
    while stream.pos <= horizon:
        start = stream.pos
        a = stream.take(min(chunk, horizon + 1 - start), 1.0, near if M is None else -1.0)
        chunk = min(2 * chunk, cfg.chunk)
        trace.add(start, a)
        if n0 is None and stream.first_cross >= 0:
            n0 = start + stream.first_cross
            a_n0 = float(a[stream.first_cross])
        if M is None and stream.first_near >= 0:
            M = start + stream.first_near
            a_M = float(a[stream.first_near])
            sign = 1.0 if a_M > 0 else -1.0
            W = M + int(math.floor(cfg.kappa * M))
            horizon = int(min(max(horizon, W), cfg.max_steps))
        if M is not None:
            lo, hi = max(M, start), min(W, stream.pos - 1)
            if lo <= hi:
                worst_dev = max(worst_dev, float(np.max(np.abs(a[lo - start:hi - start + 1]
                                                              - sign))))
        if n0 is not None and (M is None or stream.pos > W):
            if M is not None or stream.pos > budget:
                break
    steps = stream.pos
    crossed = n0 is not None and n0 <= budget
    window_pass = False
    base_dist = None
    if M is not None and W is not None and W < steps:
        base_dist = window_base_distance(p, q, M, W)
        window_pass = worst_dev < cfg.eps and base_dist < cfg.eps
    extra = [(n, v) for n, v in ((n0, a_n0), (M, a_M)) if n is not None]
    consts = {"D": (n0 / T) if crossed else None,
              "overshoot": (abs(a_n0) - 1.0) if crossed else None,
              "window_max_deviation": worst_dev if M is not None else None,
              "window_base_distance": base_dist}
    consts["C_prime"] = _divergence_ratio(trace, dx, dy)
    return DriftReport(
        kind="ratner",
        descriptor={"p": _describe(p), "q": _describe(q), "delta_x": dx, "delta_y": dy,
                    "eps": cfg.eps, "D_max": cfg.D_max, "alpha": params.name},
        T=T, n0=n0 if crossed else None, M=M, L=(W - M) if M is not None else None,
        kappa=cfg.kappa, drift_trace=trace.pairs(extra), measured_constants=consts,
        passed=bool(crossed and window_pass), seed=seed,
        details={"crossed": crossed, "window_pass": window_pass, "sign": sign,
                 "budget": budget, "steps": steps, "trace_stride": trace.stride,
                 "a_n0": a_n0, "a_M": a_M, "window_end": W})


def _divergence_ratio(trace, dx, dy):
    n = trace.n[trace.n > 0].astype(np.float64)
    if n.size == 0:
        return 0.0
    a = trace.v[trace.n > 0]
    return float(np.max(np.abs(a) / (n ** 1.5 * dx + n ** 0.5 * dy)))


def verify_ratner(f, params, p, q, report, cfg=None):
    """Recompute a_n with the direct engine at the reported indices; returns the pass decision."""
    cfg = cfg or RatnerConfig(eps=report.descriptor.get("eps", 0.5), kappa=report.kappa)

    def a(n):
        return birkhoff_sum_direct(f.obs, params, p, n) - birkhoff_sum_direct(f.obs, params, q, n)

    if report.n0 is None or report.M is None:
        return False
    if abs(a(report.n0)) <= 1.0:
        return False
    aM = a(report.M)
    sign = 1.0 if aM > 0 else -1.0
    if abs(aM - sign) > cfg.eps / 3.0 + 1e-9:
        return False
    W = report.M + report.L
    if abs(a(W) - sign) >= cfg.eps:
        return False
    return window_base_distance(p, q, report.M, W) < cfg.eps and report.details["window_pass"]


# ------------------------------------------------------------- disjointness

def _paired_scan(stream_a, stream_b, p_int, q_int, s_max, chunk, threshold, full_scan, trace):
    """Scan d_s = A_s - B_{(q s)//p} for s in [0, s_max]."""
    best = 0.0
    best_s = 0
    first = None
    scale = 1.0
    b_last_n = 0
    b_last = stream_b.take(1)[0]
    step = 1 << 12
    while stream_a.pos <= s_max:
        s0 = stream_a.pos
        cnt = min(step, s_max + 1 - s0)
        step = min(2 * step, chunk)
        av = stream_a.take(cnt)
        s = np.arange(s0, s0 + cnt, dtype=np.int64)
        nb = (q_int * s) // p_int
        need = int(nb[-1])
        if need > b_last_n:
            fresh = stream_b.take(need - b_last_n)
            bv = np.concatenate(([b_last], fresh))
        else:
            bv = np.array([b_last])
        base = b_last_n
        b_last_n, b_last = base + bv.shape[0] - 1, float(bv[-1])
        d = av - bv[nb - base]
        scale = max(scale, float(np.max(np.abs(av))), float(np.max(np.abs(bv))))
        trace.add(s0, d)
        mag = np.abs(d)
        upto = mag.shape[0]
        if first is None:
            hit = np.flatnonzero(mag >= threshold)
            if hit.size:
                first = s0 + int(hit[0])
                if not full_scan:
                    upto = int(hit[0]) + 1
        i = int(np.argmax(mag[:upto]))
        if mag[i] > best:
            best, best_s = float(mag[i]), s0 + i
        if first is not None and not full_scan:
            break
    return best, best_s, first, stream_a.pos, scale


def _noise_floor(steps, scale):
    """Typical size of accumulated rounding in running sums of magnitude <= scale."""
    return 2.0 ** -52 * math.sqrt(max(steps, 1)) * scale


def _disjointness(f, params, p_int, q_int, quad, cfg, seed):
    (P1, P2, P3, P4) = quad
    dx, dy, dw = d1(P1, P2), d2(P1, P2), d2(P3, P4)
    try:
        T = _time_scale((dx, 2.0 / 3.0), (dy, 2.0), (dw, 2.0))
    except DegeneratePairError:
        T = float(cfg.trace_points)  # nothing to perturb: scan a short control window
    s_max = int(min(math.ceil(cfg.D_max * T), cfg.max_steps * p_int // (p_int + q_int)))
    sa = SumStream(f.obs, params, [(P3, 1.0 / p_int), (P4, -1.0 / p_int)])
    sb = SumStream(f.obs, params, [(P1, 1.0 / q_int), (P2, -1.0 / q_int)])
    trace = _Thinner(cfg.trace_points)
    best, best_s, first, steps, scale = _paired_scan(sa, sb, p_int, q_int, s_max, cfg.chunk,
                                              cfg.threshold, cfg.full_scan, trace)
    consts = {"d_triple_prime": best, "D": (first / T) if first is not None else None,
              "noise_floor": _noise_floor(steps, scale),
              "mean_f": f.mean}
    return DriftReport(
        kind="disjoint",
        descriptor={"p": p_int, "q": q_int, "points": [_describe(P) for P in quad],
                    "delta_x": dx, "delta_y": dy, "delta_w": dw,
                    "threshold": cfg.threshold, "D_max": cfg.D_max, "alpha": params.name},
        T=T, n0=first, M=None, L=None, kappa=None, drift_trace=trace.pairs(),
        measured_constants=consts, passed=first is not None, seed=seed,
        details={"argmax_s": best_s, "s_max": s_max, "steps": steps,
                 "full_scan": cfg.full_scan, "trace_stride": trace.stride})


def disjointness_drift(f, params, p_int, q_int, quad, cfg=None, seed=None):
    """Drift search between time changes by p and q of the same special flow."""
    cfg = cfg or DisjointConfig()
    p_int, q_int = int(p_int), int(q_int)
    if p_int <= 0 or q_int <= 0:
        raise PreconditionError("p and q must be positive integers")
    if p_int == q_int:
        raise PreconditionError("p = q: distinct powers are required")
    if p_int > q_int:
        raise PreconditionError("expected p < q")
    _check_quad(quad)
    return _disjointness(f, params, p_int, q_int, quad, cfg, seed)


def identical_pair_control(f, params, quad, cfg=None, seed=None):
    """The same harness with p = q = 1: the drift must vanish up to rounding."""
    cfg = cfg or DisjointConfig()
    _check_quad(quad)
    return _disjointness(f, params, 1, 1, quad, cfg, seed)


def _check_quad(quad):
    if len(quad) != 4:
        raise DomainError("need four points")
    if quad[2].x != quad[3].x:
        raise PreconditionError("third and fourth points must share their x coordinate")


def vertical_quadruple(rng, delta_x, delta_y, delta_w):
    """((x,y), (x+dx, y+dy), (z,w), (z, w+dw)) with uniform base points."""
    x, y, z, w = rng.random(4)
    P1 = TorusPoint.of(x, y)
    P3 = TorusPoint.of(z, w)
    return (P1, P1.shift(delta_x, delta_y), P3, P3.vertical_shift(delta_w))


def vertical_pair(rng, delta):
    x, y = rng.random(2)
    p = TorusPoint.of(x, y)
    return p, p.vertical_shift(delta)


# ------------------------------------------------------------ linear split

@dataclass
class LinsplitReport:
    best_n: int
    best_value: float
    normalized: float
    T: float
    zeta: float


def linsplit_probe(h, params, p_int, q_int, P, Q, T, D_max=10.0, chunk=DEFAULT_CHUNK):
    """max over n' <= D_max T of |S_n'(h)(Q) - zeta^(-1/2) S_[zeta n'](h)(P)|, zeta = q/p."""
    p_int, q_int = int(p_int), int(q_int)
    zeta = q_int / p_int
    sa = SumStream(h, params, [(Q, 1.0)])
    sb = SumStream(h, params, [(P, zeta ** -0.5)])
    s_max = int(math.ceil(D_max * T))
    best, best_s, _, _, _ = _paired_scan(sa, sb, p_int, q_int, s_max, chunk, math.inf, True,
                                      _Thinner(1))
    return LinsplitReport(best_s, best, best / math.sqrt(T), float(T), zeta)
