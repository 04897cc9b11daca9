"""Birkhoff sums S_N(g) over the skew-shift and their growth."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _backend, kernels
from .arith import step_phases_dd
from .errors import DomainError
from .torus import TorusPoint, blocks, d1, d2, iterate

MAX_SUM_LENGTH = 1 << 33
MIN_FIT_N = 1 << 10


def _check_length(N):
    N = int(N)
    if abs(N) > MAX_SUM_LENGTH:
        raise DomainError(f"|N| = {abs(N)} exceeds 2**33")
    return N


def _forward_range(N):
    """S_N sums indices [0, N) for N >= 0 and -[N, 0) for N < 0."""
    return (0, N, 1.0) if N >= 0 else (N, -N, -1.0)


def mode_sum(a, b, params, p, n0, count):
    """sum_{k=n0}^{n0+count-1} e_{a,b}(Phi^k p) by the rotation scheme."""
    total = 0j
    for start, length in blocks(n0, count):
        (th, tl), (dh, dl), (ch, cl) = step_phases_dd(a, b, start, params.alpha, p.x, p.y,
                                                      params.beta)
        total += kernels.phase_sum(th, tl, dh, dl, ch, cl, length)
    return total


def birkhoff_sum_mode(a, b, params, p, N):
    """S_N(e_{a,b})(p) as a complex number."""
    N = _check_length(N)
    n0, count, sign = _forward_range(N)
    if count == 0:
        return 0j
    return sign * mode_sum(a, b, params, p, n0, count)


def birkhoff_sum_modes(g, params, p, N):
    """S_N(g)(p) assembled from per-mode sums over the half spectrum."""
    N = _check_length(N)
    amodes, bmodes, coefs, c0 = g.half_spectrum
    total = c0 * N
    acc = 0j
    for a, b, c in zip(amodes.tolist(), bmodes.tolist(), coefs):
        acc += c * birkhoff_sum_mode(a, b, params, p, N)
    return total + 2.0 * acc.real


def orbit_values(g, params, p, n0, count):
    """g(Phi^k p) for k in [n0, n0 + count) (anchored direct evaluation)."""
    amodes, bmodes, coefs, c0 = g.half_spectrum
    radius = max(g.radius, 1)
    ah, al, bh, bl = params.dd
    out = np.empty(count)
    pos = 0
    for start, length in blocks(n0, count):
        anchor = iterate(params, p, start)
        out[pos:pos + length] = kernels.orbit_values(*anchor.dd, ah, al, bh, bl, length,
                                                     amodes, bmodes, coefs, c0, radius)
        pos += length
    return out


def birkhoff_sum_direct(g, params, p, N):
    """S_N(g)(p) by evaluating g along the orbit; negative N follows S_N = -S_{|N|}(Phi^N p)."""
    N = _check_length(N)
    n0, count, sign = _forward_range(N)
    if count == 0:
        return 0.0
    total = 0.0
    for start, length in blocks(n0, count):
        total += float(np.sum(orbit_values(g, params, p, start, length)))
    return sign * total


@dataclass
class BirkhoffProfile:
    checkpoints: list
    values: list
    point: tuple
    observable_id: str = ""
    params_id: str = ""

    def to_csv(self):
        rows = ["N,value"] + [f"{n},{v!r}" for n, v in zip(self.checkpoints, self.values)]
        return "\n".join(rows) + "\n"


def birkhoff_profile(g, params, p, checkpoints, observable_id="", params_id=""):
    """S_N(g)(p) at increasing checkpoints in one pass along the orbit."""
    cps = [int(n) for n in checkpoints]
    if any(b <= a for a, b in zip(cps, cps[1:])) or (cps and cps[0] < 0):
        raise DomainError("checkpoints must be increasing and non-negative")
    values = []
    acc = 0.0
    prev = 0
    for n in cps:
        _check_length(n)
        if n > prev:
            acc += float(np.sum(orbit_values(g, params, p, prev, n - prev)))
        values.append(acc)
        prev = n
    return BirkhoffProfile(cps, values, p.as_floats(), observable_id, params_id)


# -- whole-torus views ---------------------------------------------------------

def grid_sums(g, params, N, M):
    """S_N(g) on the grid (i/M, j/M), exactly, via frequency folding.

    S_N e_{a,b} = sum_k w_k e_{a+kb, b} with unit weights w_k; on an M-point
    grid the frequency a + kb only matters mod M, so the weights are folded
    into an M x M spectrum and synthesized with one inverse FFT.
    """
    N = _check_length(N)
    if N < 0:
        raise DomainError("grid_sums needs N >= 0")
    amodes, bmodes, coefs, c0 = g.half_spectrum
    spec = np.zeros((M, M), dtype=np.complex128)
    origin = TorusPoint.of(0.0, 0.0)
    for a, b, c in zip(amodes.tolist(), bmodes.tolist(), coefs):
        bins = np.zeros(M, dtype=np.complex128)
        for start, length in blocks(0, N):
            (th, tl), (dh, dl), (ch, cl) = step_phases_dd(a, b, start, params.alpha, origin.x,
                                                          origin.y, params.beta)
            kernels.phase_fold(th, tl, dh, dl, ch, cl, length, a, b, start, M, bins)
        spec[:, b % M] += c * bins
    field_ = np.fft.ifft2(spec) * (M * M)
    return c0 * N + 2.0 * field_.real


def l2_grid_norm(g, params, N, M=256):
    vals = grid_sums(g, params, N, M)
    return float(np.sqrt(np.mean(vals * vals)))


def orbit_window_sums(g, params, p, N, L):
    """S_N(g)(Phi^j p) for j in [0, L) from prefix sums of one orbit of length N + L."""
    vals = orbit_values(g, params, p, 0, N + L)
    prefix = np.concatenate(([0.0], np.cumsum(vals)))
    return prefix[N:N + L] - prefix[:L]


@dataclass
class SupNormEstimate:
    value: float
    argmax: tuple
    grid: int
    orbit_samples: int
    N: int


DEFAULT_ORBIT_START = (0.2718281828459045, 0.3141592653589793)


def sup_norm_estimate(g, params, N, budget, start=None):
    """Lower estimate of ||S_N(g)||_{C^0}: max |S_N g| over a grid and an orbit window.

    Half the budget goes to a uniform grid, half to consecutive orbit points
    Phi^j p; bounded type makes such windows equidistribute at scale 1/N.
    """
    if budget < 1000:
        raise DomainError("budget must be >= 1000")
    N = _check_length(N)
    M = max(8, int(math.isqrt(budget // 2)))
    L = budget - M * M
    p = TorusPoint.of(*(start or DEFAULT_ORBIT_START)) if not isinstance(start, TorusPoint) else start
    grid = np.abs(grid_sums(g, params, N, M))
    i, j = np.unravel_index(int(np.argmax(grid)), grid.shape)
    best, where = float(grid[i, j]), (i / M, j / M)
    orbit = np.abs(orbit_window_sums(g, params, p, N, L))
    k = int(np.argmax(orbit))
    if orbit[k] > best:
        best, where = float(orbit[k]), iterate(params, p, k).as_floats()
    return SupNormEstimate(best, where, M, L, N)


@dataclass
class GrowthFit:
    slope: float
    intercept: float
    r2: float
    per_N: list = field(default_factory=list)
    fitted_N: list = field(default_factory=list)

    def to_json_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "per_N": [{"N": n, "value": v} for n, v in self.per_N],
                "fitted_N": self.fitted_N}

    def to_csv(self):
        return "N,value\n" + "".join(f"{n},{v!r}\n" for n, v in self.per_N)


def loglog_fit(Ns, values):
    x = np.log(np.asarray(Ns, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def growth_exponent(g, params, N_list, budget=1 << 15, start=None, estimator=None):
    """Least-squares slope of log ||S_N g|| against log N (N < 2**10 excluded)."""
    if g.is_zero():
        raise DomainError("growth fit is undefined for the zero observable")
    Ns = sorted(int(n) for n in N_list)
    fitted = [n for n in Ns if n >= MIN_FIT_N]
    if len(fitted) < 5 or fitted[-1] < 1000 * fitted[0]:
        raise DomainError("growth fit needs >= 5 checkpoints >= 2**10 spanning >= 3 decades")
    est = estimator or (lambda n: sup_norm_estimate(g, params, n, budget, start).value)
    per_N = [(n, est(n)) for n in Ns]
    vals = [v for n, v in per_N if n >= MIN_FIT_N]
    if min(vals) <= 0:
        raise DomainError("growth fit is undefined: vanishing Birkhoff sums")
    slope, intercept, r2 = loglog_fit(fitted, vals)
    return GrowthFit(slope, intercept, r2, per_N, fitted)


@dataclass
class DivergenceFit:
    C_prime: float
    samples: list


def divergence_bound_fit(g, params, pairs, N_list):
    """Empirical C' = max |S_n g(p) - S_n g(q)| / (n^{3/2} d_1 + n^{1/2} d_2)."""
    best = 0.0
    samples = []
    for p, q in pairs:
        dx, dy = d1(p, q), d2(p, q)
        if dx == 0 and dy == 0:
            warnings.warn("coincident pair skipped in divergence fit", RuntimeWarning)
            continue
        for n in N_list:
            diff = abs(birkhoff_sum_direct(g, params, p, n) - birkhoff_sum_direct(g, params, q, n))
            ratio = diff / (n ** 1.5 * dx + n ** 0.5 * dy)
            samples.append((n, dx, dy, ratio))
            best = max(best, ratio)
    return DivergenceFit(best, samples)


def precision_settings():
    return {"phase_budget": _backend.precision_budget(),
            "subanchor_interval": _backend.subanchor_interval(),
            "anchor_interval": _backend.ANCHOR_INTERVAL,
            "backend": _backend.active()}
