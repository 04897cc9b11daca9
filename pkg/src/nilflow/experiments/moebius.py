"""Mobius-weighted flow averages and Monte-Carlo correlations on X^f."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import DomainError
from ..observables import evaluate
from ..specialflow import flow_batch, flow_samples, sample_under_roof

MAX_SIEVE = 10 ** 8


@dataclass(frozen=True)
class MoebiusTable:
    values: np.ndarray  # values[n] = mu(n), values[0] = 0
    N: int

    def __getitem__(self, n):
        return int(self.values[n])

    def mertens(self, K):
        return int(np.sum(self.values[1:K + 1], dtype=np.int64))


def moebius_sieve(N):
    N = int(N)
    if N < 1 or N > MAX_SIEVE:
        raise DomainError("sieve size must lie in [1, 1e8]")
    return MoebiusTable(kernels.mobius_table(N), N)


@dataclass(frozen=True)
class FlowObservable:
    """F(p, s) = base(p) * window(s / f(p)) on the region under the roof."""

    base: object
    window: str = "none"

    def __post_init__(self):
        if self.window not in ("none", "sin2"):
            raise DomainError("window must be 'none' or 'sin2'")

    def values(self, f, x, y, s):
        v = evaluate(self.base, x, y)
        if self.window == "sin2":
            v = v * np.sin(np.pi * np.asarray(s) / evaluate(f.obs, x, y)) ** 2
        return v


def log_checkpoints(N, per_decade=4):
    pts = {int(round(10 ** (k / per_decade))) for k in range(0, int(per_decade * math.log10(N)) + 1)}
    pts.add(int(N))
    return sorted(p for p in pts if 1 <= p <= N)


def moebius_sum(F, f, params, x0, t, N, weights="mobius", checkpoints=None):
    """(K, (1/K) sum_{n<=K} F(Phi_{n t} x0) mu(n)) at logarithmic checkpoints K <= N."""
    if t <= 0:
        raise DomainError("t must be positive")
    N = int(N)
    times = t * np.arange(1, N + 1, dtype=np.float64)
    S = flow_samples(f, params, x0, times)
    vals = F.values(f, S.x, S.y, S.s)
    if weights == "mobius":
        w = moebius_sieve(N).values[1:].astype(np.float64)
    elif weights == "ones":
        w = np.ones(N)
    else:
        raise DomainError("weights must be 'mobius' or 'ones'")
    run = np.cumsum(vals * w)
    cps = checkpoints or log_checkpoints(N)
    return [(K, float(run[K - 1] / K)) for K in cps]


def correlation(f, params, F, G, t_list, sample_count, seed):
    """Monte-Carlo <F o Phi_t, G> under the normalized invariant measure, with stderr."""
    rng = np.random.default_rng(seed)
    states = sample_under_roof(f, rng, sample_count)
    x0 = np.array([st.base.as_floats() for st in states])
    s0 = np.array([st.s for st in states])
    g0 = G.values(f, x0[:, 0], x0[:, 1], s0)
    out = []
    for t in t_list:
        moved = flow_batch(f, params, states, t) if t != 0 else states
        xt = np.array([st.base.as_floats() for st in moved])
        st_ = np.array([st.s for st in moved])
        prod = F.values(f, xt[:, 0], xt[:, 1], st_) * g0
        err = float(prod.std(ddof=1) / math.sqrt(len(prod))) if len(prod) > 1 else math.inf
        out.append((float(t), float(prod.mean()), err))
    return out
