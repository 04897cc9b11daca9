"""Time the numba kernels against their numpy twins and check they agree.

    python3 benchmarks/bench_kernels.py [--n 1000000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from nilflow import _backend, presets
from nilflow.birkhoff import birkhoff_sum_direct, birkhoff_sum_modes, grid_sums
from nilflow.experiments.moebius import moebius_sieve
from nilflow.experiments.streams import SumStream
from nilflow.observables import FourierObservable
from nilflow.specialflow import flow_samples, make_state
from nilflow.torus import SkewShiftParams, TorusPoint, orbit_segment


def cases(n):
    params = SkewShiftParams.create("golden", 0.1)
    rng = np.random.default_rng(0)
    g = FourierObservable.random(rng, radius=3, modes=6)
    p = TorusPoint.of(0.3, 0.7)
    q = p.vertical_shift(1e-4)
    f = presets.roof("nontrivial", params)
    state = make_state(f, 0.3, 0.7, 0.1)
    return {
        "orbit_segment": lambda: orbit_segment(params, p, 0, n)[-1, 1],
        "birkhoff_direct": lambda: birkhoff_sum_direct(g, params, p, n),
        "birkhoff_modes": lambda: birkhoff_sum_modes(g, params, p, n),
        "grid_fold_64": lambda: grid_sums(g, params, n, 64)[3, 5],
        "drift_stream": lambda: SumStream(f.obs, params, [(p, 1.0), (q, -1.0)]).take(n)[-1],
        "flow_samples": lambda: flow_samples(f, params, state, np.arange(1, n // 10 + 1) * 0.7).s[-1],
        "mobius_sieve": lambda: moebius_sieve(n).mertens(n),
    }


def timeit(fn, repeat):
    fn()  # compile / warm caches
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rows = []
    for name, fn in cases(args.n).items():
        res = {}
        for backend in ("numba", "numpy"):
            _backend.set_backend(backend)
            res[backend] = timeit(fn, args.repeat)
        _backend.set_backend("numba")
        a, b = res["numba"][1], res["numpy"][1]
        diff = abs(float(a) - float(b)) / max(1.0, abs(float(b)))
        rows.append((name, res["numba"][0], res["numpy"][0], diff))
    print(f"n = {args.n}")
    print(f"{'kernel':<18}{'numba s':>12}{'numpy s':>12}{'speedup':>10}{'rel diff':>12}")
    for name, tn, tp, diff in rows:
        print(f"{name:<18}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
