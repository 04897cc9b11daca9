"""Seeded experiment jobs and a deterministic batch runner."""
from __future__ import annotations

import json
import statistics
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import __version__, presets
from ..observables import FourierObservable
from ..specialflow import sample_under_roof
from ..torus import SkewShiftParams
from .drift import (DisjointConfig, RatnerConfig, disjointness_drift, identical_pair_control,
                    ratner_drift, vertical_pair, vertical_quadruple)
from .moebius import FlowObservable, moebius_sum

SCHEMA = "nilflow.batch/1"


def _params(job):
    return SkewShiftParams.create(job.get("alpha", "golden"), float(job.get("beta", 0.0)))


def _ratner(job, params, rng):
    f = presets.roof(job.get("roof", "nontrivial"), params)
    p, q = vertical_pair(rng, float(job.get("delta", 1e-3)))
    cfg = RatnerConfig(eps=float(job.get("eps", 0.5)), kappa=float(job.get("kappa", 0.01)),
                       D_max=float(job.get("D_max", 1e3)),
                       max_steps=int(float(job.get("max_steps", 1e9))))
    return ratner_drift(f, params, p, q, cfg, seed=job["seed"]).to_json_dict()


def _quad(job, rng):
    delta = float(job.get("delta", 1e-3))
    dx, dy, dw = delta * (0.5 + rng.random(3))
    if job.get("vertical_only"):
        dx = 0.0
    return vertical_quadruple(rng, dx, dy, dw)


def _disjoint_cfg(job):
    return DisjointConfig(threshold=float(job.get("threshold", 0.05)),
                          D_max=float(job.get("D_max", 1e3)),
                          max_steps=int(float(job.get("max_steps", 1e9))),
                          full_scan=bool(job.get("full_scan", False)))


def _disjoint(job, params, rng):
    f = presets.roof(job.get("roof", "nontrivial"), params)
    quad = _quad(job, rng)
    return disjointness_drift(f, params, int(job.get("p", 1)), int(job.get("q", 2)), quad,
                              _disjoint_cfg(job), seed=job["seed"]).to_json_dict()


def _control(job, params, rng):
    f = presets.roof(job.get("roof", "nontrivial"), params)
    P1, P2, _, _ = _quad(job, rng)
    P2 = P2.shift(P1.x - P2.x, 0.0)  # both pairs identical and vertical
    quad = (P1, P2, P1, P2)
    return identical_pair_control(f, params, quad, _disjoint_cfg(job),
                                  seed=job["seed"]).to_json_dict()


def random_flow_observable(rng):
    base = FourierObservable.random(rng, radius=3, decay=2.0, zero_mean=False)
    return FlowObservable(base, "sin2")


def _moebius(job, params, rng):
    f = presets.roof(job.get("roof", "nontrivial"), params)
    F = random_flow_observable(rng)
    x0 = sample_under_roof(f, rng, 1)[0]
    t = float(job.get("t", 0.5 + 1.5 * rng.random()))
    N = int(float(job.get("N", 1e5)))
    rows = moebius_sum(F, f, params, x0, t, N)
    final = rows[-1][1]
    return {"kind": "moebius", "t": t, "N": N, "x0": list(x0.base.as_floats()) + [x0.s],
            "partial_averages": rows, "final": final,
            "pass": abs(final) <= float(job.get("tolerance", 0.05)),
            "measured_constants": {"final_average": abs(final)}}


RUNNERS = {"ratner": _ratner, "disjoint": _disjoint, "disjoint_control": _control,
           "moebius": _moebius}


def run_job(job):
    """Run one job dict; never raises (errors are recorded in the result)."""
    try:
        kind = job["kind"]
        runner = RUNNERS[kind]
        rng = np.random.default_rng(int(job["seed"]))
        report = runner(job, _params(job), rng)
        if not job.get("keep_trace", False):
            report.pop("drift_trace", None)
        return {"job": job, "ok": True, "report": report}
    except Exception as exc:  # noqa: BLE001 - batch continues past child errors
        return {"job": job, "ok": False, "error": f"{type(exc).__name__}: {exc}"}


def _distribution(values):
    vals = sorted(v for v in values if isinstance(v, (int, float)) and v is not None)
    if not vals:
        return None
    return {"count": len(vals), "min": vals[0], "median": statistics.median(vals),
            "max": vals[-1]}


def aggregate(results):
    kinds = {}
    for r in results:
        kinds.setdefault(r["job"].get("kind", "?"), []).append(r)
    summary = {}
    for kind, rs in sorted(kinds.items()):
        good = [r["report"] for r in rs if r["ok"]]
        consts = {}
        for rep in good:
            for k, v in rep.get("measured_constants", {}).items():
                consts.setdefault(k, []).append(v)
        summary[kind] = {
            "count": len(rs), "errors": len(rs) - len(good),
            "pass_rate": (sum(bool(r.get("pass")) for r in good) / len(good)) if good else None,
            "measured_constants": {k: _distribution(v) for k, v in sorted(consts.items())},
        }
    return summary


def batch(spec, workers=1):
    """Run jobs (ordered by index) and aggregate; output is a pure function of spec."""
    jobs = [dict(j, index=i) for i, j in enumerate(spec)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_job, jobs, chunksize=1))
    else:
        results = [run_job(j) for j in jobs]
    return {"schema": SCHEMA, "version": __version__, "workers": workers,
            "jobs": results, "summary": aggregate(results)}


def dumps(report):
    return json.dumps(report, sort_keys=True, indent=1, allow_nan=True) + "\n"


def seeded_jobs(kind, count, seed0=0, **options):
    return [dict(options, kind=kind, seed=seed0 + i) for i in range(count)]
