"""Drift searches, Mobius sums, correlations and batch runs."""
from .batch import aggregate, batch, dumps, run_job, seeded_jobs
from .drift import (DisjointConfig, DriftReport, LinsplitReport, RatnerConfig,
                    disjointness_drift, identical_pair_control, linsplit_probe, ratner_drift,
                    verify_ratner, vertical_pair, vertical_quadruple)
from .moebius import FlowObservable, MoebiusTable, correlation, moebius_sieve, moebius_sum

__all__ = [
    "aggregate", "batch", "dumps", "run_job", "seeded_jobs",
    "DisjointConfig", "DriftReport", "LinsplitReport", "RatnerConfig", "disjointness_drift",
    "identical_pair_control", "linsplit_probe", "ratner_drift", "verify_ratner",
    "vertical_pair", "vertical_quadruple",
    "FlowObservable", "MoebiusTable", "correlation", "moebius_sieve", "moebius_sum",
]
