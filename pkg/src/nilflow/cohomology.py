"""Invariant distributions and the cohomological equation u o Phi - u = g.

Within H_{m,n} write g = sum_j g_j e_{m+jn,n} and
phi_j = (m alpha + n beta) j + n alpha C(j, 2).  Composition with Phi moves
e_{m+jn,n} to e_{m+(j+1)n,n} times e(phi_{j+1} - phi_j), so with
w_j = g_j e(-phi_j) the equation becomes v_{j-1} - v_j = w_j for
v_j = u_j e(-phi_j).  A finitely supported solution exists iff
D_{m,n}(g) = sum_j w_j vanishes.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .arith import reduce_quadratic_phase
from .errors import ObstructionError, PreconditionError, SmallDivisorError
from .observables import (FourierObservable, HmnComponent, certified_bounds, decompose_Hmn,
                          project_zero_mean, reassemble)

DEFAULT_TOL = 1e-8
SMALL_DIVISOR = 1e-14


def _e(t):
    return cmath.exp(2j * math.pi * t)


def _shift_phase(a, b, params):
    """a alpha + b beta mod 1: the phase picked up by e_{a,b} under composition."""
    return reduce_quadratic_phase(a, b, 1, params.alpha, 0.0, 0.0, params.beta)


def _component_phase(m, n, j, params):
    return reduce_quadratic_phase(m, n, j, params.alpha, 0.0, 0.0, params.beta)


def compose_step(obs, params):
    """Coefficients of obs o Phi (exact mode-shift rule)."""
    out = {}
    for (a, b), c in obs.coefficients.items():
        out[(a + b, b)] = c * _e(_shift_phase(a, b, params))
    return FourierObservable(out, obs.sobolev_hint)


def coboundary(u, params):
    """u o Phi - u."""
    return compose_step(u, params) - u


def compose_component(c, params):
    """(g o Phi) restricted to the same H_{m,n}: index j moves to j + 1."""
    return HmnComponent(c.m, c.n, {j + 1: g * _e(_shift_phase(c.m + j * c.n, c.n, params))
                                   for j, g in c.coefficients.items()})


@dataclass
class InvariantDistributionValue:
    m: int
    n: int
    value: complex
    truncation_radius: int
    tail_bound: float = 0.0

    def __abs__(self):
        return abs(self.value)


def _weights(c, params):
    return {j: g * _e(-_component_phase(c.m, c.n, j, params)) for j, g in c.coefficients.items()}


def invariant_distribution(c, params):
    """D_{m,n}(g) = sum_j g_j e(-phi_j) over the (finite) support."""
    if c.n == 0:
        raise PreconditionError("invariant distributions need n != 0")
    w = _weights(c, params)
    total = math.fsum(v.real for v in w.values()) + 1j * math.fsum(v.imag for v in w.values())
    radius = max((abs(j) for j in c.coefficients), default=0)
    return InvariantDistributionValue(c.m, c.n, complex(total), radius, 0.0)


@dataclass
class CohomologySolution:
    u: HmnComponent
    residual: float
    obstruction: float
    left_right_gap: float = 0.0


def _fsum_c(vals):
    vals = list(vals)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def solve_cohomological(c, params, tol=DEFAULT_TOL):
    """u in H_{m,n} with u o Phi - u = g, from the one-sided sums.

    j < 0 uses u_j = -e(phi_j) sum_{k<=j} w_k, j >= 0 uses
    u_j = e(phi_j) sum_{k>j} w_k.  Both are finite; they agree when D = 0.
    """
    if not c.coefficients:
        return CohomologySolution(HmnComponent(c.m, c.n, {}), 0.0, 0.0)
    scale = c.l2()
    D = invariant_distribution(c, params).value
    if abs(D) > tol * scale:
        raise ObstructionError(abs(D), c.m, c.n)
    w = _weights(c, params)
    lo, hi = min(w), max(w)
    u = {}
    gap = 0.0
    for j in range(lo - 1, hi + 1):
        left = -_fsum_c(v for k, v in w.items() if k <= j)
        right = _fsum_c(v for k, v in w.items() if k > j)
        gap = max(gap, abs(left - right))
        vj = left if j < 0 else right
        if vj != 0:
            u[j] = vj * _e(_component_phase(c.m, c.n, j, params))
    sol = HmnComponent(c.m, c.n, u)
    back = compose_component(sol, params)
    resid = 0.0
    for j in set(back.coefficients) | set(u) | set(c.coefficients):
        r = back.coefficients.get(j, 0j) - u.get(j, 0j) - c.coefficients.get(j, 0j)
        resid = max(resid, abs(r))
    return CohomologySolution(sol, resid, abs(D), gap)


@dataclass
class AbelianSolution:
    u: FourierObservable
    smallest_divisor: float
    residual: float


def solve_abelian(obs, params, tol=DEFAULT_TOL):
    """u_a = c_a / (e(a alpha) - 1) for the b = 0 modes of obs."""
    coeffs = obs.coefficients if isinstance(obs, FourierObservable) else dict(obs)
    out = {}
    smallest = math.inf
    for (a, b), c in coeffs.items():
        if b != 0:
            raise PreconditionError(f"mode ({a}, {b}) is not abelian")
        if a == 0:
            raise PreconditionError("mean mode present; project to zero mean first")
        den = _e(_shift_phase(a, 0, params)) - 1.0
        smallest = min(smallest, abs(den))
        if abs(den) < SMALL_DIVISOR:
            raise SmallDivisorError(a, abs(den))
        out[(a, 0)] = c / den
    u = FourierObservable(out)
    g = FourierObservable(coeffs)
    resid = coboundary(u, params).max_abs_distance(g)
    return AbelianSolution(u, smallest, resid)


@dataclass
class TrivialityReport:
    trivial: bool | None
    worst_obstruction: float
    per_component: list = field(default_factory=list)
    smallest_divisor: float = math.inf
    transfer: FourierObservable | None = None
    status: str = "ok"

    def to_json_dict(self):
        return {"trivial": self.trivial, "status": self.status,
                "worst_obstruction": self.worst_obstruction,
                "smallest_abelian_divisor": (None if math.isinf(self.smallest_divisor)
                                             else self.smallest_divisor),
                "components": self.per_component}


def triviality_test(f, params, tol=DEFAULT_TOL, grid=256):
    """Is f - mean(f) a coboundary over Phi (i.e. is the time change trivial)?"""
    lo, _ = certified_bounds(f, grid)
    if lo <= 0:
        raise PreconditionError("roof must be certified strictly positive")
    g = project_zero_mean(f)
    comps, rest = decompose_Hmn(g)
    per = []
    worst = 0.0
    trivial = True
    solved = []
    for c in comps:
        D = invariant_distribution(c, params)
        scale = c.l2()
        ok = abs(D.value) <= tol * scale
        entry = {"m": c.m, "n": c.n, "abs_D": abs(D.value), "l2": scale, "residual": None}
        if ok:
            sol = solve_cohomological(c, params, tol)
            entry["residual"] = sol.residual
            solved.append(sol.u)
        trivial &= ok
        worst = max(worst, abs(D.value))
        per.append(entry)
    smallest = math.inf
    status = "ok"
    transfer = None
    abelian_u = FourierObservable()
    if not rest.is_zero():
        try:
            ab = solve_abelian(rest, params, tol)
            smallest = ab.smallest_divisor
            abelian_u = ab.u
        except SmallDivisorError as exc:
            status = "inconclusive"
            smallest = exc.divisor
            trivial = None
    if trivial:
        transfer = reassemble(solved, abelian_u)
    return TrivialityReport(trivial, worst, per, smallest, transfer, status)


def cohomology_report(g, params, tol=DEFAULT_TOL):
    """Per-component |D| and (where solvable) residuals for an arbitrary zero-mean g."""
    comps, rest = decompose_Hmn(project_zero_mean(g))
    rows = []
    for c in comps:
        D = invariant_distribution(c, params)
        row = {"m": c.m, "n": c.n, "abs_D": abs(D.value), "l2": c.l2(), "residual": None}
        if abs(D.value) <= tol * c.l2():
            row["residual"] = solve_cohomological(c, params, tol).residual
        rows.append(row)
    smallest = None
    if not rest.is_zero():
        try:
            smallest = solve_abelian(rest, params, tol).smallest_divisor
        except SmallDivisorError as exc:
            smallest = exc.divisor
    return {"components": rows, "smallest_abelian_divisor": smallest,
            "worst_obstruction": max((r["abs_D"] for r in rows), default=0.0)}
