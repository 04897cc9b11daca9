import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from nilflow import presets
from nilflow.birkhoff import (MIN_FIT_N, birkhoff_profile, birkhoff_sum_direct, birkhoff_sum_mode,
                              birkhoff_sum_modes, divergence_bound_fit, grid_sums, growth_exponent,
                              l2_grid_norm, loglog_fit, mode_sum, orbit_window_sums,
                              precision_settings, sup_norm_estimate)
from nilflow.errors import DomainError
from nilflow.observables import FourierObservable
from nilflow.torus import SkewShiftParams, TorusPoint, iterate

GOLDEN = SkewShiftParams.create("golden", 0.0)
GOLDEN_B = SkewShiftParams.create("golden", 0.1)


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1.0)


@pytest.fixture(scope="module")
def g_rand():
    return FourierObservable.random(np.random.default_rng(7), radius=3, zero_mean=False)


def test_naive_oracle_small_N(golden_beta, g_rand):
    al, be = golden_beta.alpha.to_fraction(), golden_beta.beta.to_fraction()
    ref = oracles.naive_birkhoff(dict(g_rand.coefficients), al, be,
                                 Fraction(0.25), Fraction(0.5), 300)
    p = TorusPoint.of(0.25, 0.5)
    assert abs(birkhoff_sum_direct(g_rand, golden_beta, p, 300) - ref) < 1e-10
    assert abs(birkhoff_sum_modes(g_rand, golden_beta, p, 300) - ref) < 1e-10


def test_single_mode_against_closed_form_terms(silver):
    p = TorusPoint.of(0.4, 0.9)
    direct = sum(np.exp(2j * math.pi * (3 * float(q.x) - 2 * float(q.y)))
                 for q in (iterate(silver, p, k) for k in range(500)))
    assert abs(birkhoff_sum_mode(3, -2, silver, p, 500) - direct) < 1e-10


def test_negative_N_branch(golden_beta, g_rand):
    p = TorusPoint.of(0.3, 0.6)
    N = 12345
    expected = -birkhoff_sum_direct(g_rand, golden_beta, iterate(golden_beta, p, -N), N)
    assert rel(birkhoff_sum_direct(g_rand, golden_beta, p, -N), expected) < 1e-10
    assert rel(birkhoff_sum_modes(g_rand, golden_beta, p, -N), expected) < 1e-9
    assert birkhoff_sum_direct(g_rand, golden_beta, p, 0) == 0.0


def test_length_guard(golden, g_rand):
    with pytest.raises(DomainError):
        birkhoff_sum_direct(g_rand, golden, TorusPoint.of(0, 0), 2 ** 33 + 1)


def test_mode_vs_direct_large_N(golden_beta, g_rand, backend):
    p = TorusPoint.of(0.77, 0.11)
    for N in (10 ** 3, 10 ** 5, 10 ** 6):
        assert rel(birkhoff_sum_direct(g_rand, golden_beta, p, N),
                   birkhoff_sum_modes(g_rand, golden_beta, p, N)) < 1e-9


def test_anchor_boundary_splitting(golden):
    p = TorusPoint.of(0.5, 0.5)
    whole = mode_sum(1, 1, golden, p, 2 ** 20 - 10, 30)
    parts = mode_sum(1, 1, golden, p, 2 ** 20 - 10, 10) + mode_sum(1, 1, golden, p, 2 ** 20, 20)
    assert abs(whole - parts) < 1e-12


@settings(max_examples=100)
@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.floats(0, 1, exclude_max=True),
       st.floats(0, 1, exclude_max=True))
def test_cocycle_identity(m, n, x, y):
    params = GOLDEN_B
    g = presets.weyl11() + 0.5
    p = TorusPoint.of(x, y)
    lhs = birkhoff_sum_modes(g, params, p, m + n)
    rhs = birkhoff_sum_modes(g, params, p, m) + birkhoff_sum_modes(g, params, iterate(params, p, m), n)
    assert rel(lhs, rhs) < 1e-9


@settings(max_examples=30)
@given(st.integers(1, 10 ** 5), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(N, a, b):
    params = GOLDEN
    g, h = presets.weyl11(), FourierObservable.cos_mode(2, 1) + 1
    p = TorusPoint.of(0.2, 0.3)
    lhs = birkhoff_sum_direct(a * g + b * h, params, p, N)
    rhs = a * birkhoff_sum_direct(g, params, p, N) + b * birkhoff_sum_direct(h, params, p, N)
    scale = max(abs(a), abs(b), 1.0) * N
    assert abs(lhs - rhs) <= 1e-10 * scale


class TestProfile:
    def test_zero_and_values(self, golden, g_rand):
        p = TorusPoint.of(0.1, 0.2)
        prof = birkhoff_profile(g_rand, golden, p, [0, 10, 1000, 2 ** 21])
        assert prof.values[0] == 0.0
        for n, v in zip(prof.checkpoints, prof.values):
            assert rel(v, birkhoff_sum_direct(g_rand, golden, p, n)) < 1e-10
        again = birkhoff_profile(g_rand, golden, p, [0, 10, 1000, 2 ** 21])
        assert again.values == prof.values
        assert prof.to_csv().splitlines()[0] == "N,value"

    def test_bad_checkpoints(self, golden, g_rand):
        with pytest.raises(DomainError):
            birkhoff_profile(g_rand, golden, TorusPoint.of(0, 0), [10, 5])


def test_grid_sums_match_direct(golden_beta, g_rand):
    M, N = 16, 777
    G = grid_sums(g_rand, golden_beta, N, M)
    for i, j in ((0, 0), (3, 11), (15, 7)):
        p = TorusPoint.of(i / M, j / M)
        assert abs(G[i, j] - birkhoff_sum_direct(g_rand, golden_beta, p, N)) < 1e-9


def test_orbit_window_sums(golden, g_rand):
    p = TorusPoint.of(0.3, 0.3)
    w = orbit_window_sums(g_rand, golden, p, 500, 20)
    for j in (0, 7, 19):
        assert abs(w[j] - birkhoff_sum_direct(g_rand, golden, iterate(golden, p, j), 500)) < 1e-9


def test_l2_law_single_component(golden):
    g = presets.weyl11()
    for k in (10, 14, 18):
        v = l2_grid_norm(g, golden, 2 ** k) / 2 ** (k / 2)
        assert 0.1 <= v <= 10.0


def test_sup_norm_lower_bound_is_attained(golden, g_rand):
    est = sup_norm_estimate(g_rand, golden, 4096, 5000)
    x, y = est.argmax
    assert est.value == pytest.approx(abs(birkhoff_sum_direct(g_rand, golden, TorusPoint.of(x, y), 4096)),
                                      rel=1e-6)
    with pytest.raises(DomainError):
        sup_norm_estimate(g_rand, golden, 10, 10)


class TestGrowth:
    Ns = [2 ** k for k in range(10, 21)]

    def test_loglog_exact(self):
        assert loglog_fit([1, 10, 100], [3, 30, 300])[0] == pytest.approx(1.0)

    def test_constant_slope_one(self, golden):
        fit = growth_exponent(FourierObservable.constant(1.0), golden, self.Ns)
        assert fit.slope == pytest.approx(1.0, abs=1e-9)
        assert fit.fitted_N == self.Ns
        assert fit.to_csv().startswith("N,value\n")

    def test_short_N_excluded(self, golden):
        fit = growth_exponent(FourierObservable.constant(1.0), golden, [16] + self.Ns)
        assert fit.fitted_N[0] == MIN_FIT_N and fit.per_N[0][0] == 16

    def test_errors(self, golden):
        with pytest.raises(DomainError):
            growth_exponent(FourierObservable(), golden, self.Ns)
        with pytest.raises(DomainError):
            growth_exponent(presets.weyl11(), golden, [2 ** 10, 2 ** 11, 2 ** 12])


def test_divergence_fit_vertical_pairs(golden):
    g = presets.weyl11()
    rng = np.random.default_rng(5)
    pairs = []
    for _ in range(3):
        p = TorusPoint.of(rng.random(), rng.random())
        pairs.append((p, p.vertical_shift(1e-4)))
    pairs.append((pairs[0][0], pairs[0][0]))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fit = divergence_bound_fit(g, golden, pairs, [10 ** 3, 10 ** 4, 10 ** 5])
    assert any("coincident" in str(w.message) for w in caught)
    ratios = [r for *_, r in fit.samples]
    assert fit.C_prime == max(ratios) and fit.C_prime < 50
    late = max(r for n, _, _, r in fit.samples if n == 10 ** 5)
    assert late <= fit.C_prime


def test_precision_settings_keys():
    assert set(precision_settings()) == {"phase_budget", "subanchor_interval", "anchor_interval",
                                          "backend"}
