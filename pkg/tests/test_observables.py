import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nilflow.errors import DomainError, IntegrityError
from nilflow.observables import (FourierObservable, HmnComponent, certified_bounds,
                                 component_index, decompose_Hmn, evaluate, format_observable,
                                 grid_extrema, make_positive_roof, parse_observable,
                                 partial_derivative, project_zero_mean, reassemble, sobolev_norm)
from nilflow.torus import TorusPoint

seeds = st.integers(0, 2 ** 32 - 1)


def _random(seed, radius=6, zero_mean=False):
    return FourierObservable.random(np.random.default_rng(seed), radius=radius, zero_mean=zero_mean)


def test_cos_mode_values():
    g = FourierObservable.cos_mode(1, 1)
    assert evaluate(g, 0.0, 0.0) == pytest.approx(1.0)
    assert evaluate(g, 0.25, 0.25) == pytest.approx(-1.0)
    assert evaluate(g, TorusPoint.of(0.5, 0.0)) == pytest.approx(-1.0)


def test_arrays_broadcast():
    g = FourierObservable.cos_mode(2, 0)
    out = evaluate(g, np.linspace(0, 1, 5), 0.3)
    assert out.shape == (5,)


def test_non_real_rejected():
    g = FourierObservable({(1, 0): 1.0})
    assert not g.is_real()
    with pytest.raises(IntegrityError):
        evaluate(g, 0.1, 0.2)


def test_algebra():
    g = FourierObservable.cos_mode(1, 2)
    h = 2 * g - g + 1
    assert h.max_abs_distance(g + 1) < 1e-15
    assert (g / 2).l1() == pytest.approx(0.5)
    assert (-g).mean == 0.0 and (g + 3).mean == 3.0


def test_component_index():
    assert component_index(7, 3) == (1, 3, 2)
    assert component_index(-7, 3) == (2, 3, -3)
    assert component_index(5, -2) == (1, -2, -2)
    with pytest.raises(DomainError):
        component_index(1, 0)
    with pytest.raises(DomainError):
        HmnComponent(3, 3, {})


@given(seeds)
def test_decompose_reassemble_identity(seed):
    g = _random(seed)
    comps, rest = decompose_Hmn(g)
    assert dict(reassemble(comps, rest).coefficients) == dict(g.coefficients)
    for c in comps:
        for j in c.coefficients:
            a, b = c.mode(j)
            assert b == c.n and (a - c.m) % abs(c.n) == 0


@given(seeds, st.sampled_from(["x", "y"]))
def test_derivative_commutes_with_decomposition(seed, axis):
    g = _random(seed)
    left, left_rest = decompose_Hmn(partial_derivative(g, axis))
    comps, rest = decompose_Hmn(g)
    right = [decompose_Hmn(partial_derivative(c.to_observable(), axis))[0] for c in comps]
    right = [c for parts in right for c in parts]
    assert [(c.m, c.n, c.coefficients) for c in left] == [(c.m, c.n, c.coefficients) for c in right]
    assert left_rest == partial_derivative(rest, axis)


@settings(max_examples=6)
@given(seeds)
def test_zero_mean_grid_average(seed):
    g = project_zero_mean(_random(seed, radius=8, zero_mean=False))
    t = np.arange(256) / 256
    X, Y = np.meshgrid(t, t, indexing="ij")
    assert abs(evaluate(g, X, Y).mean()) <= 1e-12


def test_sobolev_norm():
    g = FourierObservable.cos_mode(1, 0)
    assert sobolev_norm(g, 0) == pytest.approx(math.sqrt(0.5))
    assert sobolev_norm(g, 1) == pytest.approx(math.sqrt(2 * 2 * 0.25))
    with pytest.raises(DomainError):
        sobolev_norm(g, -1)
    comp = decompose_Hmn(FourierObservable.cos_mode(1, 1))[0][0]
    assert comp.l2() == pytest.approx(0.5)


class TestRoof:
    def test_zero(self):
        assert make_positive_roof(FourierObservable(), 1.0) == FourierObservable.constant(1.0)

    def test_cos(self):
        g = FourierObservable.cos_mode(1, 0)
        margin = g.lipschitz_bound() / (2 * 256)
        r = make_positive_roof(g, 0.5)
        assert r.mean == pytest.approx(1.5 + margin)

    def test_already_positive(self):
        g = FourierObservable.cos_mode(1, 1) + 10
        assert make_positive_roof(g, 0.5) == g

    def test_bad_floor(self):
        with pytest.raises(DomainError):
            make_positive_roof(FourierObservable.cos_mode(1, 0), 0)

    @given(seeds)
    def test_certified_bounds_enclose_samples(self, seed):
        g = _random(seed, radius=5)
        lo, hi = certified_bounds(g, 64)
        rng = np.random.default_rng(seed)
        vals = evaluate(g, rng.random(2000), rng.random(2000))
        assert lo <= vals.min() and vals.max() <= hi
        glo, ghi = grid_extrema(g, 64)
        assert lo <= glo <= ghi <= hi


class TestExchange:
    def test_roundtrip(self):
        g = _random(3)
        assert parse_observable(format_observable(g)) == g

    def test_comments_and_order(self):
        text = "# header\n-1 -1 0.5 0\n\n1 1 0.5 0  # tail\n"
        assert parse_observable(text) == FourierObservable.cos_mode(1, 1)

    @pytest.mark.parametrize("text", ["1 1 0.5", "1 x 0 0", "1 1 1 0\n1 1 1 0"])
    def test_errors(self, text):
        with pytest.raises(DomainError):
            parse_observable(text)
