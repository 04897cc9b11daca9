import numpy as np
import pytest

from nilflow import presets
from nilflow.arith import circle_dist
from nilflow.birkhoff import birkhoff_sum_direct
from nilflow.errors import DomainError
from nilflow.observables import FourierObservable
from nilflow.specialflow import (RoofFunction, SpecialFlowState, flow, flow_batch, flow_samples,
                                 hitting_index, hitting_indices, make_state, sample_under_roof,
                                 time_rescale)
from nilflow.torus import SkewShiftParams, TorusPoint, step

PARAMS = SkewShiftParams.create("golden", 0.0)
ROOF = presets.roof("nontrivial", PARAMS)


def same_state(a, b, tol=1e-9):
    return (circle_dist(a.base.x - b.base.x) <= tol and circle_dist(a.base.y - b.base.y) <= tol
            and abs(a.s - b.s) <= tol)


class TestRoof:
    def test_bounds(self):
        assert 0 < ROOF.certified_min <= 0.8 and ROOF.certified_max >= 1.2
        assert ROOF.mean == 1.0

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            RoofFunction.from_observable(FourierObservable.cos_mode(1, 0))

    def test_state_check(self):
        with pytest.raises(DomainError):
            make_state(ROOF, 0.0, 0.0, 5.0)
        with pytest.raises(DomainError):
            make_state(ROOF, 0.0, 0.0, -0.1)


def test_hitting_index_inequalities():
    p = TorusPoint.of(0.3, 0.4)
    for t in (0.5, 3.0, 1234.5, 10 ** 6 + 0.25, -0.5, -777.7):
        N = hitting_index(ROOF, PARAMS, p, 0.0, t)
        assert birkhoff_sum_direct(ROOF.obs, PARAMS, p, N) <= t
        assert t < birkhoff_sum_direct(ROOF.obs, PARAMS, p, N + 1)


def test_section_consistency_by_stepping():
    st_ = make_state(ROOF, 0.6, 0.1, 0.2)
    p, level, crossings, t_end = st_.base, st_.s, 0, 40.0
    remaining = t_end
    while True:
        room = ROOF(p) - level
        if remaining < room:
            break
        remaining -= room
        level = 0.0
        p = step(PARAMS, p)
        crossings += 1
    assert hitting_index(ROOF, PARAMS, st_.base, st_.s, t_end) == crossings
    out = flow(ROOF, PARAMS, st_, t_end)
    assert out.s == pytest.approx(remaining, abs=1e-12)
    assert circle_dist(out.base.x - p.x) < 1e-12


def test_zero_time_identity():
    st_ = make_state(ROOF, 0.1, 0.2, 0.3)
    assert flow(ROOF, PARAMS, st_, 0.0) is st_


def test_additivity_many():
    rng = np.random.default_rng(99)
    for _ in range(200):
        st_ = make_state(ROOF, rng.random(), rng.random(), 0.5 * rng.random())
        t1, t2 = rng.uniform(-1e4, 1e4, 2)
        two = flow(ROOF, PARAMS, flow(ROOF, PARAMS, st_, t1), t2)
        one = flow(ROOF, PARAMS, st_, t1 + t2)
        assert same_state(two, one)


def test_group_inverse():
    st_ = make_state(ROOF, 0.25, 0.75, 0.1)
    assert same_state(flow(ROOF, PARAMS, flow(ROOF, PARAMS, st_, 5e3), -5e3), st_)


def test_states_stay_valid():
    st_ = make_state(ROOF, 0.9, 0.9, 0.0)
    for t in (1e-3, 1.0, 77.0, 1e5, -3.0):
        out = flow(ROOF, PARAMS, st_, t)
        out.check(ROOF)


def test_flow_samples_match_flow(backend):
    st_ = make_state(ROOF, 0.3, 0.8, 0.4)
    times = np.array([100.0, 0.0, 3.5, 2e4, 50.0])
    fs = flow_samples(ROOF, PARAMS, st_, times)
    for k, t in enumerate(times):
        ref = flow(ROOF, PARAMS, st_, float(t))
        assert fs.N[k] == hitting_index(ROOF, PARAMS, st_.base, st_.s, float(t))
        assert circle_dist(fs.x[k] - float(ref.base.x)) < 1e-9 and abs(fs.s[k] - ref.s) < 1e-9
    assert fs.to_csv().splitlines()[0] == "t,x,y,s,N"
    with pytest.raises(DomainError):
        flow_samples(ROOF, PARAMS, st_, [-1.0])


def test_hitting_indices_batch(backend):
    rng = np.random.default_rng(3)
    states = sample_under_roof(ROOF, rng, 50)
    got = hitting_indices(ROOF, PARAMS, states, 321.0)
    want = [hitting_index(ROOF, PARAMS, s.base, s.s, 321.0) for s in states]
    assert list(got) == want
    assert len(flow_batch(ROOF, PARAMS, states[:3], 1.0)) == 3


def test_return_time_average():
    st_ = make_state(ROOF, 0.2, 0.2, 0.0)
    t = 1e6 * ROOF.mean
    N = hitting_index(ROOF, PARAMS, st_.base, st_.s, t)
    assert abs(t / N - ROOF.mean) <= 0.01 * ROOF.mean


class TestRescale:
    def test_identity(self):
        assert time_rescale(ROOF, 1) is ROOF

    def test_halves(self):
        half = time_rescale(ROOF, 2)
        assert half.mean == pytest.approx(0.5)
        with pytest.raises(DomainError):
            time_rescale(ROOF, 0)

    def test_flow_equivalence(self):
        r = 3.0
        g = time_rescale(ROOF, r)
        rng = np.random.default_rng(8)
        for _ in range(20):
            st_ = make_state(ROOF, rng.random(), rng.random(), 0.5 * rng.random())
            t = float(rng.uniform(0, 500))
            a = flow(ROOF, PARAMS, st_, r * t)
            b = flow(g, PARAMS, SpecialFlowState(st_.base, st_.s / r), t)
            assert circle_dist(a.base.x - b.base.x) < 1e-9 and abs(a.s - r * b.s) < 1e-9


def test_sample_under_roof_valid_and_uniform():
    states = sample_under_roof(ROOF, np.random.default_rng(1), 4000)
    vals = np.array([s.s / ROOF(s.base) for s in states])
    assert len(states) == 4000 and vals.max() < 1 and vals.min() >= 0
    xs = np.array([float(s.base.x) for s in states])
    assert abs(xs.mean() - 0.5) < 0.03
