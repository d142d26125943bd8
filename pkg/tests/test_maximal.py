import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_maximal
from ptwhardy.generators import path_space, random_space
from ptwhardy.maximal import (
    MaximalQuery,
    dump_field,
    load_field,
    maximal_all,
    maximal_at,
    restricted_maximal,
    weak_type_check,
)
from ptwhardy.rng import SplitMix64


def test_zero_radius_is_pointwise():
    s = path_space(3)
    assert restricted_maximal(s, [0.0, -3.0, 1.0], MaximalQuery(2.0, 0.0, "v1")) == 3.0


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
@pytest.mark.parametrize("r", [0.0, 0.5, 1.5, 10.0])
def test_constant_field(p, r):
    s = random_space(SplitMix64(1), 6)
    assert restricted_maximal(s, np.full(6, 0.7), MaximalQuery(p, r, 2)) == pytest.approx(0.7)


def test_spike_on_three_path():
    s = path_space(3)
    assert restricted_maximal(s, [0, 1, 0], MaximalQuery(1.0, 1.5, "v1")) == 1.0
    # the end point only sees the spike through balls of mass at least 2
    assert restricted_maximal(s, [0, 1, 0], MaximalQuery(1.0, 1.5, "v0")) == pytest.approx(0.5)


def test_invalid_query():
    with pytest.raises(ValueError):
        MaximalQuery(0.5, 1.0, 0)
    with pytest.raises(ValueError):
        MaximalQuery(1.0, -1.0, 0)


def test_matches_brute_force():
    rng = SplitMix64(2)
    for _ in range(12):
        s = random_space(rng, rng.randint(2, 7))
        f = np.array(rng.uniform_array(s.n, -1, 2))
        p = rng.uniform(1, 3)
        r = rng.uniform(0.1, 4)
        x = rng.randint(0, s.n - 1)
        assert restricted_maximal(s, f, MaximalQuery(p, r, x)) == pytest.approx(brute_maximal(s, f, p, x, r), rel=1e-12)


def test_vector_and_scalar_agree():
    s = random_space(SplitMix64(4), 9)
    f = np.array(SplitMix64(5).uniform_array(9))
    allv = maximal_all(s, f, 2.0, 1.7)
    for x in range(9):
        assert allv[x] == pytest.approx(maximal_at(s, f, 2.0, x, 1.7), rel=1e-14)


def test_field_roundtrip_and_missing_vertex():
    s = path_space(3)
    f = np.array([0.25, 1.0, 0.0])
    assert np.array_equal(load_field(s, dump_field(s, f)), f)
    with pytest.raises(ValueError):
        load_field(s, json.dumps({"values": {"v0": 1}}))


def test_weak_type_trivial_cases():
    s = random_space(SplitMix64(6), 5)
    cert = weak_type_check(s, np.zeros(5), 2.0, 1.0, 1.0, 0.5, 0)
    assert cert.passed and cert.lhs == 0.0 and cert.rhs == 0.0
    cert = weak_type_check(s, np.full(5, 0.3), 1.0, 1.0, 0.5, 0.31, 2)
    assert cert.passed and cert.lhs == 0.0


def _fields(seed, n):
    rng = SplitMix64(seed)
    return rng, np.array(rng.uniform_array(n, -1.0, 1.0))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.floats(1, 3), st.floats(1, 3), st.floats(0.05, 3), st.floats(0, 3))
def test_power_mean_monotone(seed, p1, p2, r, extra):
    s = random_space(SplitMix64(seed), 6)
    _, f = _fields(seed + 1, 6)
    lo, hi = sorted((p1, p2))
    assert np.all(maximal_all(s, f, lo, r) <= maximal_all(s, f, hi, r) + 1e-12)
    assert np.all(maximal_all(s, f, lo, r) <= maximal_all(s, f, lo, r + extra) + 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.floats(1, 3), st.floats(0.05, 3), st.floats(0, 5))
def test_sublinear_and_homogeneous(seed, p, r, c):
    s = random_space(SplitMix64(seed), 7)
    rng, f = _fields(seed + 2, 7)
    g = np.array(rng.uniform_array(7, -1, 1))
    mf, mg = maximal_all(s, f, p, r), maximal_all(s, g, p, r)
    assert np.all(maximal_all(s, f + g, p, r) <= mf + mg + 1e-12)
    assert np.allclose(maximal_all(s, c * f, p, r), c * mf, rtol=1e-12, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.floats(1, 3), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.05, 1.0))
def test_weak_type_estimate(seed, q, r, s_, lam):
    rng = SplitMix64(seed)
    s = random_space(rng, rng.randint(2, 9))
    f = np.array(rng.uniform_array(s.n, -1, 1))
    for x in range(s.n):
        assert weak_type_check(s, f, q, r, s_, lam, x).passed
