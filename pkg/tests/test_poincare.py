import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptwhardy.generators import grid_space, path_space, random_space
from ptwhardy.poincare import (
    CurveCharParams,
    PoincareParams,
    estimate_CA,
    poincare_ball_check,
    two_point_char,
    two_point_ratio,
    two_point_rows,
)
from ptwhardy.rng import SplitMix64
from ptwhardy.space import Space, ball


def abc():
    return Space(["a", "b", "c"], [1, 1, 1], [("a", "b", 1), ("b", "c", 1)])


@pytest.mark.parametrize("C, ok", [(4 / 9, True), (0.44, False), (1.0, True)])
def test_ball_form_threshold(C, ok):
    s = abc()
    cert = poincare_ball_check(s, [0, 1, 2], np.ones(3), PoincareParams(1.0, C), ball(s, "b", 1.5))
    assert cert.lhs == pytest.approx(2 / 3)
    assert cert.rhs == pytest.approx(1.5 * C)
    assert cert.passed is ok
    assert "upper-gradient: verified" in cert.notes


def test_ball_form_flags_bad_gradient():
    s = abc()
    cert = poincare_ball_check(s, [0, 5, 2], np.ones(3), PoincareParams(1.0, 1.0), ball(s, "b", 1.5))
    assert "upper-gradient: VIOLATED" in cert.notes


def test_ball_form_constant_u():
    s = random_space(SplitMix64(1), 6)
    cert = poincare_ball_check(s, np.full(6, 3.0), np.zeros(6), PoincareParams(2.0, 1.0), ball(s, 0, 1.0))
    assert cert.lhs == pytest.approx(0.0, abs=1e-15) and cert.passed


@pytest.mark.parametrize("C, ok", [(0.5, True), (0.49, False)])
def test_two_point_constant_field(C, ok):
    s = grid_space(3, 3)
    cert = two_point_char(s, np.ones(9), 0, 8, CurveCharParams(2.0, C, 2.0))
    assert cert.lhs == pytest.approx(4.0)
    assert cert.rhs == pytest.approx(8 * C)
    assert cert.passed is ok


def test_two_point_rejects_same_vertex_and_bad_params():
    s = abc()
    with pytest.raises(ValueError):
        two_point_char(s, np.ones(3), "a", "a", CurveCharParams(1.0, 1.0, 2.0))
    with pytest.raises(ValueError):
        CurveCharParams(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        PoincareParams(1.0, 1.0, lam=0.5)


def test_single_edge_estimate_is_half():
    s = path_space(2)
    assert estimate_CA(s, 1.0, 2.0, 1.0, 1, 0, extra_fields=[np.ones(2)]) == pytest.approx(0.5)


def test_estimate_is_deterministic_and_monotone_in_samples():
    s = grid_space(3, 4)
    a = estimate_CA(s, 2.0, 2.0, 1.0, 20, 7)
    assert a == estimate_CA(s, 2.0, 2.0, 1.0, 20, 7)
    assert estimate_CA(s, 2.0, 2.0, 1.0, 40, 7) >= a


def test_zero_field_ratio():
    s = abc()
    ratio, _ = two_point_ratio(s, np.zeros(3), 0, 2, 1.0, 2.0, 1.0)
    assert ratio == 0.0


def test_rows_cover_every_pair():
    s = grid_space(2, 3)
    rows = two_point_rows(s, np.ones(6), CurveCharParams(1.0, 0.5, 2.0))
    assert len(rows) == 15
    assert all(r["pass"] and r["ratio"] == pytest.approx(1.0) for r in rows)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.1, 10))
def test_two_point_ratio_is_scale_free(seed, c):
    # both sides are one-homogeneous in g, so the ratio is invariant under scaling
    rng = SplitMix64(seed)
    s = random_space(rng, rng.randint(2, 8))
    g = np.array(rng.uniform_array(s.n))
    x, y = rng.sample(range(s.n), 2)
    r1, _ = two_point_ratio(s, g, x, y, 2.0, 2.0, 1.0)
    r2, _ = two_point_ratio(s, c * g, x, y, 2.0, 2.0, 1.0)
    assert r2 == pytest.approx(r1, rel=1e-9)
