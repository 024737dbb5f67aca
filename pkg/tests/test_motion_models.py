import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from mmae_maneuver.errors import ConfigError, DomainError
from mmae_maneuver.filter_core import StateVector
from mmae_maneuver.motion_models import (JacobianMode, LaneChangeParams, ManeuverKind, ManeuverModel,
                                         lane_change_jacobian, lane_change_propagate,
                                         measurement_matrix, reference_lane_change_path,
                                         standard_models, straight_transition)

P01 = LaneChangeParams(3.5, 150.0, 0.1)


def test_straight_transition_examples():
    A = straight_transition(0.1)
    np.testing.assert_allclose(A @ [0, 10, 0, 0], [1, 10, 0, 0], atol=1e-15)
    np.testing.assert_allclose(A @ [0, 10, 5, -1], [1, 10, 4.9, -1], atol=1e-15)
    np.testing.assert_allclose(straight_transition(1e-12), np.eye(4), atol=1e-12)
    with pytest.raises(ConfigError):
        straight_transition(0.0)


@given(st.integers(1, 50), st.floats(1e-3, 0.5))
def test_straight_transition_semigroup(k, Ts):
    np.testing.assert_allclose(np.linalg.matrix_power(straight_transition(Ts), k),
                               straight_transition(k * Ts), rtol=1e-12, atol=1e-12)


def test_lane_change_step_examples():
    s = np.array([0.0, 10.0, 0.0, 0.0])
    right = lane_change_propagate(s, P01, ManeuverKind.RIGHT)
    left = lane_change_propagate(s, P01, ManeuverKind.LEFT)
    np.testing.assert_allclose(right[:3], [1, 10, 0], atol=1e-15)
    assert right[3] == pytest.approx(-0.007676, abs=5e-7)
    assert left[3] == pytest.approx(+0.007676, abs=5e-7)
    np.testing.assert_allclose(right, oracles.lane_change_step(s, 3.5, 150, 0.1, "right"), rtol=1e-15)


def test_lane_change_frozen_without_speed():
    out = lane_change_propagate(np.array([5.0, 0.0, 1.0, 0.2]), P01, "right")
    np.testing.assert_allclose(out, [5.0, 0.0, 1.02, 0.0], atol=1e-15)


def test_lane_change_accepts_state_vector():
    out = lane_change_propagate(StateVector(0, 10, 0, 0), P01, "right")
    assert isinstance(out, StateVector)
    assert out.vy == pytest.approx(-0.0076757, abs=1e-7)


def test_published_jacobian_example():
    F = lane_change_jacobian(np.array([0.0, 10.0, 0.0, 0.0]), P01, "right", JacobianMode.PUBLISHED)
    assert F[3, 0] == pytest.approx(-1.75 * (math.pi / 150) ** 2 * 10, rel=1e-14)
    assert F[3, 0] == pytest.approx(-0.007676, abs=5e-7)
    assert F[3, 1] == pytest.approx(-3.5 * math.pi / 300, rel=1e-14)
    assert F[3, 1] == pytest.approx(-0.036652, abs=5e-7)
    np.testing.assert_array_equal(F[3, 2:], [0, 0])
    np.testing.assert_array_equal(F[:3], straight_transition(0.1)[:3])


def test_published_jacobian_vanishes_mid_maneuver():
    F = lane_change_jacobian(np.array([75.0, 10.0, 0.0, 0.0]), P01, "right", JacobianMode.PUBLISHED)
    assert abs(F[3, 0]) < 1e-17 and abs(F[3, 1]) < 1e-16


@pytest.mark.parametrize("direction", ["left", "right"])
def test_published_jacobian_matches_closed_form(rng, direction):
    for _ in range(100):
        s = np.array([rng.uniform(-50, 200), rng.uniform(0, 40), rng.normal(), rng.normal()])
        w_L, L = rng.uniform(2, 5), rng.uniform(30, 300)
        p = LaneChangeParams(w_L, L, 0.01)
        F = lane_change_jacobian(s, p, direction, JacobianMode.PUBLISHED)
        a, b = oracles.published_jacobian_row(s, w_L, L, direction)
        assert F[3, 0] == pytest.approx(a, rel=1e-12, abs=1e-18)
        assert F[3, 1] == pytest.approx(b, rel=1e-12, abs=1e-18)


@pytest.mark.parametrize("direction", ["left", "right"])
def test_exact_jacobian_matches_finite_differences(rng, direction):
    p = LaneChangeParams(3.5, 150.0, 0.01)
    for _ in range(100):
        s = np.array([rng.uniform(0, 150), rng.uniform(1, 30), rng.normal(), rng.normal()])
        J = oracles.central_difference_jacobian(lambda v: lane_change_propagate(v, p, direction), s)
        F = lane_change_jacobian(s, p, direction, JacobianMode.EXACT)
        assert oracles.rel_err(F, J) < 1e-6


def test_exact_and_published_differ():
    s = np.array([30.0, 10.0, 0.0, 0.0])
    p = LaneChangeParams(3.5, 150.0, 0.01)
    assert not np.allclose(lane_change_jacobian(s, p, "right", "published"),
                           lane_change_jacobian(s, p, "right", "exact"))


def test_measurement_matrix():
    H = measurement_matrix()
    np.testing.assert_array_equal(H @ [1, 10, 5, -1], [1, 5])
    np.testing.assert_array_equal(H @ np.zeros(4), [0, 0])
    assert np.linalg.matrix_rank(H) == 2
    with pytest.raises(ValueError):
        H[0, 0] = 2.0


def test_reference_path():
    p = LaneChangeParams()
    assert reference_lane_change_path(0.0, p, "right") == pytest.approx(1.75)
    assert reference_lane_change_path(p.L, p, "right") == pytest.approx(-1.75)
    assert reference_lane_change_path(p.L / 2, p, "right") == pytest.approx(0.0, abs=1e-15)
    assert reference_lane_change_path(0.0, p, "left") == pytest.approx(-1.75)
    with pytest.raises(DomainError):
        reference_lane_change_path(-0.1, p, "right")
    with pytest.raises(DomainError):
        reference_lane_change_path(p.L + 1, p, "left")


def _integrate(direction, p, vx=10.0):
    s = np.array([0.0, vx, 0.0, 0.0])
    ys = []
    for _ in range(int(round(p.L / (vx * p.Ts)))):
        s = lane_change_propagate(s, p, direction)
        ys.append(s[2])
    return np.array(ys)


@pytest.mark.parametrize("direction,sign", [("right", -1.0), ("left", 1.0)])
def test_displacement_reaches_lane_width(direction, sign):
    p = LaneChangeParams(3.5, 150.0, 0.01)
    y = _integrate(direction, p)
    assert abs(y[-1] - sign * 3.5) <= 0.02 * 3.5


def test_left_right_mirror():
    p = LaneChangeParams(3.5, 150.0, 0.01)
    np.testing.assert_allclose(_integrate("left", p), -_integrate("right", p), rtol=0, atol=1e-12)


def test_x_origin_shift():
    p = LaneChangeParams(3.5, 150.0, 0.01)
    a = lane_change_propagate(np.array([0.0, 10.0, 0.0, 0.0]), p, "right")
    b = lane_change_propagate(np.array([40.0, 10.0, 0.0, 0.0]), p, "right", x_origin=40.0)
    assert a[3] == pytest.approx(b[3], rel=1e-12)


def test_params_validation():
    for bad in ({"w_L": 0}, {"L": -1}, {"Ts": math.nan}):
        with pytest.raises(ConfigError):
            LaneChangeParams(**bad)


def test_standard_models_and_dispatch():
    models = standard_models(LaneChangeParams())
    assert [m.kind for m in models] == [ManeuverKind.STRAIGHT, ManeuverKind.LEFT, ManeuverKind.RIGHT]
    straight = models[0]
    assert straight.is_linear and not models[1].is_linear
    s = np.array([1.0, 10.0, 2.0, 0.5])
    np.testing.assert_array_equal(straight.propagate(s), straight_transition(0.01) @ s)
    with pytest.raises(ConfigError):
        models[2].transition()
    assert ManeuverModel("left").kind is ManeuverKind.LEFT
