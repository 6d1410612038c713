import numpy as np
import pytest

from rootcloak.core.exceptions import EscapeFailure, GeometryInvalid
from rootcloak.geometry.geodesic import (
    GeodesicState,
    Line,
    angle_between,
    bounding_radius,
    hamilton_rhs,
    integrate,
    launch_distance,
    launch_state,
    mirror_residual,
    reverse,
)
from rootcloak.geometry.metricfield import HamiltonianField, evaluate


def energy_at(hf: HamiltonianField, x: np.ndarray, p: np.ndarray) -> float:
    return 0.5 * float(p @ evaluate(hf, x, derivatives=False).H @ p)


def test_rhs_is_free_motion_outside(field_n2):
    p = np.array([0.3, -1.1])
    dx, dp = hamilton_rhs(field_n2, GeodesicState(x=np.array([20.0, 0.0]), p=p))
    np.testing.assert_array_equal(dx, p)
    np.testing.assert_array_equal(dp, np.zeros(2))


def test_rhs_matches_energy_gradient(field_n2, ball_points):
    hf = field_n2
    step = 1e-6
    eye = np.eye(2)
    rng = np.random.default_rng(11)
    for x in ball_points(hf.centers[1], hf.radius, 20, seed=12, shrink=0.9):
        p = rng.normal(size=2)
        dx, dp = hamilton_rhs(hf, GeodesicState(x=x, p=p))
        grad_x = np.array([(energy_at(hf, x + step * e, p) - energy_at(hf, x - step * e, p)) / (2 * step) for e in eye])
        grad_p = np.array([(energy_at(hf, x, p + step * e) - energy_at(hf, x, p - step * e)) / (2 * step) for e in eye])
        np.testing.assert_allclose(dp, -grad_x, atol=1e-6)
        np.testing.assert_allclose(dx, grad_p, atol=1e-6)


def test_launch_state(field_n2):
    direction = np.array([3.0, 4.0])
    state = launch_state(direction, np.array([1.0, 1.0]), launch_distance(field_n2))
    unit = direction / 5.0
    assert state.x @ unit == pytest.approx(-launch_distance(field_n2))
    np.testing.assert_allclose(state.p, np.sqrt(2.0) * unit)
    assert state.energy(field_n2) == pytest.approx(1.0)
    assert np.linalg.norm(state.x) < bounding_radius(field_n2)


def test_line_distance_and_angle():
    line = Line.through(np.zeros(2), np.array([2.0, 0.0]))
    assert line.distance_to(np.array([5.0, -3.0])) == pytest.approx(3.0)
    assert angle_between(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(np.pi / 2)
    assert angle_between(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == pytest.approx(np.pi)


def test_flat_field_traces_are_straight(field_n2):
    flat = field_n2.with_epsilon(0.0)
    direction = np.array([1.0, 0.3])
    for offset in (np.zeros(2), np.array([-0.2, 0.5])):
        trace = integrate(flat, launch_state(direction, offset, launch_distance(flat)), bounding_radius(flat), tol=1e-12)
        assert trace.lateral_deviation <= 1e-10
        assert trace.angular_deviation <= 1e-10
        assert trace.energy_drift <= 1e-12
        assert abs(trace.time_delay) <= 1e-8
        assert np.linalg.norm(trace.final.x) == pytest.approx(bounding_radius(flat), rel=1e-9)


def test_crossings_are_detected_on_a_straight_line(field_n2):
    flat = field_n2.with_epsilon(0.0)
    center = flat.centers[2]
    direction = np.array([0.0, 1.0])
    trace = integrate(flat, launch_state(direction, center, launch_distance(flat)), bounding_radius(flat), tol=1e-12)
    assert 2 in trace.balls_crossed
    crossing = next(c for c in trace.crossings if c.ball == 2)
    x_in, _ = trace.state_at(crossing.t_in)
    x_out, _ = trace.state_at(crossing.t_out)
    assert np.linalg.norm(x_in - center) == pytest.approx(flat.radius, abs=1e-8)
    assert np.linalg.norm(x_out - center) == pytest.approx(flat.radius, abs=1e-8)
    assert crossing.t_out - crossing.t_in == pytest.approx(2 * flat.radius / np.sqrt(2.0), rel=1e-6)


def test_energy_is_conserved_through_the_obstacle(field_n2):
    root = field_n2.rs.roots[0]
    state = launch_state(root, 0.5 * field_n2.centers[1], launch_distance(field_n2))
    trace = integrate(field_n2, state, bounding_radius(field_n2), tol=1e-11)
    assert trace.energy_drift <= 1e-8
    assert len(trace.polyline()) == trace.t.size


def test_reverse_retraces_the_entry_line(field_n2):
    state = launch_state(field_n2.rs.roots[1], np.zeros(2), launch_distance(field_n2))
    options = dict(tol=1e-11)
    trace = integrate(field_n2, state, bounding_radius(field_n2), **options)
    back = reverse(field_n2, trace, bounding_radius(field_n2), **options)
    assert trace.entry_line.distance_to(back.exit_line.point) <= 1e-7
    assert angle_between(trace.entry_line.direction, -back.exit_line.direction) <= 1e-7


def test_mirror_residual_of_straight_line(field_n2):
    flat = field_n2.with_epsilon(0.0)
    root = flat.rs.roots[0]
    state = launch_state(root, np.array([0.4, -0.1]), launch_distance(flat))
    trace = integrate(flat, state, bounding_radius(flat), tol=1e-12)
    assert mirror_residual(trace, root) <= 1e-9


def test_mirror_requires_a_crossing(field_n2):
    flat = field_n2.with_epsilon(0.0)
    root = flat.rs.roots[0]
    perpendicular = np.array([-root[1], root[0]])
    state = launch_state(perpendicular, root, launch_distance(flat))
    trace = integrate(flat, state, bounding_radius(flat), tol=1e-10)
    with pytest.raises(GeometryInvalid):
        mirror_residual(trace, root)


def test_launch_inside_a_ball_is_rejected(field_n2):
    with pytest.raises(GeometryInvalid):
        integrate(field_n2, GeodesicState(x=field_n2.centers[0], p=np.array([1.0, 0.0])), bounding_radius(field_n2))


def test_launch_outside_bounding_sphere_is_rejected(field_n2):
    x = np.array([2.0 * bounding_radius(field_n2), 0.0])
    with pytest.raises(GeometryInvalid):
        integrate(field_n2, GeodesicState(x=x, p=np.array([-1.0, 0.0])), bounding_radius(field_n2))


def test_zero_momentum_is_rejected(field_n2):
    x = np.array([launch_distance(field_n2), 0.0])
    with pytest.raises(GeometryInvalid):
        integrate(field_n2, GeodesicState(x=x, p=np.zeros(2)), bounding_radius(field_n2))


def test_parameter_cap_raises_escape_failure(field_n2):
    state = launch_state(np.array([1.0, 0.0]), np.zeros(2), launch_distance(field_n2))
    with pytest.raises(EscapeFailure):
        integrate(field_n2, state, bounding_radius(field_n2), max_param=1e-3)
