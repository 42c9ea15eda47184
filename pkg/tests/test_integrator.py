import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridnav import (
    BumpPhase,
    GridConfig,
    GridState,
    PathIntegrator,
    PositionEstimate,
    TrajectorySample,
    body_to_world,
    bump_phase,
    calibrate_gamma,
    gen_circle,
    integrate_trajectory,
    modulate,
    phase_delta,
    step,
    update_position,
)
from gridnav.errors import CalibrationError, ConfigurationError, InputSaturationError, NoBumpError
from gridnav.gridcore import SQRT3_2
from gridnav.integrator import rotation
from gridnav.kernel import build_relative_kernel


def straight(n, vx, vy=0.0, dt=0.1, psi=0.0):
    return [TrajectorySample((k + 1) * dt, vx, vy, psi) for k in range(n)]


def path_length(samples):
    return sum(math.hypot(s.vx_body, s.vy_body) * 0.1 for s in samples)


def test_rotation_examples():
    assert np.allclose(body_to_world((1.0, 0.0), 0.0), (1.0, 0.0))
    assert np.allclose(body_to_world((0.3, -0.2), math.pi), (-0.3, 0.2), atol=1e-15)
    assert np.allclose(body_to_world((1.0, 0.0), math.pi / 2), (0.0, 1.0), atol=1e-15)
    assert np.allclose(body_to_world((0.0, 1.0), math.pi / 2), (-1.0, 0.0), atol=1e-15)
    assert np.allclose(rotation(math.pi) @ (1.0, 2.0), (-1.0, -2.0), atol=1e-15)


@settings(max_examples=100)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-7, 7))
def test_body_to_world_preserves_norm(vx, vy, psi):
    assert np.hypot(*body_to_world((vx, vy), psi)) == pytest.approx(math.hypot(vx, vy), abs=1e-9)


def test_modulate_examples():
    assert modulate((0.0, 0.0), GridConfig()) == (0.0, 0.0)
    assert modulate((0.1, 0.0), GridConfig()) == pytest.approx((0.01, 0.0))
    assert modulate((0.1, 0.0), GridConfig(alpha=2.0, beta=math.pi / 2)) == pytest.approx((0.0, 0.02))


def test_modulate_saturation_names_time():
    with pytest.raises(InputSaturationError, match="t = 4.2"):
        modulate((3.0, 0.0), GridConfig(), t=4.2)


def test_bump_phase_point_mass(grid):
    a = np.zeros(grid.n)
    a[grid.index(8, 8)] = 1.0
    ph = bump_phase(GridState(a), grid)
    assert (ph.phase_x, ph.phase_y) == pytest.approx((0.25, 0.2165), abs=5e-5)
    assert ph.resultant == pytest.approx((1.0, 1.0))


def test_bump_phase_rejects_flat_activity(grid):
    with pytest.raises(NoBumpError):
        bump_phase(GridState(np.full(grid.n, 1.0)), grid)
    with pytest.raises(NoBumpError):
        bump_phase(GridState(np.zeros(grid.n)), grid)


def test_converged_phase_is_stable(settled, grid, cfg):
    kernel = build_relative_kernel(grid, cfg)
    state, phase = settled, bump_phase(settled, grid)
    for _ in range(1000):
        state = step(state, kernel, cfg)
        nxt = bump_phase(state, grid)
        assert np.hypot(*phase_delta(phase, nxt)) < 1e-8
        phase = nxt


@pytest.mark.parametrize(
    "prev,curr,expected",
    [
        ((0.5, 0.5), (0.5, 0.5), (0.0, 0.0)),
        ((0.95, 0.2), (0.03, 0.2), (0.08, 0.0)),
        ((0.03, 0.2), (0.95, 0.2), (-0.08, 0.0)),
        # crossing the top edge lands half a period over
        ((0.3, 0.05), (0.8, 0.82), (0.0, 0.82 - SQRT3_2 - 0.05)),
        ((0.4, 0.4), (0.41, 0.43), (0.01, 0.03)),
    ],
)
def test_phase_delta_examples(prev, curr, expected):
    d = phase_delta(BumpPhase(*prev, (1, 1)), BumpPhase(*curr, (1, 1)))
    assert d == pytest.approx(expected, abs=1e-12)


def test_update_position():
    assert update_position(PositionEstimate(0.0, 0.0, 0.0), (0.01, 0.0), GridConfig(gamma=1.0))[1:] == (0.01, 0.0)
    assert update_position(PositionEstimate(0.0, 3.0, 4.0), (0.0, 0.0), GridConfig())[1:] == (3.0, 4.0)
    pos = update_position(PositionEstimate(0.0, 1.0, 2.0), (0.01, -0.02), GridConfig(gamma=2.0), t=0.1)
    assert pos == pytest.approx((0.1, 1.02, 1.96))


def test_zero_velocity_drift():
    est = integrate_trajectory(straight(1000, 0.0), GridConfig())
    assert math.hypot(est[-1].x, est[-1].y) < 1e-3


def test_constant_velocity_distance():
    cfg = GridConfig()
    est = integrate_trajectory(straight(200, 0.05), cfg.replace(gamma=calibrate_gamma(cfg)))
    assert est[-1].x == pytest.approx(1.0, rel=0.05)
    assert abs(est[-1].y) < 0.05


@pytest.mark.parametrize("nu", [0.01, 0.03, 0.05])
def test_displacement_linear_in_input(nu):
    pi = PathIntegrator(GridConfig(gamma=1.0))
    start = pi.phase
    pi.run(straight(100, nu / 0.1))
    per_step = pi.position.x / 100
    assert per_step == pytest.approx(nu, rel=0.05)
    assert start is not pi.phase


def test_rotation_equivariance_with_bias():
    samples = gen_circle()[:150]
    theta = 0.7
    base = integrate_trajectory(samples, GridConfig())
    turned = integrate_trajectory(samples, GridConfig(beta=theta))
    rot = np.array([(p.x, p.y) for p in base]) @ rotation(theta).T
    got = np.array([(p.x, p.y) for p in turned])
    assert np.max(np.hypot(*(got - rot).T)) < 0.02 * path_length(samples)


def test_reverse_trajectory_closes():
    fwd = gen_circle()[:200]
    back = [s._replace(vx_body=-s.vx_body, vy_body=-s.vy_body) for s in reversed(fwd)]
    samples = [s._replace(t=(k + 1) * 0.1) for k, s in enumerate(fwd + back)]
    est = integrate_trajectory(samples, GridConfig())
    assert math.hypot(est[-1].x, est[-1].y) < 0.02 * path_length(samples)


def test_runs_are_deterministic():
    samples = gen_circle()[:100]
    assert integrate_trajectory(samples, GridConfig(seed=4)) == integrate_trajectory(samples, GridConfig(seed=4))


def test_saturation_reports_sample_index():
    samples = straight(5, 0.1)
    samples[3] = samples[3]._replace(vx_body=5.0)
    with pytest.raises(InputSaturationError, match="sample 3") as info:
        integrate_trajectory(samples, GridConfig())
    assert info.value.index == 3


def test_time_must_increase():
    samples = straight(5, 0.1)
    samples[2] = samples[2]._replace(t=0.1)
    with pytest.raises(ConfigurationError, match="sample 2"):
        integrate_trajectory(samples, GridConfig())


@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_calibration_recovers_inverse_alpha(alpha):
    assert calibrate_gamma(GridConfig(alpha=alpha)) == pytest.approx(1.0 / alpha, rel=0.05)


def test_calibration_is_deterministic():
    assert calibrate_gamma(GridConfig(seed=5)) == calibrate_gamma(GridConfig(seed=5))


def test_calibration_failure():
    with pytest.raises(CalibrationError):
        calibrate_gamma(GridConfig(), speed=5.0)
