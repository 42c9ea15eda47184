"""Synthetic trajectories, baselines and error metrics.

Generators follow the sample convention of :mod:`gridnav.integrator`: sample
``k`` is stamped ``(k + 1) * dt``, holds its velocity and heading over the
preceding interval, and carries the true position at its stamp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from gridnav.errors import ConfigurationError
from gridnav.gridcore import MAX_SHIFT
from gridnav.integrator import PositionEstimate, TrajectorySample, check_time_order


@dataclass(frozen=True)
class DisturbanceSpec:
    """Wave-plus-noise corruption of the measured velocities.

    The wave is a world-frame velocity ``wave_amp * sin(2 pi wave_freq t)``
    along ``wave_dir``; ``noise_std`` is white Gaussian noise per body axis.
    """

    wave_freq: float = 1.0
    wave_amp: float = 0.02
    wave_dir: float = 0.0
    noise_std: float = 0.005
    seed: int = 0

    def __post_init__(self):
        if not self.wave_freq > 0:
            raise ConfigurationError(f"wave_freq = {self.wave_freq!r} must be > 0")
        for name in ("wave_amp", "noise_std"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError(f"{name} = {getattr(self, name)!r} must be >= 0")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed = {self.seed!r} must be an integer in [0, 2**64)")


@dataclass(frozen=True)
class ErrorReport:
    rmse: float
    final_error: float
    path_length: float
    drift_per_meter: float
    max_error: float

    def as_text(self) -> str:
        return "".join(f"{k}={getattr(self, k):.12g}\n" for k in self.__dataclass_fields__)


def _check_step(speed, dt, alpha=1.0):
    if not speed > 0 or not dt > 0:
        raise ConfigurationError(f"speed and dt must be positive, got {speed!r}, {dt!r}")
    if alpha * speed * dt >= MAX_SHIFT:
        raise ConfigurationError(
            f"alpha * speed * dt = {alpha * speed * dt:.4g} would saturate the network (limit {MAX_SHIFT})"
        )


def gen_circle(radius: float = 1.5, speed: float = 0.1, dt: float = 0.1, laps: int = 1,
               alpha: float = 1.0) -> list:
    """Counter-clockwise circle through the origin, centred at ``(0, radius)``.

    Pure surge at ``speed``; the heading of each sample is the tangent at the
    start of its interval, so the first sample has heading 0.
    """
    if not radius > 0 or laps < 1:
        raise ConfigurationError(f"need radius > 0 and laps >= 1, got {radius!r}, {laps!r}")
    _check_step(speed, dt, alpha)
    rate = speed / radius
    n = math.ceil(round(laps * 2.0 * math.pi * radius / (speed * dt), 9))
    k = np.arange(n)
    psi = rate * dt * k
    theta = rate * dt * (k + 1)
    tx = radius * np.sin(theta)
    ty = radius * (1.0 - np.cos(theta))
    return [
        TrajectorySample(float((i + 1) * dt), float(speed), 0.0, float(psi[i]), float(tx[i]), float(ty[i]))
        for i in range(n)
    ]


def gen_waypoint_rect(width: float = 4.0, height: float = 2.0, speed: float = 0.1, dt: float = 0.1,
                      alpha: float = 1.0) -> list:
    """Rectangle from the origin: east, north, west, south, turning on the spot."""
    if not width > 0 or not height > 0:
        raise ConfigurationError(f"rectangle sides must be positive, got {width!r} x {height!r}")
    _check_step(speed, dt, alpha)
    stride = speed * dt
    samples = []
    x = y = 0.0
    corners = [(width, 0.0), (width, height), (0.0, height), (0.0, 0.0)]
    units = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
    for (cx, cy), (c, s), psi in zip(corners, units, (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)):
        length = abs(cx - x) + abs(cy - y)
        full = int(math.floor(round(length / stride, 9)))
        legs = [speed] * full
        rest = length - full * stride
        if rest > 1e-12:
            legs.append(rest / dt)
        start_x, start_y = x, y
        travelled = 0.0
        for v in legs:
            travelled += v * dt
            x, y = start_x + c * travelled, start_y + s * travelled
            samples.append(TrajectorySample((len(samples) + 1) * dt, v, 0.0, psi, x, y))
        # land exactly on the corner
        x, y = cx, cy
        last = samples[-1]
        samples[-1] = last._replace(truth_x=cx, truth_y=cy)
    return samples


def add_disturbance(samples: Sequence[TrajectorySample], spec: DisturbanceSpec) -> list:
    """Corrupt the measured body velocities; ground truth is left untouched."""
    if spec.wave_amp == 0.0 and spec.noise_std == 0.0:
        return list(samples)
    rng = np.random.default_rng(spec.seed)
    t = np.array([s.t for s in samples])
    psi = np.array([s.psi for s in samples])
    wave = spec.wave_amp * np.sin(2.0 * np.pi * spec.wave_freq * t)
    wx, wy = wave * math.cos(spec.wave_dir), wave * math.sin(spec.wave_dir)
    # world -> body is a rotation by -psi
    bx = np.cos(psi) * wx + np.sin(psi) * wy
    by = -np.sin(psi) * wx + np.cos(psi) * wy
    noise = rng.normal(0.0, spec.noise_std, size=(len(samples), 2)) if spec.noise_std > 0 else np.zeros((len(samples), 2))
    return [
        s._replace(vx_body=s.vx_body + float(bx[i] + noise[i, 0]), vy_body=s.vy_body + float(by[i] + noise[i, 1]))
        for i, s in enumerate(samples)
    ]


def _world_velocities(samples):
    v = np.array([(s.vx_body, s.vy_body) for s in samples], dtype=float).reshape(-1, 2)
    psi = np.array([s.psi for s in samples], dtype=float)
    c, s = np.cos(psi), np.sin(psi)
    return np.column_stack([c * v[:, 0] - s * v[:, 1], s * v[:, 0] + c * v[:, 1]])


def _sample_dts(samples):
    t = np.array([s.t for s in samples], dtype=float)
    return np.diff(t, prepend=0.0) if t.size else t


def _estimates(samples, xy):
    return [PositionEstimate(s.t, float(p[0]), float(p[1])) for s, p in zip(samples, xy)]


def dead_reckon(samples: Sequence[TrajectorySample]) -> list:
    """Integrate heading-rotated body velocity from the origin."""
    samples = list(samples)
    check_time_order(samples)
    if not samples:
        return []
    steps = _world_velocities(samples) * _sample_dts(samples)[:, None]
    return _estimates(samples, np.cumsum(steps, axis=0))


def kalman_velocity(z: np.ndarray, dts: np.ndarray, meas_noise: float, process_noise: float,
                    smooth: bool = True, init_var: Optional[float] = None) -> np.ndarray:
    """Per-axis scalar Kalman estimate of velocity from noisy measurements ``z``.

    The process model is a random walk (constant velocity between samples)
    with spectral density ``process_noise``.  By default the filter starts
    from the first measurement; a numeric ``init_var`` instead starts it at
    rest, velocity 0 with that variance.  With ``smooth`` a
    Rauch-Tung-Striebel backward pass follows the forward filter.
    """
    n = len(z)
    filtered = np.empty_like(z)
    var_f = np.empty(n)
    var_p = np.empty(n)
    at_rest = init_var is not None
    v = np.zeros(z.shape[1:]) if at_rest else z[0].copy()
    p = init_var if at_rest else meas_noise
    for k in range(n):
        if k or at_rest:
            p = p + process_noise * dts[k]
            gain = p / (p + meas_noise)
            v = v + gain * (z[k] - v)
            var_p[k] = p
            p = (1.0 - gain) * p
        else:
            var_p[k] = p
        filtered[k] = v
        var_f[k] = p
    if not smooth:
        return filtered
    out = filtered.copy()
    for k in range(n - 2, -1, -1):
        out[k] = filtered[k] + (var_f[k] / var_p[k + 1]) * (out[k + 1] - filtered[k])
    return out


def kf_velocity_baseline(samples: Sequence[TrajectorySample], meas_noise: float = 1e-4,
                         process_noise: float = 1e-3, smooth: bool = True,
                         init_var: Optional[float] = None) -> list:
    """Kalman-smoothed world velocity integrated to position from the origin.

    ``smooth=False`` gives the causal filter only; ``init_var`` starts the
    filter at rest (see :func:`kalman_velocity`).
    """
    if not meas_noise > 0 or not process_noise > 0:
        raise ConfigurationError("meas_noise and process_noise must be > 0")
    if init_var is not None and not init_var > 0:
        raise ConfigurationError("init_var must be > 0")
    samples = list(samples)
    check_time_order(samples)
    if not samples:
        return []
    dts = _sample_dts(samples)
    v = kalman_velocity(_world_velocities(samples), dts, meas_noise, process_noise, smooth, init_var)
    return _estimates(samples, np.cumsum(v * dts[:, None], axis=0))


def _truth_xy(truth):
    rows = []
    for s in truth:
        if isinstance(s, TrajectorySample):
            if s.truth_x is None or s.truth_y is None:
                raise ConfigurationError(f"sample at t = {s.t:g} has no ground truth")
            rows.append((s.t, s.truth_x, s.truth_y))
        else:
            rows.append((s.t, s.x, s.y))
    return np.array(rows, dtype=float).reshape(-1, 3)


def compare(est: Sequence[PositionEstimate], truth: Sequence, origin=(0.0, 0.0)) -> ErrorReport:
    """Error metrics of ``est`` against ``truth``.

    ``truth`` may hold trajectory samples (their truth fields are used) or
    position estimates.  Path length is measured along the truth, starting
    from ``origin``.
    """
    e = np.array([(p.t, p.x, p.y) for p in est], dtype=float).reshape(-1, 3)
    g = _truth_xy(truth)
    if len(e) != len(g):
        raise ConfigurationError(f"length mismatch: {len(e)} estimates vs {len(g)} truth samples")
    if len(e) == 0:
        raise ConfigurationError("cannot compare empty sequences")
    if not np.allclose(e[:, 0], g[:, 0], rtol=0.0, atol=1e-9):
        k = int(np.argmax(np.abs(e[:, 0] - g[:, 0]) > 1e-9))
        raise ConfigurationError(f"timestamp mismatch at index {k}: {e[k, 0]:g} vs {g[k, 0]:g}")
    err = np.hypot(e[:, 1] - g[:, 1], e[:, 2] - g[:, 2])
    path = np.vstack([np.asarray(origin, dtype=float), g[:, 1:]])
    length = float(np.sum(np.hypot(*np.diff(path, axis=0).T)))
    final = float(err[-1])
    return ErrorReport(
        rmse=float(np.sqrt(np.mean(err**2))),
        final_error=final,
        path_length=length,
        drift_per_meter=final / length if length > 0 else 0.0,
        max_error=float(err.max()),
    )
