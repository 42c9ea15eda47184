"""Velocity input, bump decoding and position integration.

Sample convention used throughout the package: a :class:`TrajectorySample`
stamped ``t`` describes the interval ``(t - dt, t]``.  Its velocity and
heading are held over that interval and its ground truth is the position
reached at ``t``.  The vehicle starts at the origin at ``t = 0`` and every
estimator emits one estimate per sample, stamped with the sample time.

Headings are planar and counter-clockwise positive (x east, y north).
"""

from __future__ import annotations

import logging
from typing import NamedTuple, Optional, Sequence

import numpy as np

from gridnav.errors import (
    CalibrationError,
    ConfigurationError,
    GridNavError,
    InputSaturationError,
    NoBumpError,
)
from gridnav.gridcore import (
    MAX_SHIFT,
    MIN_TOTAL_ACTIVITY,
    SQRT3_2,
    CellGrid,
    GridConfig,
    GridState,
    build_topology,
    init_state,
    step,
    tri_displacement,
    wrap_to_domain,
)
from gridnav.kernel import build_relative_kernel

log = logging.getLogger(__name__)

#: Minimum resultant length on each decoding axis for a bump to count.
MIN_RESULTANT = 0.05

# Reciprocal lattice of the twisted torus: exp(i k.c) is single valued on it.
_K1 = 2.0 * np.pi * np.array([1.0, -1.0 / np.sqrt(3.0)])
_K2 = 2.0 * np.pi * np.array([0.0, 2.0 / np.sqrt(3.0)])
_LATTICE = np.array([[1.0, 0.0], [0.5, SQRT3_2]])


class VelocityInput(NamedTuple):
    """Per-step displacement of the activity bump, in torus units."""

    nu_x: float
    nu_y: float


class BumpPhase(NamedTuple):
    phase_x: float
    phase_y: float
    resultant: tuple


class PositionEstimate(NamedTuple):
    t: float
    x: float
    y: float


class TrajectorySample(NamedTuple):
    t: float
    vx_body: float
    vy_body: float
    psi: float
    truth_x: Optional[float] = None
    truth_y: Optional[float] = None


def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def body_to_world(v_body, psi: float) -> np.ndarray:
    return rotation(psi) @ np.asarray(v_body, dtype=float)


def modulate(v_world, cfg: GridConfig, t: Optional[float] = None) -> VelocityInput:
    """Scale, bias-rotate and integrate one sample period of world velocity."""
    nu = cfg.alpha * (rotation(cfg.beta) @ np.asarray(v_world, dtype=float)) * cfg.dt
    if not np.all(np.isfinite(nu)) or np.hypot(nu[0], nu[1]) >= MAX_SHIFT:
        where = "" if t is None else f" at t = {t:g} s"
        raise InputSaturationError(
            f"velocity {tuple(np.round(v_world, 6))} m/s{where} gives network step "
            f"{np.hypot(nu[0], nu[1]):.4g} >= {MAX_SHIFT} (alpha * |v| * dt too large)",
            t=t,
        )
    return VelocityInput(float(nu[0]), float(nu[1]))


def bump_phase(state: GridState, grid: CellGrid) -> BumpPhase:
    """Activity-weighted circular mean of the bump position.

    The mean is taken along the two reciprocal-lattice directions of the
    torus, which are the only plane waves consistent with the twisted wrap,
    and mapped back onto the fundamental domain.
    """
    a = state.activity
    total = float(np.sum(a))
    if not total >= MIN_TOTAL_ACTIVITY:
        raise NoBumpError(f"total activity {total:.3e} is too small to decode")
    phases = grid.positions @ np.column_stack([_K1, _K2])
    z = a @ np.exp(1j * phases)
    resultant = np.abs(z) / total
    if np.any(resultant < MIN_RESULTANT):
        raise NoBumpError(
            f"activity too diffuse to decode: resultant {np.round(resultant, 4).tolist()} "
            f"< {MIN_RESULTANT}"
        )
    turns = np.angle(z) / (2.0 * np.pi)
    pos = wrap_to_domain(turns @ _LATTICE)
    return BumpPhase(float(pos[0]), float(pos[1]), (float(resultant[0]), float(resultant[1])))


def phase_delta(prev: BumpPhase, curr: BumpPhase, grid: Optional[CellGrid] = None) -> np.ndarray:
    """Nearest-image displacement from ``prev`` to ``curr`` on the torus."""
    disp, _ = tri_displacement(curr[:2], prev[:2], grid)
    return disp


def update_position(pos: PositionEstimate, delta, cfg: GridConfig, t: Optional[float] = None) -> PositionEstimate:
    g = cfg.spacing_gain
    return PositionEstimate(
        pos.t + cfg.dt if t is None else t,
        pos.x + g * float(delta[0]),
        pos.y + g * float(delta[1]),
    )


def settle(state: GridState, grid: CellGrid, cfg: GridConfig, min_steps: int = 100, tol: float = 1e-10,
           max_steps: int = 5000, method: str = "fft") -> GridState:
    """Run zero-velocity steps until the bump has formed and stopped moving.

    At least ``min_steps`` are taken; after that the loop stops once the
    largest per-cell change drops below ``tol`` (``tol=0`` disables the early
    exit) or ``max_steps`` is reached.
    """
    kernel = build_relative_kernel(grid, cfg, (0.0, 0.0), method)
    for k in range(max_steps):
        new = step(state, kernel, cfg)
        change = np.max(np.abs(new.activity - state.activity))
        state = new
        if k + 1 >= min_steps and change < tol:
            break
    else:
        log.debug("settle stopped at max_steps=%d with change %.3e", max_steps, change)
    return state


class PathIntegrator:
    """Stateful estimator: feeds samples to the network and integrates the bump."""

    def __init__(self, cfg: GridConfig, settle_steps: int = 100, settle_tol: float = 1e-10,
                 settle_max: int = 5000, method: str = "fft"):
        if settle_steps < 0 or settle_max < settle_steps:
            raise ConfigurationError("need 0 <= settle_steps <= settle_max")
        self.cfg = cfg
        self.method = method
        self.grid = build_topology(cfg.n_x, cfg.n_y)
        state = init_state(cfg)
        self.state = settle(state, self.grid, cfg, settle_steps, settle_tol, settle_max, method)
        self.phase = bump_phase(self.state, self.grid)
        self.position = PositionEstimate(0.0, 0.0, 0.0)
        self.history = []

    def advance(self, sample: TrajectorySample) -> PositionEstimate:
        v_world = body_to_world((sample.vx_body, sample.vy_body), sample.psi)
        nu = modulate(v_world, self.cfg, sample.t)
        kernel = build_relative_kernel(self.grid, self.cfg, nu, self.method)
        self.state = step(self.state, kernel, self.cfg)
        phase = bump_phase(self.state, self.grid)
        delta = phase_delta(self.phase, phase, self.grid)
        self.phase = phase
        self.position = update_position(self.position, delta, self.cfg, t=sample.t)
        return self.position

    def run(self, samples: Sequence[TrajectorySample], on_step=None):
        out = []
        for k, sample in enumerate(samples):
            try:
                out.append(self.advance(sample))
            except GridNavError as exc:
                err = type(exc)(f"sample {k} (t = {sample.t:g} s): {exc}")
                err.index = k
                raise err from exc
            if on_step is not None:
                on_step(k, self)
        return out


def integrate_trajectory(samples: Sequence[TrajectorySample], cfg: GridConfig, settle_steps: int = 100,
                         method: str = "fft", **kwargs):
    """Grid-cell position estimate for every sample, starting from the origin."""
    samples = list(samples)
    check_time_order(samples)
    return PathIntegrator(cfg, settle_steps=settle_steps, method=method, **kwargs).run(samples)


def check_time_order(samples: Sequence[TrajectorySample]):
    times = np.array([s.t for s in samples], dtype=float)
    if times.size and not np.all(np.isfinite(times)):
        raise ConfigurationError("sample times must be finite")
    bad = np.nonzero(np.diff(times) <= 0)[0]
    if bad.size:
        k = int(bad[0]) + 1
        raise ConfigurationError(f"sample {k}: time {times[k]:g} does not increase")


def calibrate_gamma(cfg: GridConfig, speed: float = 0.1, n_samples: int = 200, method: str = "fft") -> float:
    """Fit the grid-spacing gain from a straight run of known length.

    Integrates ``n_samples`` steps of due-east surge at ``speed`` with unit
    gain and returns the ratio of true distance to decoded bump travel.
    """
    unit = cfg.replace(gamma=1.0)
    samples = [TrajectorySample((k + 1) * cfg.dt, speed, 0.0, 0.0) for k in range(n_samples)]
    try:
        est = integrate_trajectory(samples, unit, method=method)
    except GridNavError as exc:
        raise CalibrationError(f"calibration run failed: {exc}") from exc
    length = speed * cfg.dt * n_samples
    travelled = np.hypot(est[-1].x, est[-1].y)
    if not np.isfinite(travelled) or travelled <= 1e-9 * max(length, 1e-300):
        raise CalibrationError(f"decoded bump travel {travelled:.3e} is unusable")
    return float(length / travelled)
