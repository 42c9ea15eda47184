"""Twisted-torus grid-cell attractor network.

Cells sit on an ``n_x`` by ``n_y`` rectangular sheet of size ``1 x sqrt(3)/2``.
The sheet is glued into a torus whose period lattice is generated by
``(1, 0)`` and ``(1/2, sqrt(3)/2)``; the half-period twist on the vertical
wrap is what turns the rectangular sheet into a hexagonal tessellation.

Flat cell indexing is row-major and 0-based everywhere in the package::

    index = (row - 1) * n_x + (col - 1)      # row, col are 1-based

so ``activity.reshape(n_y, n_x)[row - 1, col - 1]`` is the cell in that row
and column.  Snapshot files use the same layout.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from gridnav.errors import ConfigurationError, DegenerateActivityError, InputSaturationError

SQRT3_2 = float(np.sqrt(3.0) / 2.0)

#: Periodic images searched by the tri-norm.  For two points inside the
#: fundamental domain the minimum over these seven shifts equals the minimum
#: over the full twisted-torus lattice.
TORUS_IMAGES = np.array(
    [
        (0.0, 0.0),
        (-0.5, SQRT3_2),
        (-0.5, -SQRT3_2),
        (0.5, SQRT3_2),
        (0.5, -SQRT3_2),
        (-1.0, 0.0),
        (1.0, 0.0),
    ]
)

#: Largest per-step cell-space displacement the network accepts.
MAX_SHIFT = 0.25

#: Total activity below which the network is considered dead.
MIN_TOTAL_ACTIVITY = 1e-12


@dataclass(frozen=True)
class GridConfig:
    """Hyperparameters of the grid-cell network.

    ``intensity`` (I), ``shift_t`` (T) and ``sigma`` shape the recurrent
    weights ``I * exp(-d**2 / sigma**2) - T``.  ``gamma`` is the gain from
    decoded torus displacement to metres; ``None`` means ``1 / alpha``.
    """

    n_x: int = 30
    n_y: int = 30
    tau: float = 0.95
    alpha: float = 1.0
    beta: float = 0.0
    intensity: float = 0.03
    shift_t: float = 0.005
    sigma: float = 0.24
    gamma: Optional[float] = None
    dt: float = 0.1
    seed: int = 0

    def __post_init__(self):
        for name in ("n_x", "n_y"):
            value = getattr(self, name)
            if int(value) != value or value < 2:
                raise ConfigurationError(f"{name} must be an integer >= 2, got {value!r}")
        checks = [
            ("tau", 0.0 <= self.tau < 1.0, "0 <= tau < 1"),
            ("alpha", self.alpha > 0.0, "alpha > 0"),
            ("intensity", self.intensity > 0.0, "intensity > 0"),
            ("shift_t", self.shift_t >= 0.0, "shift_t >= 0"),
            ("sigma", self.sigma > 0.0, "sigma > 0"),
            ("gamma", self.gamma is None or self.gamma > 0.0, "gamma > 0"),
            ("dt", self.dt > 0.0, "dt > 0"),
            ("seed", int(self.seed) == self.seed and 0 <= self.seed < 2**64, "0 <= seed < 2**64"),
        ]
        for name, ok, rule in checks:
            value = getattr(self, name)
            if not ok or (isinstance(value, float) and not np.isfinite(value)):
                raise ConfigurationError(f"{name} = {value!r} violates {rule}")

    @property
    def n(self) -> int:
        return self.n_x * self.n_y

    @property
    def spacing_gain(self) -> float:
        """Effective gamma: the configured value or ``1 / alpha``."""
        return 1.0 / self.alpha if self.gamma is None else self.gamma

    def replace(self, **changes) -> "GridConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class CellGrid:
    n_x: int
    n_y: int
    positions: np.ndarray  # (N, 2), row-major flat order
    period_x: float = 1.0
    period_y: float = SQRT3_2

    @property
    def n(self) -> int:
        return self.n_x * self.n_y

    def index(self, col: int, row: int) -> int:
        """Flat index of the cell in 1-based ``col`` (l_x) and ``row`` (l_y)."""
        if not (1 <= col <= self.n_x and 1 <= row <= self.n_y):
            raise IndexError(f"cell ({col}, {row}) outside {self.n_x}x{self.n_y} grid")
        return (row - 1) * self.n_x + (col - 1)


@dataclass(frozen=True)
class GridState:
    activity: np.ndarray
    step: int = 0


@dataclass(frozen=True)
class WeightKernel:
    """Dense weights; ``values[i, j]`` is the synapse from cell i to cell j."""

    values: np.ndarray
    nu: tuple = (0.0, 0.0)

    def transfer(self, activity: np.ndarray) -> np.ndarray:
        return activity @ self.values


class EvaluationCounter:
    """Counts Gaussian weight evaluations so kernel cost can be asserted."""

    def __init__(self):
        self.count = 0

    def reset(self):
        self.count = 0


gaussian_counter = EvaluationCounter()


def build_topology(n_x: int, n_y: int) -> CellGrid:
    if int(n_x) != n_x or int(n_y) != n_y or n_x < 2 or n_y < 2:
        raise ConfigurationError(f"grid dimensions must be integers >= 2, got ({n_x}, {n_y})")
    n_x, n_y = int(n_x), int(n_y)
    cols, rows = np.meshgrid(np.arange(1, n_x + 1), np.arange(1, n_y + 1))
    positions = np.column_stack(
        [((cols - 0.5) / n_x).ravel(), (SQRT3_2 * (rows - 0.5) / n_y).ravel()]
    )
    positions.setflags(write=False)
    return CellGrid(n_x, n_y, positions)


def wrap_to_domain(points) -> np.ndarray:
    """Map points onto the fundamental domain ``[0, 1) x [0, sqrt(3)/2)``.

    Each vertical wrap also shifts x by half a period, following the twist.
    """
    pts = np.asarray(points, dtype=float)
    x, y = pts[..., 0], pts[..., 1]
    turns = np.floor(y / SQRT3_2)
    y = y - turns * SQRT3_2
    # rounding can leave y == period for inputs a hair below a multiple
    over = y >= SQRT3_2
    y = np.where(over, 0.0, y)
    x = x - 0.5 * (turns + over)
    x = x - np.floor(x)
    x = np.where(x >= 1.0, 0.0, x)
    return np.stack([x, y], axis=-1)


def _min_image_sq(dx, dy):
    best = dx * dx + dy * dy
    for sx, sy in TORUS_IMAGES[1:]:
        ex, ey = dx + sx, dy + sy
        np.minimum(best, ex * ex + ey * ey, out=best)
    return best


def tri_displacement(p, q, grid: Optional[CellGrid] = None):
    """Nearest-image displacement ``p - q`` on the twisted torus and its length.

    Accepts single points or broadcastable ``(..., 2)`` arrays.  ``grid`` is
    accepted for interface symmetry; the periods are fixed by the topology.
    """
    d = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    candidates = d[..., None, :] + TORUS_IMAGES
    sq = np.einsum("...k,...k->...", candidates, candidates)
    best = np.argmin(sq, axis=-1)
    disp = np.take_along_axis(candidates, best[..., None, None], axis=-2)[..., 0, :]
    dist = np.sqrt(np.take_along_axis(sq, best[..., None], axis=-1)[..., 0])
    if disp.ndim == 1:
        return disp, float(dist)
    return disp, dist


def check_shift(nu) -> np.ndarray:
    nu = np.asarray(nu, dtype=float).reshape(2)
    if not np.all(np.isfinite(nu)):
        raise InputSaturationError(f"network displacement {tuple(nu)} is not finite")
    if np.hypot(nu[0], nu[1]) >= MAX_SHIFT:
        raise InputSaturationError(
            f"network displacement {tuple(nu)} has norm >= {MAX_SHIFT}; bump motion would alias"
        )
    return nu


def gaussian_weight(sq_dist, cfg: GridConfig) -> np.ndarray:
    """``I * exp(-d**2 / sigma**2) - T`` evaluated on squared tri-distances."""
    sq_dist = np.asarray(sq_dist, dtype=float)
    gaussian_counter.count += sq_dist.size
    return cfg.intensity * np.exp(-sq_dist / cfg.sigma**2) - cfg.shift_t


def build_weights(grid: CellGrid, cfg: GridConfig, shift=(0.0, 0.0)) -> WeightKernel:
    """Dense N x N weight matrix with the velocity shift folded in.

    This is the direct O(N^2)-Gaussian construction kept as the reference
    for :mod:`gridnav.kernel`.
    """
    nu = check_shift(shift)
    src = wrap_to_domain(grid.positions + nu)
    dx = src[:, 0, None] - grid.positions[None, :, 0]
    dy = src[:, 1, None] - grid.positions[None, :, 1]
    values = gaussian_weight(_min_image_sq(dx, dy), cfg)
    return WeightKernel(values, (float(nu[0]), float(nu[1])))


def init_state(cfg: GridConfig) -> GridState:
    rng = np.random.default_rng(cfg.seed)
    activity = rng.uniform(0.0, 1.0 / np.sqrt(cfg.n), cfg.n)
    return GridState(activity, 0)


def total_activity(state: GridState) -> float:
    """Summed activity; this is the value carried by the external neuron."""
    return float(np.sum(state.activity))


def step(state: GridState, kernel, cfg: GridConfig) -> GridState:
    """Advance the network one tick.

    ``kernel`` is anything with a ``transfer(activity)`` method returning the
    summed synaptic input to every cell (:class:`WeightKernel` or
    :class:`gridnav.kernel.RelativeKernel`).
    """
    activity = state.activity
    total = float(np.sum(activity))
    if not total >= MIN_TOTAL_ACTIVITY:
        raise DegenerateActivityError(
            f"total activity {total:.3e} at step {state.step} is below {MIN_TOTAL_ACTIVITY}"
        )
    try:
        transfer = kernel.transfer(activity)
    except ValueError as exc:
        raise ConfigurationError(f"kernel does not fit {activity.shape[0]} cells: {exc}") from exc
    if transfer.shape != activity.shape:
        raise ConfigurationError(
            f"kernel produced {transfer.shape[0]} inputs for {activity.shape[0]} cells"
        )
    new = (1.0 - cfg.tau) * transfer + cfg.tau * (transfer / total)
    np.maximum(new, 0.0, out=new)
    if not np.all(np.isfinite(new)):
        raise DegenerateActivityError(f"non-finite activity after step {state.step + 1}")
    return GridState(new, state.step + 1)


def count_bumps(state: GridState, grid: CellGrid, level: float = 0.5) -> int:
    """Number of connected groups of cells above ``level * max(activity)``.

    Connectivity is 8-neighbour on the index sheet with the twisted wrap.
    """
    a = state.activity.reshape(grid.n_y, grid.n_x)
    peak = a.max()
    if peak <= 0.0:
        return 0
    active = a > level * peak
    seen = np.zeros_like(active)
    bumps = 0
    for r0, c0 in zip(*np.nonzero(active)):
        if seen[r0, c0]:
            continue
        bumps += 1
        stack = [(r0, c0)]
        seen[r0, c0] = True
        while stack:
            r, c = stack.pop()
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    rr, cc = r + dr, c + dc
                    if rr < 0:
                        rr, cc = rr + grid.n_y, cc + grid.n_x // 2
                    elif rr >= grid.n_y:
                        rr, cc = rr - grid.n_y, cc - grid.n_x // 2
                    cc %= grid.n_x
                    if active[rr, cc] and not seen[rr, cc]:
                        seen[rr, cc] = True
                        stack.append((rr, cc))
    return bumps
