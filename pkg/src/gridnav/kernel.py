"""Relative (translation-invariant) weight kernel and fast transfer.

The recurrent weight between two cells depends only on their index offset
taken on the twisted torus, so one ``n_y x n_x`` table of Gaussians replaces
the dense ``N x N`` matrix.  Offsets are ``i - j`` with the row difference
reduced into ``[0, n_y)``; whenever that reduction wraps, the column offset
picks up the half-period twist of ``n_x / 2`` cells.  That requires an even
``n_x``; with odd ``n_x`` the twist does not land on a cell and the network is
not translation invariant, so only the dense path applies.

Two exact transfer evaluations are offered:

``"fft"`` (default)
    wrapped cross-correlation through a real 2-D FFT.
``"direct"``
    the same sum evaluated term by term with a sliding window.

Both agree with ``activity @ build_weights(...).values`` to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from gridnav.errors import ConfigurationError
from gridnav.gridcore import (
    SQRT3_2,
    CellGrid,
    GridConfig,
    GridState,
    _min_image_sq,
    check_shift,
    gaussian_weight,
    wrap_to_domain,
)

METHODS = ("fft", "direct")


@dataclass(frozen=True)
class RelativeKernel:
    """``values[dy, dx]`` is the weight from a cell to the cell ``(dx, dy)`` behind it."""

    values: np.ndarray  # (n_y, n_x)
    nu: tuple = (0.0, 0.0)
    method: str = "fft"

    def transfer(self, activity: np.ndarray) -> np.ndarray:
        return _transfer(activity, self.values, self.method)


def _require_even(n_x: int):
    if n_x % 2:
        raise ConfigurationError(
            f"relative kernel needs an even n_x for the twisted wrap, got n_x = {n_x}"
        )


def build_relative_kernel(grid: CellGrid, cfg: GridConfig, shift=(0.0, 0.0), method: str = "fft") -> RelativeKernel:
    if method not in METHODS:
        raise ConfigurationError(f"unknown transfer method {method!r}; expected one of {METHODS}")
    _require_even(grid.n_x)
    nu = check_shift(shift)
    dx, dy = np.meshgrid(np.arange(grid.n_x) / grid.n_x, SQRT3_2 * np.arange(grid.n_y) / grid.n_y)
    pts = wrap_to_domain(np.stack([dx + nu[0], dy + nu[1]], axis=-1))
    values = gaussian_weight(_min_image_sq(pts[..., 0], pts[..., 1]), cfg)
    return RelativeKernel(values, (float(nu[0]), float(nu[1])), method)


def offset_index(grid: CellGrid) -> np.ndarray:
    """``(N, N)`` table mapping a cell pair ``(i, j)`` to the flat kernel entry."""
    _require_even(grid.n_x)
    row, col = np.divmod(np.arange(grid.n), grid.n_x)
    d_row = row[:, None] - row[None, :]
    d_col = col[:, None] - col[None, :]
    wrapped = d_row < 0
    d_row = np.where(wrapped, d_row + grid.n_y, d_row)
    d_col = np.where(wrapped, d_col + grid.n_x // 2, d_col) % grid.n_x
    return d_row * grid.n_x + d_col


def expand_kernel(kernel: RelativeKernel, grid: CellGrid) -> np.ndarray:
    """Dense ``N x N`` matrix equivalent to ``kernel`` (for inspection and tests)."""
    return kernel.values.ravel()[offset_index(grid)]


def _extended(a: np.ndarray) -> np.ndarray:
    # rows past the top re-enter at the bottom shifted by half a period
    n_x = a.shape[1]
    return np.vstack([a, np.roll(a, n_x // 2, axis=1)])


def _transfer(activity: np.ndarray, values: np.ndarray, method: str) -> np.ndarray:
    n_y, n_x = values.shape
    if activity.shape != (n_y * n_x,):
        raise ConfigurationError(
            f"activity has shape {activity.shape}, kernel expects ({n_y * n_x},)"
        )
    ext = _extended(activity.reshape(n_y, n_x))
    if method == "fft":
        padded = np.zeros((2 * n_y, n_x))
        padded[:n_y] = values
        spec = np.conj(np.fft.rfft2(padded)) * np.fft.rfft2(ext)
        out = np.fft.irfft2(spec, s=(2 * n_y, n_x))[:n_y]
    else:
        ext = np.hstack([ext, ext[:, : n_x - 1]])
        windows = sliding_window_view(ext, (n_y, n_x))[:n_y]
        out = np.einsum("abij,ij->ab", windows, values)
    return out.ravel()


def apply_kernel(state: GridState, kernel: RelativeKernel, grid: CellGrid) -> np.ndarray:
    """Summed synaptic input ``B_j = sum_i A_i k(offset(i, j))`` for every cell."""
    if kernel.values.shape != (grid.n_y, grid.n_x):
        raise ConfigurationError(
            f"kernel shape {kernel.values.shape} does not match grid {grid.n_y}x{grid.n_x}"
        )
    return _transfer(state.activity, kernel.values, kernel.method)
