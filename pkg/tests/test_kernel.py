import numpy as np
import pytest

from gridnav import GridConfig, GridState, build_topology, build_weights, init_state, step
from gridnav.errors import ConfigurationError
from gridnav.gridcore import gaussian_counter
from gridnav.kernel import METHODS, apply_kernel, build_relative_kernel, expand_kernel
from oracles import dense_weights, loop_transfer


@pytest.mark.parametrize("method", METHODS)
def test_transfer_matches_loop_oracle_on_small_grid(method):
    cfg = GridConfig(n_x=6, n_y=4, sigma=0.3)
    g = build_topology(6, 4)
    rng = np.random.default_rng(3)
    for _ in range(5):
        nu = tuple(rng.uniform(-0.15, 0.15, 2))
        a = rng.uniform(0, 1, 24)
        ref = loop_transfer(a, dense_weights(6, 4, cfg.intensity, cfg.shift_t, cfg.sigma, nu))
        k = build_relative_kernel(g, cfg, nu, method)
        assert np.allclose(k.transfer(a), ref, rtol=0, atol=1e-13)


@pytest.mark.parametrize("method", METHODS)
def test_fast_transfer_matches_dense(grid, cfg, method):
    rng = np.random.default_rng(11)
    for _ in range(10):
        nu = tuple(rng.uniform(-0.17, 0.17, 2))
        a = rng.uniform(0, 1 / 30, grid.n)
        dense = build_weights(grid, cfg, nu).transfer(a)
        fast = build_relative_kernel(grid, cfg, nu, method).transfer(a)
        assert np.max(np.abs(fast - dense)) <= 1e-12 * np.max(np.abs(dense))


def test_expanded_kernel_equals_dense_matrix(grid, cfg):
    nu = (0.031, -0.012)
    dense = build_weights(grid, cfg, nu).values
    assert np.allclose(expand_kernel(build_relative_kernel(grid, cfg, nu), grid), dense, atol=1e-15)


def test_translation_invariance_needs_the_twist(grid, cfg):
    """Shifting every cell one row up is a symmetry only with the half-period twist."""
    w = build_weights(grid, cfg).values
    n_x, n_y = grid.n_x, grid.n_y
    row, col = np.divmod(np.arange(grid.n), n_x)

    def up_one(twist):
        r = row + 1
        c = np.where(r >= n_y, (col + twist) % n_x, col)
        return (r % n_y) * n_x + c

    twisted = up_one(n_x // 2)
    assert np.allclose(w[np.ix_(twisted, twisted)], w, atol=1e-15)
    plain = up_one(0)
    assert not np.allclose(w[np.ix_(plain, plain)], w, atol=1e-6)


def test_gaussian_count_is_n_not_n_squared(grid, cfg):
    gaussian_counter.reset()
    build_relative_kernel(grid, cfg, (0.01, 0.0))
    assert gaussian_counter.count == grid.n
    gaussian_counter.reset()
    build_weights(grid, cfg, (0.01, 0.0))
    assert gaussian_counter.count == grid.n**2


def test_long_run_agreement(grid, cfg):
    nus = [(0.01 * np.cos(k / 7), 0.01 * np.sin(k / 11)) for k in range(10)]
    dense = [build_weights(grid, cfg, nu) for nu in nus]
    fast = [build_relative_kernel(grid, cfg, nu) for nu in nus]
    a = b = init_state(cfg)
    for k in range(300):
        a = step(a, dense[k % 10], cfg)
        b = step(b, fast[k % 10], cfg)
    assert np.max(np.abs(a.activity - b.activity)) < 1e-9


def test_odd_nx_rejected(cfg):
    with pytest.raises(ConfigurationError, match="even n_x"):
        build_relative_kernel(build_topology(5, 4), cfg.replace(n_x=5, n_y=4))


def test_unknown_method(grid, cfg):
    with pytest.raises(ConfigurationError, match="method"):
        build_relative_kernel(grid, cfg, method="gpu")


def test_apply_kernel_shape_check(grid, cfg):
    k = build_relative_kernel(build_topology(6, 4), cfg.replace(n_x=6, n_y=4))
    with pytest.raises(ConfigurationError):
        apply_kernel(GridState(np.ones(grid.n)), k, grid)


def test_zero_offset_entry_and_naive_column(grid):
    cfg = GridConfig(intensity=0.3, shift_t=0.05)
    k = build_relative_kernel(grid, cfg)
    assert k.values[0, 0] == pytest.approx(0.25, abs=1e-15)
    # values[dy, dx] is the weight from the cell at that offset into cell 0
    dense = build_weights(grid, cfg).values
    assert np.max(np.abs(k.values.ravel() - dense[:, 0])) < 1e-15


def test_shift_changes_kernel(grid, cfg):
    a = build_relative_kernel(grid, cfg, (0.0, 0.0)).values
    b = build_relative_kernel(grid, cfg, (0.01, 0.0)).values
    assert np.max(np.abs(a - b)) > 0


def test_apply_kernel_examples(grid, cfg):
    k = build_relative_kernel(grid, cfg, (0.02, 0.01))
    assert np.all(apply_kernel(GridState(np.zeros(grid.n)), k, grid) == 0)
    a = np.zeros(grid.n)
    a[grid.index(7, 29)] = 1.0
    row = build_weights(grid, cfg, (0.02, 0.01)).values[grid.index(7, 29)]
    assert np.allclose(apply_kernel(GridState(a), k, grid), row, atol=1e-15)
