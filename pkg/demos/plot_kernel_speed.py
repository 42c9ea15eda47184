"""
Dense weights versus the relative kernel
========================================

The recurrent weights only depend on the offset between two cells, so one
30 x 30 table replaces the 900 x 900 matrix.  Check that both give the same
synaptic input, then time them.
"""

import numpy as np

from gridnav import GridConfig, build_topology, build_weights, init_state
from gridnav.cli import bench
from gridnav.kernel import build_relative_kernel

cfg = GridConfig()
grid = build_topology(cfg.n_x, cfg.n_y)
a = init_state(cfg).activity
nu = (0.013, -0.004)

dense = build_weights(grid, cfg, nu).transfer(a)
for method in ("fft", "direct"):
    fast = build_relative_kernel(grid, cfg, nu, method).transfer(a)
    print(f"{method:6s} max |diff| = {np.max(np.abs(fast - dense)):.1e}")

rates = bench(cfg, steps=300)
for name, rate in rates.items():
    print(f"{name:6s} {rate:8.1f} steps/s")
print(f"speedup {rates['fft'] / rates['naive']:.0f}x")
