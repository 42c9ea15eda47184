"""
Watching a bump form on the twisted torus
=========================================

Start 900 cells from uniform noise, run the network with no velocity input
and watch a single activity bump condense and then stop moving.
"""

import numpy as np

from gridnav import GridConfig, build_topology, bump_phase, init_state, step
from gridnav.gridcore import count_bumps
from gridnav.kernel import build_relative_kernel

cfg = GridConfig(seed=3)
grid = build_topology(cfg.n_x, cfg.n_y)
kernel = build_relative_kernel(grid, cfg)
state = init_state(cfg)

# sup-norm change per step, and the number of separate blobs above half peak
for k in range(1, 2001):
    new = step(state, kernel, cfg)
    change = np.max(np.abs(new.activity - state.activity))
    state = new
    if k in (1, 10, 50, 100, 200, 500, 1000, 2000):
        print(f"step {k:5d}  change {change:.2e}  bumps {count_bumps(state, grid)}")

# where the bump ended up, in torus coordinates
phase = bump_phase(state, grid)
print(f"bump at ({phase.phase_x:.4f}, {phase.phase_y:.4f}), resultant {phase.resultant[0]:.3f}")

# a coarse text rendering of the sheet, brightest cells as '#'
sheet = state.activity.reshape(grid.n_y, grid.n_x)
levels = " .:-=+*#"
for row in sheet[::-2]:
    print("".join(levels[min(int(v / sheet.max() * len(levels)), len(levels) - 1)] for v in row))
