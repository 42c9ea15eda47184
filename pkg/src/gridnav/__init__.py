"""Grid-cell continuous-attractor path integration on a twisted torus."""

from gridnav.errors import (
    CalibrationError,
    ConfigurationError,
    DegenerateActivityError,
    GridNavError,
    InputSaturationError,
    NoBumpError,
    TrajectoryFormatError,
)
from gridnav.gridcore import (
    CellGrid,
    GridConfig,
    GridState,
    WeightKernel,
    build_topology,
    build_weights,
    init_state,
    step,
    total_activity,
    tri_displacement,
)
from gridnav.harness import (
    DisturbanceSpec,
    ErrorReport,
    add_disturbance,
    compare,
    dead_reckon,
    gen_circle,
    gen_waypoint_rect,
    kf_velocity_baseline,
)
from gridnav.integrator import (
    BumpPhase,
    PathIntegrator,
    PositionEstimate,
    TrajectorySample,
    VelocityInput,
    body_to_world,
    bump_phase,
    calibrate_gamma,
    integrate_trajectory,
    modulate,
    phase_delta,
    update_position,
)
from gridnav.kernel import RelativeKernel, apply_kernel, build_relative_kernel

__version__ = "0.1.0"
