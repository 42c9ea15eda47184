"""Command-line front end and plain-text file formats.

Config files are ``key = value`` lines with ``#`` comments.  Trajectory CSVs
use the header ``t,vx_body,vy_body,psi[,truth_x,truth_y]``; estimate CSVs use
``t,x_est,y_est[,x_dr,y_dr,x_kf,y_kf,truth_x,truth_y]``.  Activity snapshots
are ``n_y`` lines of ``n_x`` space-separated values in flat-index order.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import shutil
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from gridnav import harness
from gridnav.errors import ConfigurationError, GridNavError, TrajectoryFormatError
from gridnav.gridcore import GridConfig, GridState, build_topology, build_weights, init_state, step
from gridnav.integrator import PathIntegrator, PositionEstimate, TrajectorySample, calibrate_gamma
from gridnav.kernel import build_relative_kernel

TRAJECTORY_HEADER = ["t", "vx_body", "vy_body", "psi"]
TRUTH_HEADER = ["truth_x", "truth_y"]
ESTIMATE_HEADER = ["t", "x_est", "y_est"]
BASELINE_HEADER = ["x_dr", "y_dr", "x_kf", "y_kf", "truth_x", "truth_y"]


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    disturbance: harness.DisturbanceSpec = field(default_factory=harness.DisturbanceSpec)
    disturbance_on: bool = False
    trajectory: str = "circle"
    radius: float = 1.5
    speed: float = 0.1
    laps: int = 1
    width: float = 4.0
    height: float = 2.0
    out_dir: Optional[str] = None
    snapshot_every: int = 100
    settle_steps: int = 100
    calibrate: bool = False
    meas_noise: float = 1e-4
    process_noise: float = 1e-3
    kernel: str = "fft"

    def __post_init__(self):
        if self.snapshot_every < 0:
            raise ConfigurationError(f"snapshot_every = {self.snapshot_every} must be >= 0")
        if self.settle_steps < 0:
            raise ConfigurationError(f"settle_steps = {self.settle_steps} must be >= 0")
        if self.kernel not in ("fft", "direct"):
            raise ConfigurationError(f"kernel = {self.kernel!r} must be fft or direct")
        if not (self.trajectory in ("circle", "rect") or self.trajectory.startswith("csv:")):
            raise ConfigurationError(f"trajectory = {self.trajectory!r} must be circle, rect or csv:<path>")
        for name in ("meas_noise", "process_noise", "radius", "speed", "width", "height"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} = {getattr(self, name)!r} must be > 0")
        if self.laps < 1:
            raise ConfigurationError(f"laps = {self.laps} must be >= 1")


def _bool(text):
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


_GRID_KEYS = {
    "n_x": int, "n_y": int, "tau": float, "alpha": float, "beta": float, "intensity": float,
    "shift_t": float, "sigma": float, "gamma": str, "dt": float, "seed": int,
}
_DIST_KEYS = {"wave_freq": float, "wave_amp": float, "wave_dir": float, "noise_std": float}
_RUN_KEYS = {
    "disturbance": _bool, "trajectory": str, "radius": float, "speed": float, "laps": int,
    "width": float, "height": float, "out": str, "snapshot_every": int, "settle_steps": int,
    "meas_noise": float, "process_noise": float, "kernel": str,
}
CONFIG_KEYS = {**_GRID_KEYS, **_DIST_KEYS, **_RUN_KEYS}


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise ConfigurationError(
                f"{source}:{lineno}: invalid value {value!r} for {key}"
            ) from None
    return build_run_config(values)


def build_run_config(values: dict) -> RunConfig:
    grid_args = {k: v for k, v in values.items() if k in _GRID_KEYS}
    calibrate = False
    if "gamma" in grid_args:
        if grid_args["gamma"].lower() == "auto":
            calibrate = True
            del grid_args["gamma"]
        else:
            try:
                grid_args["gamma"] = float(grid_args["gamma"])
            except ValueError:
                raise ConfigurationError(f"gamma = {grid_args['gamma']!r} must be a number or 'auto'") from None
    grid = GridConfig(**grid_args)
    dist = harness.DisturbanceSpec(seed=grid.seed, **{k: v for k, v in values.items() if k in _DIST_KEYS})
    run = {k: v for k, v in values.items() if k in _RUN_KEYS}
    if "out" in run:
        run["out_dir"] = run.pop("out")
    if "disturbance" in run:
        run["disturbance_on"] = run.pop("disturbance")
    return RunConfig(grid=grid, disturbance=dist, calibrate=calibrate, **run)


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, str(path))


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


def write_trajectory_csv(path, samples) -> None:
    samples = list(samples)
    with_truth = bool(samples) and all(s.truth_x is not None and s.truth_y is not None for s in samples)
    header = TRAJECTORY_HEADER + (TRUTH_HEADER if with_truth else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for s in samples:
            row = [s.t, s.vx_body, s.vy_body, s.psi] + ([s.truth_x, s.truth_y] if with_truth else [])
            w.writerow([_fmt(v) for v in row])


def _read_rows(path, allowed_headers):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise TrajectoryFormatError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise TrajectoryFormatError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if header not in allowed_headers:
            raise TrajectoryFormatError(f"{path}: row 1: unexpected header {','.join(header)!r}")
        rows = []
        last_t = -np.inf
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise TrajectoryFormatError(
                    f"{path}: row {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise TrajectoryFormatError(f"{path}: row {lineno}: non-numeric field") from None
            if not all(np.isfinite(vals)):
                raise TrajectoryFormatError(f"{path}: row {lineno}: non-finite value")
            if vals[0] <= last_t:
                raise TrajectoryFormatError(f"{path}: row {lineno}: time {vals[0]:g} does not increase")
            last_t = vals[0]
            rows.append(dict(zip(header, vals)))
    return header, rows


def read_trajectory_csv(path) -> list:
    _, rows = _read_rows(path, [TRAJECTORY_HEADER, TRAJECTORY_HEADER + TRUTH_HEADER])
    return [
        TrajectorySample(r["t"], r["vx_body"], r["vy_body"], r["psi"], r.get("truth_x"), r.get("truth_y"))
        for r in rows
    ]


def write_estimates_csv(path, estimates, dr=None, kf=None, truth=None) -> None:
    extended = dr is not None and kf is not None and truth is not None
    header = ESTIMATE_HEADER + (BASELINE_HEADER if extended else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k, e in enumerate(estimates):
            row = [e.t, e.x, e.y]
            if extended:
                row += [dr[k].x, dr[k].y, kf[k].x, kf[k].y, truth[k].truth_x, truth[k].truth_y]
            w.writerow([_fmt(v) for v in row])


def read_positions_csv(path, columns=("x_est", "y_est")) -> list:
    """Positions from an estimates or trajectory CSV as :class:`PositionEstimate`."""
    allowed = [
        ESTIMATE_HEADER,
        ESTIMATE_HEADER + BASELINE_HEADER,
        TRAJECTORY_HEADER + TRUTH_HEADER,
    ]
    header, rows = _read_rows(path, allowed)
    cx, cy = columns
    if cx not in header:
        cx, cy = "truth_x", "truth_y"
    if cx not in header:
        raise TrajectoryFormatError(f"{path}: no {columns[0]} or truth_x column")
    return [PositionEstimate(r["t"], r[cx], r[cy]) for r in rows]


def write_snapshot(state: GridState, grid, path, step_number: Optional[int] = None) -> Path:
    """Write the activity sheet; a directory ``path`` gets ``snapshot_<step>.txt``."""
    path = Path(path)
    number = state.step if step_number is None else step_number
    if path.is_dir():
        path = path / f"snapshot_{number:06d}.txt"
    sheet = np.asarray(state.activity).reshape(grid.n_y, grid.n_x)
    lines = (" ".join(format(float(v), ".9g") for v in row) for row in sheet)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_snapshot(path) -> np.ndarray:
    return np.loadtxt(path, ndmin=2)


def load_trajectory(run: RunConfig) -> list:
    if run.trajectory == "circle":
        samples = harness.gen_circle(run.radius, run.speed, run.grid.dt, run.laps, run.grid.alpha)
    elif run.trajectory == "rect":
        samples = harness.gen_waypoint_rect(run.width, run.height, run.speed, run.grid.dt, run.grid.alpha)
    else:
        samples = read_trajectory_csv(run.trajectory[len("csv:"):])
    if run.disturbance_on:
        samples = harness.add_disturbance(samples, run.disturbance)
    return samples


class _Staging:
    """Collect outputs in a scratch directory; publish them only on success."""

    def __init__(self, out_dir):
        self.out = Path(out_dir)

    def __enter__(self):
        self.created = not self.out.exists()
        self.out.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=".gridnav-", dir=self.out))
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                for item in sorted(self.tmp.iterdir()):
                    target = self.out / item.name
                    if target.is_dir():
                        shutil.rmtree(target)
                    os.replace(item, target)
        finally:
            shutil.rmtree(self.tmp, ignore_errors=True)
            if exc_type is not None and self.created:
                shutil.rmtree(self.out, ignore_errors=True)
        return False


def run_simulate(run: RunConfig, out_dir) -> dict:
    samples = load_trajectory(run)
    cfg = run.grid
    if run.calibrate:
        cfg = cfg.replace(gamma=calibrate_gamma(cfg, speed=run.speed, method=run.kernel))
    has_truth = bool(samples) and all(s.truth_x is not None for s in samples)
    with _Staging(out_dir) as tmp:
        snaps = tmp / "snapshots"
        snaps.mkdir()
        integrator = PathIntegrator(cfg, settle_steps=run.settle_steps, method=run.kernel)
        write_snapshot(integrator.state, integrator.grid, snaps, 0)

        def snapshot(k, it):
            if run.snapshot_every and (k + 1) % run.snapshot_every == 0:
                write_snapshot(it.state, it.grid, snaps, k + 1)

        est = integrator.run(samples, on_step=snapshot)
        dr = harness.dead_reckon(samples)
        kf = harness.kf_velocity_baseline(samples, run.meas_noise, run.process_noise)
        write_trajectory_csv(tmp / "trajectory.csv", samples)
        if has_truth:
            write_estimates_csv(tmp / "estimates.csv", est, dr, kf, samples)
            reports = {name: harness.compare(seq, samples) for name, seq in (("grid", est), ("dr", dr), ("kf", kf))}
            text = "".join(
                f"{name}.{key}={getattr(rep, key):.12g}\n"
                for name, rep in reports.items()
                for key in rep.__dataclass_fields__
            )
            (tmp / "report.txt").write_text(f"gamma={cfg.spacing_gain:.12g}\n" + text, encoding="utf-8")
        else:
            write_estimates_csv(tmp / "estimates.csv", est)
            (tmp / "report.txt").write_text(f"gamma={cfg.spacing_gain:.12g}\n", encoding="utf-8")
    return {"samples": len(samples), "gamma": cfg.spacing_gain}


def bench(cfg: GridConfig, steps: int = 200, naive_steps: int = 5, shift=(0.01, 0.004)) -> dict:
    """Steps per second of the dense reference path and both fast transfers.

    Each step rebuilds its kernel, as happens during integration.
    """
    grid = build_topology(cfg.n_x, cfg.n_y)
    state = init_state(cfg)
    rates = {}

    def timed(make_kernel, n):
        s = state
        start = time.perf_counter()
        for _ in range(n):
            s = step(s, make_kernel(), cfg)
        return n / (time.perf_counter() - start)

    rates["naive"] = timed(lambda: build_weights(grid, cfg, shift), naive_steps)
    for method in ("direct", "fft"):
        rates[method] = timed(lambda: build_relative_kernel(grid, cfg, shift, method), steps)
    return rates


def _load_run(args) -> RunConfig:
    run = parse_config(args.config) if args.config else RunConfig()
    changes = {}
    if args.seed is not None:
        grid = run.grid.replace(seed=args.seed)
        changes.update(grid=grid, disturbance=dataclasses.replace(run.disturbance, seed=args.seed))
    if getattr(args, "trajectory", None):
        changes["trajectory"] = args.trajectory
    if getattr(args, "disturbance", None):
        changes["disturbance_on"] = args.disturbance == "on"
    if getattr(args, "snapshot_every", None) is not None:
        changes["snapshot_every"] = args.snapshot_every
    if args.out:
        changes["out_dir"] = args.out
    return dataclasses.replace(run, **changes) if changes else run


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="overrides the config seed")

    parser = argparse.ArgumentParser(prog="gridnav", description="Grid-cell path integration toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="run estimator and baselines on a trajectory")
    sim.add_argument("--trajectory", help="circle | rect | csv:<path>")
    sim.add_argument("--disturbance", choices=("on", "off"))
    sim.add_argument("--snapshot-every", type=int, dest="snapshot_every")

    integ = sub.add_parser("integrate", parents=[common], help="grid-cell estimates for a trajectory CSV")
    integ.add_argument("trajectory_csv")

    sub.add_parser("calibrate", parents=[common], help="fit the grid-spacing gain gamma")

    cmp_ = sub.add_parser("compare", parents=[common], help="error report of one position CSV against another")
    cmp_.add_argument("estimates")
    cmp_.add_argument("reference")
    cmp_.add_argument("--estimator", choices=("grid", "dr", "kf"), default="grid",
                      help="which columns of an estimates file to score")

    b = sub.add_parser("bench", parents=[common], help="steps per second, dense vs fast kernel")
    b.add_argument("--steps", type=int, default=200)
    return parser


_COLUMNS = {"grid": ("x_est", "y_est"), "dr": ("x_dr", "y_dr"), "kf": ("x_kf", "y_kf")}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = _load_run(args)
        if args.command == "simulate":
            out = run.out_dir or "gridnav-out"
            info = run_simulate(run, out)
            print(f"wrote {info['samples']} estimates to {out} (gamma={info['gamma']:.12g})")
        elif args.command == "integrate":
            samples = read_trajectory_csv(args.trajectory_csv)
            cfg = run.grid
            if run.calibrate:
                cfg = cfg.replace(gamma=calibrate_gamma(cfg, speed=run.speed, method=run.kernel))
            est = PathIntegrator(cfg, settle_steps=run.settle_steps, method=run.kernel).run(samples)
            out = run.out_dir or "gridnav-out"
            with _Staging(out) as tmp:
                write_estimates_csv(tmp / "estimates.csv", est)
            print(f"wrote {len(est)} estimates to {out}")
        elif args.command == "calibrate":
            gamma = calibrate_gamma(run.grid, speed=run.speed, method=run.kernel)
            text = f"gamma={gamma:.12g}\n"
            if run.out_dir:
                with _Staging(run.out_dir) as tmp:
                    (tmp / "gamma.txt").write_text(text, encoding="utf-8")
            sys.stdout.write(text)
        elif args.command == "compare":
            est = read_positions_csv(args.estimates, _COLUMNS[args.estimator])
            ref = read_positions_csv(args.reference, _COLUMNS[args.estimator])
            text = harness.compare(est, ref).as_text()
            if run.out_dir:
                with _Staging(run.out_dir) as tmp:
                    (tmp / "compare.txt").write_text(text, encoding="utf-8")
            sys.stdout.write(text)
        elif args.command == "bench":
            rates = bench(run.grid, steps=args.steps)
            for name, rate in rates.items():
                print(f"{name}_steps_per_s={rate:.1f}")
            print(f"speedup_fft={rates['fft'] / rates['naive']:.1f}")
            print(f"speedup_direct={rates['direct'] / rates['naive']:.1f}")
    except (GridNavError, OSError) as exc:
        print(f"gridnav {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
