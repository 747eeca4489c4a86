"""Pose trajectories, fingertip paths, and RMSE comparison.

A Trajectory holds strictly increasing sample times with per-finger tip
paths in palm coordinates; when generated from poses it also retains the
pose samples.  Trajectories imported from CSV carry tip paths only.

CSV schema (long format, one row per time and finger):

    t_s,finger,tip_x_mm,tip_y_mm,tip_z_mm

The RMSE comparison mirrors the usual capture-evaluation pipeline:
temporal alignment by grid search over time shifts (at the coarser
trajectory's sample period), moving-average smoothing, then per-finger
root-mean-square tip distance and the mean across fingers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidGeometryError, RcjHandError
from .geometry import FINGER_ORDER, HandModel, Pose
from .kinematics import tip_positions


class NoOverlapError(RcjHandError):
    """Trajectories share no time range within the alignment window."""


@dataclass(frozen=True)
class Trajectory:
    """Sampled tip paths, plus pose samples when known."""

    times: np.ndarray                      # (N,) seconds, strictly increasing
    tip_paths: Dict[str, np.ndarray]       # finger -> (N, 3) mm
    poses: Optional[Tuple[Pose, ...]] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).reshape(-1)
        if t.size < 1:
            raise InvalidGeometryError("trajectory needs at least one sample")
        if np.any(np.diff(t) <= 0):
            raise InvalidGeometryError("sample times must be strictly increasing")
        object.__setattr__(self, "times", t)
        paths = {}
        for name, path in self.tip_paths.items():
            arr = np.asarray(path, dtype=float).reshape(-1, 3)
            if arr.shape[0] != t.size:
                raise InvalidGeometryError(
                    f"tip path for {name} has {arr.shape[0]} samples, "
                    f"expected {t.size}")
            paths[name] = arr
        if not paths:
            raise InvalidGeometryError("trajectory has no fingers")
        object.__setattr__(self, "tip_paths", paths)
        if self.poses is not None and len(self.poses) != t.size:
            raise InvalidGeometryError("pose count must match sample count")

    @property
    def fingers(self) -> Tuple[str, ...]:
        return tuple(n for n in FINGER_ORDER if n in self.tip_paths)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def sample_period(self) -> float:
        if self.times.size < 2:
            return 0.0
        return float(np.median(np.diff(self.times)))

    def transformed(self, tf) -> "Trajectory":
        """Apply one rigid transform to every tip sample."""
        return Trajectory(self.times,
                          {n: tf.apply(p) for n, p in self.tip_paths.items()},
                          self.poses)


def _interpolate_pose(p0: Pose, p1: Pose, frac: float) -> Pose:
    angles = {}
    for name in p0.fingers():
        a0 = p0.angles(name)
        a1 = p1.angles(name)
        angles[name] = tuple(a0 + frac * (a1 - a0))
    return Pose(angles)


def generate_trajectory(hand: HandModel, poses: Sequence[Pose],
                        durations: Sequence[float],
                        rate_hz: float = 100.0) -> Trajectory:
    """Piecewise-linear trajectory through the given poses.

    Args:
        poses: at least two waypoint poses (all over the same fingers)
        durations: seconds per segment, len(poses) - 1, all positive
        rate_hz: sample rate; segment boundaries and the final pose are
            always sampled exactly

    Every sample is ROM-validated (strict); tip paths come from hand_fk.
    """
    if len(poses) < 2:
        raise InvalidGeometryError("need at least two waypoint poses")
    if len(durations) != len(poses) - 1:
        raise InvalidGeometryError(
            f"need {len(poses) - 1} segment durations, got {len(durations)}")
    if any(d <= 0 for d in durations):
        raise InvalidGeometryError("segment durations must be positive")
    if rate_hz <= 0:
        raise InvalidGeometryError("sample rate must be positive")

    boundaries = np.concatenate([[0.0], np.cumsum(durations)])
    dt = 1.0 / rate_hz
    times = [0.0]
    while times[-1] + dt < boundaries[-1] - 1e-12:
        times.append(times[-1] + dt)
    times.append(float(boundaries[-1]))
    times = np.array(times)

    sampled = []
    for t in times:
        seg = min(int(np.searchsorted(boundaries, t, side="right")) - 1,
                  len(durations) - 1)
        seg = max(seg, 0)
        frac = (t - boundaries[seg]) / (boundaries[seg + 1] - boundaries[seg])
        sampled.append(_interpolate_pose(poses[seg], poses[seg + 1],
                                         min(max(frac, 0.0), 1.0)))

    fingers = sampled[0].fingers()
    paths = {n: np.zeros((len(sampled), 3)) for n in fingers}
    for i, pose in enumerate(sampled):
        tips = tip_positions(hand, pose, rom_mode="strict")
        for n in fingers:
            paths[n][i] = tips[n]
    return Trajectory(times, paths, tuple(sampled))


# ---------------------------------------------------------------------------
# RMSE comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RmseReport:
    per_finger: Dict[str, float]   # mm
    aggregate: float               # mm, mean over fingers
    time_shift: float              # seconds applied to the second trajectory

    def to_dict(self) -> Dict:
        return {"rmse_mm": dict(self.per_finger),
                "aggregate_rmse_mm": self.aggregate,
                "time_shift_s": self.time_shift}


def _smooth(path: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return path
    if width % 2 == 0:
        width += 1
    pad = width // 2
    padded = np.concatenate([np.repeat(path[:1], pad, axis=0), path,
                             np.repeat(path[-1:], pad, axis=0)])
    kernel = np.ones(width) / width
    return np.stack([np.convolve(padded[:, k], kernel, mode="valid")
                     for k in range(3)], axis=1)


def _resample(traj: Trajectory, finger: str, grid: np.ndarray) -> np.ndarray:
    path = traj.tip_paths[finger]
    return np.stack([np.interp(grid, traj.times, path[:, k])
                     for k in range(3)], axis=1)


def trajectory_rmse(a: Trajectory, b: Trajectory,
                    align_window: float = 0.0,
                    smooth_width: int = 1) -> RmseReport:
    """Tip-position RMSE after optimal time shift and smoothing.

    Args:
        align_window: half-width of the shift search, seconds; shifts are
            tried at the coarser trajectory's sample period (0 disables)
        smooth_width: moving-average width in samples (1 disables)

    Raises NoOverlapError when no candidate shift leaves a common time range.
    """
    fingers = [n for n in a.fingers if n in b.tip_paths]
    if not fingers:
        raise InvalidGeometryError("trajectories share no fingers")

    period = max(a.sample_period(), b.sample_period())
    if align_window > 0 and period > 0:
        n_shifts = int(np.floor(align_window / period + 1e-12))
        shifts = [k * period for k in range(-n_shifts, n_shifts + 1)]
    else:
        shifts = [0.0]
    # prefer small shifts on ties; keep zero first among equals
    shifts.sort(key=lambda s: (abs(s), s))

    grid_step = period if period > 0 else 1.0
    best = None
    for shift in shifts:
        lo = max(a.times[0], b.times[0] + shift)
        hi = min(a.times[-1], b.times[-1] + shift)
        if hi <= lo:
            continue
        n = max(int(np.floor((hi - lo) / grid_step)) + 1, 2)
        grid = np.linspace(lo, hi, n)
        errs = {}
        for name in fingers:
            pa = _smooth(_resample(a, name, grid), smooth_width)
            shifted = Trajectory(b.times + shift, b.tip_paths)
            pb = _smooth(_resample(shifted, name, grid), smooth_width)
            dist = np.linalg.norm(pa - pb, axis=1)
            errs[name] = float(np.sqrt(np.mean(dist ** 2)))
        aggregate = float(np.mean(list(errs.values())))
        if best is None or aggregate < best[0] - 1e-15:
            best = (aggregate, shift, errs)
    if best is None:
        raise NoOverlapError(
            f"no overlapping time range within +-{align_window} s")
    aggregate, shift, errs = best
    return RmseReport(errs, aggregate, shift)


# ---------------------------------------------------------------------------
# CSV import/export
# ---------------------------------------------------------------------------

def write_trajectory_csv(traj: Trajectory, path,
                         header_comment: Optional[str] = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["t_s", "finger", "tip_x_mm", "tip_y_mm", "tip_z_mm"])
        for i, t in enumerate(traj.times):
            for name in traj.fingers:
                x, y, z = traj.tip_paths[name][i]
                writer.writerow([f"{t:.6f}", name,
                                 f"{x:.6f}", f"{y:.6f}", f"{z:.6f}"])


def read_trajectory_csv(path) -> Trajectory:
    times_by_finger: Dict[str, list] = {}
    points_by_finger: Dict[str, list] = {}
    with open(path, newline="") as fh:
        rows = [r for r in fh if not r.startswith("#")]
    reader = csv.DictReader(rows)
    expected = {"t_s", "finger", "tip_x_mm", "tip_y_mm", "tip_z_mm"}
    if reader.fieldnames is None or set(reader.fieldnames) != expected:
        raise InvalidGeometryError(
            f"trajectory CSV must have columns {sorted(expected)}, "
            f"got {reader.fieldnames}")
    for row in reader:
        name = row["finger"]
        times_by_finger.setdefault(name, []).append(float(row["t_s"]))
        points_by_finger.setdefault(name, []).append(
            [float(row["tip_x_mm"]), float(row["tip_y_mm"]),
             float(row["tip_z_mm"])])
    if not times_by_finger:
        raise InvalidGeometryError("trajectory CSV has no data rows")
    reference = None
    for name, ts in times_by_finger.items():
        arr = np.array(ts)
        if reference is None:
            reference = arr
        elif arr.shape != reference.shape or not np.allclose(arr, reference):
            raise InvalidGeometryError(
                f"finger {name} is sampled on a different timeline")
    return Trajectory(reference,
                      {n: np.array(p) for n, p in points_by_finger.items()})
