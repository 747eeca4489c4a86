import numpy as np
import pytest

from rcjhand import (NoOverlapError, Pose, RigidTransform, Trajectory,
                     generate_trajectory, read_trajectory_csv,
                     trajectory_rmse, write_trajectory_csv)
from rcjhand.errors import InvalidGeometryError, RomViolationError


def _ramp_pose(level):
    return Pose({
        "thumb": (0.0, level, level, level),
        "index": (0.0, level, level, level),
        "middle": (0.0, level, level, level),
        "ring": (0.0, level, level, level),
        "little": (0.0, level, level, level),
    })


@pytest.fixture(scope="module")
def ramp(hand):
    return generate_trajectory(hand, [_ramp_pose(0), _ramp_pose(90)], [1.0],
                               rate_hz=100.0)


def test_open_close_sampling(ramp):
    assert len(ramp.times) == 101
    assert ramp.times[0] == 0.0
    assert ramp.times[-1] == pytest.approx(1.0)
    flex = np.array([p.angles("index")[1] for p in ramp.poses])
    assert np.all(np.diff(flex) > 0)
    assert flex[0] == 0.0
    assert flex[-1] == pytest.approx(90.0)


def test_constant_trajectory(hand):
    traj = generate_trajectory(hand, [_ramp_pose(30), _ramp_pose(30)], [0.5],
                               rate_hz=50.0)
    for path in traj.tip_paths.values():
        assert np.allclose(path, path[0], atol=1e-12)


def test_interpolation_hits_waypoints_exactly(hand):
    traj = generate_trajectory(hand, [_ramp_pose(0), _ramp_pose(80)], [1.0],
                               rate_hz=20.0)
    assert traj.poses[0].angles("index") == pytest.approx([0, 0, 0, 0])
    assert traj.poses[-1].angles("index") == pytest.approx([0, 80, 80, 80])


def test_generation_validates_rom(hand):
    with pytest.raises(RomViolationError):
        generate_trajectory(hand, [_ramp_pose(0), _ramp_pose(120)], [1.0])


def test_generation_argument_validation(hand):
    with pytest.raises(InvalidGeometryError):
        generate_trajectory(hand, [_ramp_pose(0)], [])
    with pytest.raises(InvalidGeometryError):
        generate_trajectory(hand, [_ramp_pose(0), _ramp_pose(10)], [-1.0])


def test_times_must_increase():
    with pytest.raises(InvalidGeometryError):
        Trajectory(np.array([0.0, 0.0, 1.0]),
                   {"index": np.zeros((3, 3))})


# --- RMSE -------------------------------------------------------------------

def test_rmse_identical_is_zero(ramp):
    report = trajectory_rmse(ramp, ramp)
    assert report.aggregate == 0.0
    for value in report.per_finger.values():
        assert value == 0.0


def test_rmse_constant_offset_is_exact(ramp):
    shifted = Trajectory(
        ramp.times,
        {n: p + np.array([3.0, 0.0, 4.0]) for n, p in ramp.tip_paths.items()})
    report = trajectory_rmse(ramp, shifted, smooth_width=5)
    assert report.aggregate == pytest.approx(5.0, abs=1e-9)
    for value in report.per_finger.values():
        assert value == pytest.approx(5.0, abs=1e-9)
    # a time shift may partially compensate a spatial offset of a moving
    # trajectory, so an alignment window can only lower the figure
    windowed = trajectory_rmse(ramp, shifted, align_window=0.05,
                               smooth_width=5)
    assert windowed.aggregate <= 5.0 + 1e-9


def test_rmse_rigid_transform_invariance(ramp):
    tf = RigidTransform.from_axis_angle([0.2, 1.0, -0.4], 53.0,
                                        [8.0, -3.0, 11.0])
    wobble = Trajectory(
        ramp.times,
        {n: p + np.array([1.0, -2.0, 2.0]) for n, p in ramp.tip_paths.items()})
    base = trajectory_rmse(ramp, wobble)
    moved = trajectory_rmse(ramp.transformed(tf), wobble.transformed(tf))
    assert moved.aggregate == pytest.approx(base.aggregate, abs=1e-9)


def test_rmse_symmetry(ramp):
    wobble = Trajectory(
        ramp.times,
        {n: p + np.array([0.0, 2.0, -1.0]) for n, p in ramp.tip_paths.items()})
    ab = trajectory_rmse(ramp, wobble, align_window=0.03)
    ba = trajectory_rmse(wobble, ramp, align_window=0.03)
    assert ab.aggregate == pytest.approx(ba.aggregate, abs=1e-9)


def test_rmse_alignment_recovers_time_shift(ramp):
    delayed = Trajectory(ramp.times + 0.05, ramp.tip_paths)
    aligned = trajectory_rmse(ramp, delayed, align_window=0.1)
    assert aligned.time_shift == pytest.approx(-0.05, abs=1e-9)
    assert aligned.aggregate == pytest.approx(0.0, abs=1e-9)
    unaligned = trajectory_rmse(ramp, delayed)
    assert unaligned.aggregate > aligned.aggregate


def test_rmse_no_overlap(ramp):
    far = Trajectory(ramp.times + 100.0, ramp.tip_paths)
    with pytest.raises(NoOverlapError):
        trajectory_rmse(ramp, far, align_window=0.5)


def test_rmse_smoothing_reduces_noise(ramp):
    rng = np.random.default_rng(60)
    noisy = Trajectory(
        ramp.times,
        {n: p + rng.normal(0, 0.5, p.shape)
         for n, p in ramp.tip_paths.items()})
    raw = trajectory_rmse(ramp, noisy)
    smoothed = trajectory_rmse(ramp, noisy, smooth_width=9)
    assert smoothed.aggregate < raw.aggregate


# --- CSV --------------------------------------------------------------------

def test_csv_roundtrip(tmp_path, ramp):
    path = tmp_path / "traj.csv"
    write_trajectory_csv(ramp, path, header_comment="probe")
    back = read_trajectory_csv(path)
    assert np.allclose(back.times, ramp.times, atol=1e-6)
    for name in ramp.fingers:
        assert np.allclose(back.tip_paths[name], ramp.tip_paths[name],
                           atol=1e-6)
    report = trajectory_rmse(ramp, back)
    assert report.aggregate < 1e-5


def test_csv_schema_enforced(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(InvalidGeometryError):
        read_trajectory_csv(path)
