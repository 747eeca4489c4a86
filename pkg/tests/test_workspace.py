import numpy as np
import pytest

from rcjhand import (FingerModel, InvalidGeometryError, JointAxis,
                     JointGeometry, LinkGeometry, ResolutionMismatchError,
                     RigidTransform, VoxelGrid, intersect_volume,
                     opposability_index, sample_workspace,
                     write_pointcloud_csv)
from rcjhand.geometry import HandModel


def _frozen_finger():
    """A finger with zero ROM on every joint (single reachable point)."""
    joints = (
        JointGeometry(1.9, 9.5, 7.5, 0.0, JointAxis.DEVIATION, (0.0, 0.0)),
        JointGeometry(4.9, 12.7, 7.5, 0.0, JointAxis.FLEXION, (0.0, 0.0)),
        JointGeometry(3.3, 8.7, 6.5, 0.0, JointAxis.FLEXION, (0.0, 0.0)),
        JointGeometry(3.1, 8.2, 6.0, 0.0, JointAxis.FLEXION, (0.0, 0.0)),
    )
    links = (LinkGeometry(15.5), LinkGeometry(42.5), LinkGeometry(24.5),
             LinkGeometry(24.5))
    return FingerModel("finger", joints, links)


def _frozen_hand(hand):
    fingers = {n: _frozen_finger() if f.kind == "finger" else f
               for n, f in hand.fingers.items()}
    fingers["thumb"] = hand.fingers["thumb"]
    return HandModel(fingers, hand.placements, hand.thumb_length)


# --- VoxelGrid --------------------------------------------------------------

def test_voxel_volume_accounting():
    pts = np.array([[0.1, 0.1, 0.1], [0.2, 0.2, 0.2], [5.0, 0.0, 0.0]])
    grid = VoxelGrid.from_points(pts, edge=2.0)
    assert grid.count == 2
    assert grid.volume_mm3 == pytest.approx(16.0)
    assert grid.volume_cm3 == pytest.approx(0.016)


def test_voxel_bounds_contain_points():
    rng = np.random.default_rng(40)
    pts = rng.uniform(-50, 50, size=(500, 3))
    grid = VoxelGrid.from_points(pts, edge=2.0)
    lo, hi = grid.bounds()
    assert np.all(pts >= lo - 1e-12)
    assert np.all(pts <= hi + 1e-12)
    for p in pts[:20]:
        assert grid.contains_point(p)


def test_self_intersection_is_identity():
    rng = np.random.default_rng(41)
    grid = VoxelGrid.from_points(rng.uniform(-30, 30, (200, 3)), edge=2.0)
    assert intersect_volume(grid, grid) == pytest.approx(grid.volume_cm3)


def test_disjoint_grids_share_nothing():
    a = VoxelGrid.from_points(np.array([[0.0, 0.0, 0.0]]), edge=2.0)
    b = VoxelGrid.from_points(np.array([[100.0, 0.0, 0.0]]), edge=2.0)
    assert intersect_volume(a, b) == 0.0


def test_resolution_mismatch_paths():
    pts = np.array([[1.0, 1.0, 1.0], [3.0, 3.0, 3.0]])
    a = VoxelGrid.from_points(pts, edge=2.0)
    b = VoxelGrid.from_points(pts, edge=1.0)
    with pytest.raises(ResolutionMismatchError):
        intersect_volume(a, b, allow_rerasterize=False)
    # re-rasterization maps b's centres onto a's lattice
    assert intersect_volume(a, b) == pytest.approx(a.volume_cm3)


def test_shifted_origin_alignment():
    pts = np.array([[1.0, 1.0, 1.0]])
    a = VoxelGrid.from_points(pts, edge=2.0)
    b = VoxelGrid.from_points(pts, edge=2.0, origin=(4.0, -2.0, 6.0))
    assert intersect_volume(a, b) == pytest.approx(a.volume_cm3)


def test_closing_is_monotone_and_fills():
    rng = np.random.default_rng(42)
    pts = rng.uniform(0, 20, size=(60, 3))
    raw = VoxelGrid.from_points(pts, edge=2.0)
    closed = raw.closed(2)
    assert raw.issubset(closed)
    assert closed.count >= raw.count


# --- sample_workspace -------------------------------------------------------

def test_zero_rom_gives_single_voxel(hand):
    frozen = _frozen_hand(hand)
    grid = sample_workspace(frozen, "index", steps=5, fill_radius=0)
    assert grid.count == 1


def test_refinement_only_adds_voxels(hand):
    # linspace grids nest when going from n to 2n-1 points per joint
    coarse = sample_workspace(hand, "index", steps=7, fill_radius=0)
    fine = sample_workspace(hand, "index", steps=13, fill_radius=0)
    assert coarse.issubset(fine)
    assert fine.volume_cm3 >= coarse.volume_cm3
    # and closing preserves the ordering
    assert sample_workspace(hand, "index", steps=7).issubset(
        sample_workspace(hand, "index", steps=13))


def test_workspace_self_convergence(hand):
    # near the default density the measured volume is stable under a
    # near-doubling of the pose grid
    default = sample_workspace(hand, "index")
    dense = sample_workspace(hand, "index", steps=49)
    rel = abs(dense.volume_cm3 - default.volume_cm3) / dense.volume_cm3
    assert rel < 0.10


def test_random_sampler_deterministic(hand):
    a = sample_workspace(hand, "index", random_samples=2000, seed=7)
    b = sample_workspace(hand, "index", random_samples=2000, seed=7)
    assert np.array_equal(a.keys, b.keys)


def test_sampler_validation(hand):
    with pytest.raises(InvalidGeometryError):
        sample_workspace(hand, "index", steps=0)
    with pytest.raises(InvalidGeometryError):
        sample_workspace(hand, "index", random_samples=0)


# --- opposability -----------------------------------------------------------

@pytest.fixture(scope="module")
def report(hand):
    return opposability_index(hand)


def test_opposability_in_calibrated_window(report):
    assert 0.12 <= report.index <= 0.22


def test_shared_volumes_strictly_ordered(report):
    v = report.shared_cm3
    assert v["index"] > v["middle"] > v["ring"] > v["little"] > 0


def test_shared_volume_bounded_by_workspaces(report):
    thumb_ws = report.workspace_cm3["thumb"]
    for name, shared in report.shared_cm3.items():
        assert shared <= min(thumb_ws, report.workspace_cm3[name]) + 1e-9


def test_zero_weights_zero_index(hand):
    rep = opposability_index(hand, weights={n: 0.0 for n in
                                            ("index", "middle", "ring",
                                             "little")},
                             steps=7)
    assert rep.index == 0.0


def test_scale_invariance_with_proportional_lattice(hand):
    base = opposability_index(hand, steps=9, voxel_edge=2.0)
    doubled = opposability_index(hand.scaled(2.0), steps=9, voxel_edge=4.0)
    assert doubled.index == pytest.approx(base.index, rel=1e-9)


def test_rigid_transform_invariance(hand):
    # translating the whole hand by a lattice-aligned offset leaves every
    # volume untouched
    offset = RigidTransform.from_translation(20.0, -14.0, 8.0)
    moved = HandModel(hand.fingers,
                      {n: offset @ tf for n, tf in hand.placements.items()},
                      hand.thumb_length)
    base = opposability_index(hand, steps=9)
    shifted = opposability_index(moved, steps=9)
    assert shifted.index == pytest.approx(base.index, rel=1e-12)
    for name in base.shared_cm3:
        assert shifted.shared_cm3[name] == pytest.approx(
            base.shared_cm3[name], rel=1e-12)


def test_pointcloud_csv(tmp_path, hand):
    grid = sample_workspace(hand, "little", steps=5)
    path = tmp_path / "ws.csv"
    write_pointcloud_csv(grid, path, header_comment="probe")
    lines = path.read_text().splitlines()
    assert lines[0] == "# probe"
    assert lines[1] == "x_mm,y_mm,z_mm"
    assert len(lines) == 2 + grid.count
