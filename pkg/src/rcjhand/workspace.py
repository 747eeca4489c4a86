"""Reachable-workspace voxelization and the thumb opposability index.

A workspace is the set of tip positions over a finger's full ROM,
rasterized onto a fixed cubic lattice (voxel i covers
[origin + i*edge, origin + (i+1)*edge)).  All fingers of one hand share
the palm-frame lattice so intersections are plain set intersections.

Finite pose grids leave sub-sample pinholes in the occupancy of what is
geometrically a solid region, which deflates volumes and especially
intersections.  sample_workspace therefore applies a small morphological
closing (dilate/erode by ``fill_radius`` voxels) after insertion; closing
is monotone, so refining the pose grid still only adds voxels.

The opposability index is

    J = (1 / d^3) * sum_i w_i * v_i

with v_i the volume shared between the thumb workspace and finger i's
workspace and d the thumb length; volumes enter in mm^3 so J is
dimensionless and invariant under uniform scaling of the hand.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import InvalidGeometryError, ResolutionMismatchError
from .geometry import FINGER_ORDER, FingerModel, HandModel
from .kinematics import batch_tip_positions

DEFAULT_VOXEL_EDGE_MM = 2.0
DEFAULT_STEPS_PER_JOINT = 25
DEFAULT_FILL_RADIUS = 2

_CHUNK = 200_000
_LATTICE_TOL = 1e-9

# packed-key layout: 21 bits per axis, biased to non-negative
_KEY_BITS = 21
_KEY_BIAS = 1 << (_KEY_BITS - 1)
_KEY_MASK = (1 << _KEY_BITS) - 1


def _pack(idx: np.ndarray) -> np.ndarray:
    shifted = idx.astype(np.int64) + _KEY_BIAS
    if np.any(shifted < 0) or np.any(shifted > _KEY_MASK):
        raise InvalidGeometryError("voxel index out of packable range")
    return (shifted[:, 0] << (2 * _KEY_BITS)) | (shifted[:, 1] << _KEY_BITS) \
        | shifted[:, 2]


def _unpack(keys: np.ndarray) -> np.ndarray:
    out = np.empty((keys.size, 3), dtype=np.int64)
    out[:, 0] = (keys >> (2 * _KEY_BITS)) & _KEY_MASK
    out[:, 1] = (keys >> _KEY_BITS) & _KEY_MASK
    out[:, 2] = keys & _KEY_MASK
    return out - _KEY_BIAS


def _dilate(mask: np.ndarray) -> np.ndarray:
    out = mask.copy()
    out[1:, :, :] |= mask[:-1, :, :]
    out[:-1, :, :] |= mask[1:, :, :]
    out[:, 1:, :] |= mask[:, :-1, :]
    out[:, :-1, :] |= mask[:, 1:, :]
    out[:, :, 1:] |= mask[:, :, :-1]
    out[:, :, :-1] |= mask[:, :, 1:]
    return out


def _erode(mask: np.ndarray) -> np.ndarray:
    out = mask.copy()
    out[1:, :, :] &= mask[:-1, :, :]
    out[:-1, :, :] &= mask[1:, :, :]
    out[:, 1:, :] &= mask[:, :-1, :]
    out[:, :-1, :] &= mask[:, 1:, :]
    out[:, :, 1:] &= mask[:, :, :-1]
    out[:, :, :-1] &= mask[:, :, 1:]
    return out


@dataclass(frozen=True)
class VoxelGrid:
    """Sparse occupancy set on a cubic lattice (packed integer keys)."""

    edge: float
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    keys: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        if self.edge <= 0:
            raise InvalidGeometryError(f"voxel edge must be positive, got {self.edge}")
        object.__setattr__(self, "origin",
                           np.asarray(self.origin, dtype=float).reshape(3))
        keys = np.unique(np.asarray(self.keys, dtype=np.int64))
        keys.setflags(write=False)
        object.__setattr__(self, "keys", keys)

    @staticmethod
    def from_points(points: np.ndarray, edge: float,
                    origin=(0.0, 0.0, 0.0)) -> "VoxelGrid":
        grid = VoxelGrid(edge, np.asarray(origin, dtype=float))
        return grid.with_points(points)

    def _point_keys(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        idx = np.floor((pts - self.origin) / self.edge).astype(np.int64)
        return _pack(idx)

    def with_points(self, points: np.ndarray) -> "VoxelGrid":
        new = self._point_keys(points)
        return VoxelGrid(self.edge, self.origin,
                         np.union1d(self.keys, new) if self.keys.size else new)

    def closed(self, radius: int) -> "VoxelGrid":
        """Morphological closing by ``radius`` voxels (6-neighbourhood)."""
        if radius <= 0 or self.keys.size == 0:
            return self
        idx = _unpack(self.keys)
        lo = idx.min(axis=0) - (radius + 1)
        hi = idx.max(axis=0) + (radius + 2)
        mask = np.zeros(tuple(hi - lo), dtype=bool)
        local = idx - lo
        mask[local[:, 0], local[:, 1], local[:, 2]] = True
        for _ in range(radius):
            mask = _dilate(mask)
        for _ in range(radius):
            mask = _erode(mask)
        filled = np.argwhere(mask) + lo
        return VoxelGrid(self.edge, self.origin, _pack(filled))

    @property
    def count(self) -> int:
        return int(self.keys.size)

    @property
    def volume_mm3(self) -> float:
        return self.count * self.edge ** 3

    @property
    def volume_cm3(self) -> float:
        return self.volume_mm3 / 1000.0

    def indices(self) -> np.ndarray:
        """Occupied voxel indices, (N, 3), sorted by packed key."""
        return _unpack(self.keys)

    def bounds(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Axis-aligned bounding box of the occupied region, mm."""
        if self.keys.size == 0:
            return None
        idx = self.indices()
        return (self.origin + idx.min(axis=0) * self.edge,
                self.origin + (idx.max(axis=0) + 1) * self.edge)

    def centers(self) -> np.ndarray:
        """Occupied voxel centres, (N, 3) mm, in deterministic key order."""
        if self.keys.size == 0:
            return np.zeros((0, 3))
        return self.origin + (self.indices() + 0.5) * self.edge

    def contains_point(self, point) -> bool:
        key = self._point_keys(np.asarray(point, dtype=float).reshape(1, 3))
        pos = np.searchsorted(self.keys, key[0])
        return bool(pos < self.keys.size and self.keys[pos] == key[0])

    def issubset(self, other: "VoxelGrid") -> bool:
        if not self._aligned_with(other):
            return False
        return np.intersect1d(self.keys, other.keys).size == self.keys.size

    def _aligned_with(self, other: "VoxelGrid") -> bool:
        if abs(self.edge - other.edge) > _LATTICE_TOL:
            return False
        shift = (other.origin - self.origin) / self.edge
        return bool(np.all(np.abs(shift - np.round(shift)) < _LATTICE_TOL))

    def rerasterized(self, edge: float, origin=(0.0, 0.0, 0.0)) -> "VoxelGrid":
        """Re-rasterize occupied voxel centres onto a new lattice."""
        return VoxelGrid.from_points(self.centers(), edge, origin)


def intersect_volume(a: VoxelGrid, b: VoxelGrid,
                     allow_rerasterize: bool = True) -> float:
    """Volume of the occupancy intersection, cm^3.

    Grids on identical lattices intersect exactly; otherwise b is
    re-rasterized onto a's lattice (disable via allow_rerasterize to get
    a ResolutionMismatchError instead).
    """
    if not a._aligned_with(b):
        if not allow_rerasterize:
            raise ResolutionMismatchError(
                f"lattices differ (edge {a.edge} vs {b.edge}, origins "
                f"{a.origin.tolist()} vs {b.origin.tolist()}) and "
                "re-rasterization is disabled")
        b = b.rerasterized(a.edge, a.origin)
        b_keys = b.keys
    else:
        shift = np.round((b.origin - a.origin) / a.edge).astype(np.int64)
        if np.any(shift != 0):
            b_keys = _pack(b.indices() + shift)
        else:
            b_keys = b.keys
    shared = np.intersect1d(a.keys, b_keys, assume_unique=False)
    return shared.size * a.edge ** 3 / 1000.0


def _pose_grid(finger: FingerModel, steps: int) -> np.ndarray:
    axes = [np.linspace(j.rom[0], j.rom[1], steps) for j in finger.joints]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _pose_random(finger: FingerModel, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lo, hi = finger.rom_lo, finger.rom_hi
    return lo + rng.random((samples, 4)) * (hi - lo)


def sample_workspace(hand: HandModel, finger: str,
                     steps: int = DEFAULT_STEPS_PER_JOINT,
                     voxel_edge: float = DEFAULT_VOXEL_EDGE_MM,
                     fill_radius: int = DEFAULT_FILL_RADIUS,
                     random_samples: Optional[int] = None,
                     seed: int = 0) -> VoxelGrid:
    """Voxelized reachable tip positions of one finger, in palm coordinates.

    Args:
        steps: grid steps per joint (steps**4 poses)
        voxel_edge: lattice edge, mm; the lattice is anchored at the palm origin
        fill_radius: morphological-closing radius in voxels (0 = raw points)
        random_samples: when given, sample this many uniform random ROM
            poses (seeded) instead of the grid
    """
    model = hand.finger(finger)
    if random_samples is not None:
        if random_samples < 1:
            raise InvalidGeometryError("random_samples must be >= 1")
        poses = _pose_random(model, random_samples, seed)
    else:
        if steps < 1:
            raise InvalidGeometryError("steps must be >= 1")
        poses = _pose_grid(model, steps)
    placement = hand.placements[finger]
    grid = VoxelGrid(voxel_edge)
    for start in range(0, len(poses), _CHUNK):
        tips = batch_tip_positions(model, poses[start:start + _CHUNK])
        grid = grid.with_points(placement.apply(tips))
    return grid.closed(fill_radius)


@dataclass(frozen=True)
class OpposabilityReport:
    """Shared thumb-finger workspace volumes and the index J."""

    shared_cm3: Dict[str, float]       # per non-thumb finger
    weights: Dict[str, float]
    thumb_length: float                # mm
    index: float
    workspace_cm3: Dict[str, float]    # full per-finger workspace volumes

    def to_dict(self) -> Dict:
        return {
            "opposability_index": self.index,
            "thumb_length_mm": self.thumb_length,
            "shared_volume_cm3": dict(self.shared_cm3),
            "weights": dict(self.weights),
            "workspace_volume_cm3": dict(self.workspace_cm3),
        }


def opposability_index(hand: HandModel,
                       weights: Optional[Dict[str, float]] = None,
                       steps: int = DEFAULT_STEPS_PER_JOINT,
                       voxel_edge: float = DEFAULT_VOXEL_EDGE_MM,
                       fill_radius: int = DEFAULT_FILL_RADIUS) -> OpposabilityReport:
    """Thumb opposability index with per-finger shared volumes.

    Weights default to 1 for every finger; the thumb length d comes from
    the hand model.
    """
    others = [n for n in FINGER_ORDER if n != "thumb"]
    if weights is None:
        weights = {n: 1.0 for n in others}
    for name, w in weights.items():
        if name not in others:
            raise InvalidGeometryError(f"weight for unknown finger {name!r}")
        if w < 0:
            raise InvalidGeometryError(f"weight for {name} must be >= 0")
    weights = {n: float(weights.get(n, 1.0)) for n in others}
    d = hand.thumb_length
    if d <= 0:
        raise InvalidGeometryError("thumb length must be positive")

    grids = {n: sample_workspace(hand, n, steps=steps, voxel_edge=voxel_edge,
                                 fill_radius=fill_radius)
             for n in FINGER_ORDER}
    shared = {n: intersect_volume(grids["thumb"], grids[n]) for n in others}
    j = sum(weights[n] * shared[n] * 1000.0 for n in others) / d ** 3
    return OpposabilityReport(
        shared_cm3=shared,
        weights=weights,
        thumb_length=d,
        index=float(j),
        workspace_cm3={n: grids[n].volume_cm3 for n in FINGER_ORDER},
    )


def write_pointcloud_csv(grid: VoxelGrid, path,
                         header_comment: Optional[str] = None) -> None:
    """Occupied voxel centres as x_mm,y_mm,z_mm rows (sorted, deterministic)."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["x_mm", "y_mm", "z_mm"])
        for x, y, z in grid.centers():
            writer.writerow([f"{x:.3f}", f"{y:.3f}", f"{z:.3f}"])
