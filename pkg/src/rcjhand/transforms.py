"""Rigid transforms on 3-D frames.

All frames in the package are expressed as a 3x3 rotation plus a
translation in millimetres.  Transforms compose left-to-right along a
kinematic chain: ``parent_T_child = parent_T_mid @ mid_T_child``.

Geometric tolerance for orthonormality / round-trip checks is GEOM_TOL.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GEOM_TOL = 1e-9       # mm / rad, exact-geometry assertions
ITER_TOL = 1e-6       # mm, iterative solvers


@dataclass(frozen=True)
class RigidTransform:
    """A proper rigid transform (rotation + translation, no scaling).

    Attributes:
        rotation: 3x3 orthonormal matrix with determinant +1
        translation: 3-vector, mm
    """

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        tr = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform()

    @staticmethod
    def from_translation(x: float, y: float, z: float) -> "RigidTransform":
        return RigidTransform(np.eye(3), np.array([x, y, z], dtype=float))

    @staticmethod
    def rot_x(angle_deg: float) -> "RigidTransform":
        a = np.deg2rad(angle_deg)
        c, s = np.cos(a), np.sin(a)
        return RigidTransform(np.array([[1, 0, 0], [0, c, -s], [0, s, c]]))

    @staticmethod
    def rot_y(angle_deg: float) -> "RigidTransform":
        a = np.deg2rad(angle_deg)
        c, s = np.cos(a), np.sin(a)
        return RigidTransform(np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]]))

    @staticmethod
    def rot_z(angle_deg: float) -> "RigidTransform":
        a = np.deg2rad(angle_deg)
        c, s = np.cos(a), np.sin(a)
        return RigidTransform(np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]]))

    @staticmethod
    def from_axis_angle(axis, angle_deg: float,
                        translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        """Rodrigues rotation about an arbitrary axis plus a translation."""
        axis = np.asarray(axis, dtype=float)
        norm = np.linalg.norm(axis)
        if norm == 0.0:
            if abs(angle_deg) > 0:
                raise ValueError("zero axis with nonzero angle")
            rot = np.eye(3)
        else:
            u = axis / norm
            a = np.deg2rad(angle_deg)
            c, s = np.cos(a), np.sin(a)
            ux, uy, uz = u
            skew = np.array([[0, -uz, uy], [uz, 0, -ux], [-uy, ux, 0]])
            rot = c * np.eye(3) + s * skew + (1 - c) * np.outer(u, u)
        return RigidTransform(rot, np.asarray(translation, dtype=float))

    @staticmethod
    def from_matrix(mat: np.ndarray) -> "RigidTransform":
        mat = np.asarray(mat, dtype=float)
        return RigidTransform(mat[:3, :3], mat[:3, 3])

    def as_matrix(self) -> np.ndarray:
        """Homogeneous 4x4 matrix."""
        mat = np.eye(4)
        mat[:3, :3] = self.rotation
        mat[:3, 3] = self.translation
        return mat

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(self.rotation @ other.rotation,
                              self.rotation @ other.translation + self.translation)

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return self.compose(other)

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one point (3,) or a batch (N, 3)."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def is_rigid(self, tol: float = GEOM_TOL) -> bool:
        rot = self.rotation
        return (np.allclose(rot @ rot.T, np.eye(3), atol=tol)
                and abs(np.linalg.det(rot) - 1.0) < tol)

    def axis_angle(self):
        """Return (unit axis, angle_deg); axis is arbitrary at angle 0."""
        rot = self.rotation
        cos_a = np.clip((np.trace(rot) - 1.0) / 2.0, -1.0, 1.0)
        angle = np.arccos(cos_a)
        if angle < 1e-12:
            return np.array([0.0, 0.0, 1.0]), 0.0
        if np.pi - angle < 1e-9:
            # 180 degrees: extract axis from R + I
            m = rot + np.eye(3)
            axis = m[:, np.argmax(np.diag(m))]
            axis = axis / np.linalg.norm(axis)
            return axis, 180.0
        axis = np.array([rot[2, 1] - rot[1, 2],
                         rot[0, 2] - rot[2, 0],
                         rot[1, 0] - rot[0, 1]]) / (2.0 * np.sin(angle))
        return axis, float(np.rad2deg(angle))

    def isclose(self, other: "RigidTransform", tol: float = GEOM_TOL) -> bool:
        return (np.allclose(self.rotation, other.rotation, atol=tol)
                and np.allclose(self.translation, other.translation, atol=tol))

    def __repr__(self):
        axis, ang = self.axis_angle()
        t = self.translation
        return (f"RigidTransform(axis={np.round(axis, 4).tolist()}, "
                f"angle={ang:.3f} deg, t=[{t[0]:.3f}, {t[1]:.3f}, {t[2]:.3f}] mm)")
