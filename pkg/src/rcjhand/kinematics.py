"""Forward kinematics of the rolling-contact finger chain.

Frame chain per finger (all expressed in the finger origin frame O):

    O --roll(dev, phi0)--> J0 --T0--> L0 --roll(flex, th1)--> J1 --T1-->
    L1 --roll(flex, th2)--> J2 --T2--> L2 --roll(flex, th3)--> J3 --tip

J_i is the centre of the proximal rolling circle of link i; L_i is the
centre of its distal rolling circle.  A rolling joint of radius r at
angle a contributes Rot(a/2) Trans_z(2r) Rot(a/2) (rotation splits in
half across the two rolling circles; circle centres stay 2r apart).

Sign convention: positive flexion bends toward the palmar side (-x),
positive deviation toward -y.  Both therefore map to a *negative*
mathematical rotation about their axis; roll_transform itself is the
sign-free mathematical primitive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import InvalidGeometryError
from .geometry import (FINGER_ORDER, FingerModel, HandModel, JointAxis,
                       JointGeometry, Pose, validate_rom)
from .transforms import RigidTransform

# positive joint angle = palmar flexion / ulnar-to-radial deviation,
# which is a negative rotation about the local +y / +x axis
JOINT_ANGLE_SIGN = -1.0

FRAME_NAMES = ("J0", "L0", "J1", "L1", "J2", "L2", "J3", "tip")


def roll_transform(radius: float, axis: JointAxis,
                   angle_deg: float) -> RigidTransform:
    """Relative transform across one rolling joint (mathematical sign).

    Rot(axis, angle/2) . Trans_z(2 r) . Rot(axis, angle/2): the net
    orientation change is Rot(axis, angle) and the circle centres remain
    2 r apart.  Total function; radius 0 degenerates to a pure rotation.
    """
    if radius < 0:
        raise InvalidGeometryError(f"rolling radius must be >= 0, got {radius}")
    rot = RigidTransform.rot_x if axis is JointAxis.DEVIATION else RigidTransform.rot_y
    half = rot(angle_deg / 2.0)
    step = RigidTransform.from_translation(0.0, 0.0, 2.0 * radius)
    return half @ step @ half


def joint_roll(joint: JointGeometry, angle_deg: float) -> RigidTransform:
    """roll_transform with the finger sign convention applied."""
    return roll_transform(joint.radius, joint.axis, JOINT_ANGLE_SIGN * angle_deg)


def _flex_hole_line(joint: JointGeometry) -> float:
    # dorsal offset of the flexor/extensor hole line from the joint centreline,
    # measured to the rolling-surface tangency; realigns successive links
    return joint.flex_hole_spacing - joint.radius * np.tan(
        np.deg2rad(joint.surface_half_angle / 2.0))


def link_offset(finger: FingerModel, i: int) -> RigidTransform:
    """Fixed transform along link i, from J_i to L_i (tip offset for i = 3).

    Interior links carry z = l_i - r_i - r_{i+1}; links between two
    flexion joints additionally shift dorsopalmarly so the cable hole
    lines of successive joints stay aligned.
    """
    if not 0 <= i <= 3:
        raise InvalidGeometryError(f"link index {i} outside 0..3")
    joints, links = finger.joints, finger.links
    if i == 3:
        z = finger.tip_offset()
        if z <= 0:
            raise InvalidGeometryError(f"tip offset {z} mm must be positive")
        return RigidTransform.from_translation(0.0, 0.0, z)
    z = links[i].length - joints[i].radius - joints[i + 1].radius
    if z <= 0:
        raise InvalidGeometryError(
            f"link {i} z-span {z} mm must be positive "
            f"(l = {links[i].length}, r{i} = {joints[i].radius}, "
            f"r{i + 1} = {joints[i + 1].radius})")
    if i == 0:
        return RigidTransform.from_translation(0.0, 0.0, z)
    x = _flex_hole_line(joints[i + 1]) - _flex_hole_line(joints[i])
    return RigidTransform.from_translation(x, 0.0, z)


@dataclass(frozen=True)
class FrameChain:
    """Ordered frames of one finger in finger-origin coordinates."""

    frames: Tuple[RigidTransform, ...]

    def __getitem__(self, name: str) -> RigidTransform:
        try:
            return self.frames[FRAME_NAMES.index(name)]
        except ValueError:
            raise KeyError(f"unknown frame {name!r}") from None

    @property
    def tip(self) -> RigidTransform:
        return self.frames[-1]

    @property
    def tip_position(self) -> np.ndarray:
        return self.frames[-1].translation

    def named(self) -> List[Tuple[str, RigidTransform]]:
        return list(zip(FRAME_NAMES, self.frames))


def finger_fk(finger: FingerModel, angles: Sequence[float],
              rom_mode: str = "strict") -> FrameChain:
    """Forward kinematics of one finger.

    Args:
        finger: finger model
        angles: (deviation, flex1, flex2, flex3) degrees
        rom_mode: "strict" (raise outside ROM), "clamp", or "ignore"

    Returns:
        FrameChain with frames (J0, L0, J1, L1, J2, L2, J3, tip)
    """
    arr = np.asarray(angles, dtype=float).reshape(4)
    if rom_mode != "ignore":
        arr = validate_rom(finger, arr, mode=rom_mode)
    frames = []
    current = joint_roll(finger.joints[0], arr[0])          # J0
    frames.append(current)
    for i in range(3):
        current = current @ link_offset(finger, i)          # L_i
        frames.append(current)
        current = current @ joint_roll(finger.joints[i + 1], arr[i + 1])  # J_{i+1}
        frames.append(current)
    frames.append(current @ link_offset(finger, 3))         # tip
    return FrameChain(tuple(frames))


def hand_fk(hand: HandModel, pose: Pose,
            rom_mode: str = "strict") -> Dict[str, RigidTransform]:
    """Per-finger tip frames in palm coordinates."""
    tips = {}
    for name in pose.fingers():
        chain = finger_fk(hand.finger(name), pose.angles(name), rom_mode=rom_mode)
        tips[name] = hand.placements[name] @ chain.tip
    return tips


def tip_positions(hand: HandModel, pose: Pose,
                  rom_mode: str = "strict") -> Dict[str, np.ndarray]:
    return {name: tf.translation.copy()
            for name, tf in hand_fk(hand, pose, rom_mode=rom_mode).items()}


# ---------------------------------------------------------------------------
# Batched FK (used by workspace sampling; pure numpy, no python loop per pose)
# ---------------------------------------------------------------------------

def _batch_rot(axis: JointAxis, angles_rad: np.ndarray) -> np.ndarray:
    n = angles_rad.shape[0]
    c, s = np.cos(angles_rad), np.sin(angles_rad)
    rot = np.zeros((n, 3, 3))
    if axis is JointAxis.DEVIATION:
        rot[:, 0, 0] = 1.0
        rot[:, 1, 1] = c
        rot[:, 1, 2] = -s
        rot[:, 2, 1] = s
        rot[:, 2, 2] = c
    else:
        rot[:, 0, 0] = c
        rot[:, 0, 2] = s
        rot[:, 1, 1] = 1.0
        rot[:, 2, 0] = -s
        rot[:, 2, 2] = c
    return rot


def batch_tip_positions(finger: FingerModel, angles_deg: np.ndarray) -> np.ndarray:
    """Tip positions for a batch of joint-angle rows.

    Args:
        angles_deg: (N, 4) array of joint angles, degrees (assumed in ROM)

    Returns:
        (N, 3) tip positions in finger-origin coordinates
    """
    arr = np.asarray(angles_deg, dtype=float).reshape(-1, 4)
    n = arr.shape[0]
    rot_acc = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    tr_acc = np.zeros((n, 3))

    def advance_rot(step_rot):
        nonlocal rot_acc
        rot_acc = np.einsum("nij,njk->nik", rot_acc, step_rot)

    def advance_trans(step_tr):
        nonlocal tr_acc
        tr_acc = tr_acc + np.einsum("nij,nj->ni", rot_acc, step_tr)

    for i, joint in enumerate(finger.joints):
        half = _batch_rot(joint.axis,
                          np.deg2rad(JOINT_ANGLE_SIGN * arr[:, i]) / 2.0)
        step = np.zeros((n, 3))
        step[:, 2] = 2.0 * joint.radius
        advance_rot(half)
        advance_trans(step)
        advance_rot(half)
        off = link_offset(finger, i).translation
        advance_trans(np.broadcast_to(off, (n, 3)))
    return tr_acc
