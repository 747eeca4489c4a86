"""Cable holes, per-joint chord lengths, tendon routing and pairing.

Hole model: each joint carries cable holes in the z = 0 plane of both of
its circle-centre frames.  ``flex_hole_spacing`` and
``lateral_hole_spacing`` are full hole-to-hole distances, so the nominal
per-side offsets are half of them; the chord endpoint is additionally
inset by half the cable diameter (the wire's bearing line at the hole
edge).  The cable crosses the joint as a straight chord between the
facing endpoints, so at angle 0 every chord is exactly 2 r.

A flexion joint moves all of its cables identically in the lateral
direction (chord length is y-invariant), and the deviation joint is
x-invariant; that is what allows the flexor-ulnar cable to be paired
with the extensor-radial one on a single motor.

In-link cable runs are pose-independent constants: the straight channel
between two consecutive joints spans l - r_prox - r_dist along the link.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (InvalidGeometryError, RomViolationError,
                     UnknownPairError, UnknownTendonError)
from .geometry import (CABLE_DIAMETER_MM, FingerModel, JointAxis,
                       JointGeometry)
from .kinematics import JOINT_ANGLE_SIGN, _batch_rot


class DorsopalmarSide(Enum):
    """Which side of the joint centreline a hole sits on (x direction)."""

    FLEXOR = -1.0    # palmar
    EXTENSOR = +1.0  # dorsal


class LateralSide(Enum):
    """Lateral hole position (y direction)."""

    RADIAL = +1.0
    ULNAR = -1.0
    CENTER = 0.0


@dataclass(frozen=True)
class CableHole:
    """A hole in the z = 0 plane of a circle-centre frame."""

    side: DorsopalmarSide
    lateral: LateralSide = LateralSide.CENTER

    def position(self, joint: JointGeometry,
                 cable_diameter: float = CABLE_DIAMETER_MM) -> np.ndarray:
        """Chord endpoint in the owning circle-centre frame, mm."""
        x_off = chord_offset(joint.flex_hole_spacing, cable_diameter)
        y_off = chord_offset(joint.lateral_hole_spacing, cable_diameter)
        return np.array([self.side.value * x_off,
                         self.lateral.value * y_off,
                         0.0])


def chord_offset(spacing: float, cable_diameter: float = CABLE_DIAMETER_MM) -> float:
    """Per-side chord-endpoint offset for a full hole spacing."""
    off = (spacing - cable_diameter) / 2.0
    if off <= 0:
        raise InvalidGeometryError(
            f"hole spacing {spacing} mm too small for cable diameter "
            f"{cable_diameter} mm")
    return off


def _chord_scalar(axis: JointAxis, radius: float, hole, angle_deg: float) -> float:
    """Chord |Roll(a) . h - h| for one joint angle (signed convention).

    Unrolled half-rotation / 2r-offset / half-rotation application; the
    scalar twin of the batched path below.
    """
    half = np.deg2rad(JOINT_ANGLE_SIGN * angle_deg) / 2.0
    c, s = np.cos(half), np.sin(half)
    hx, hy, hz = float(hole[0]), float(hole[1]), float(hole[2])
    if axis is JointAxis.DEVIATION:     # rotation about x
        y1 = c * hy - s * hz
        z1 = s * hy + c * hz + 2.0 * radius
        mx = hx
        my = c * y1 - s * z1
        mz = s * y1 + c * z1
    else:                               # rotation about y
        x1 = c * hx + s * hz
        z1 = -s * hx + c * hz + 2.0 * radius
        mx = c * x1 + s * z1
        my = hy
        mz = -s * x1 + c * z1
    dx, dy, dz = mx - hx, my - hy, mz - hz
    return float(np.sqrt(dx * dx + dy * dy + dz * dz))


def _chord_lengths(axis: JointAxis, radius: float, hole: np.ndarray,
                   angles_deg: np.ndarray) -> np.ndarray:
    """Chord |Roll(a) . h - h| for a batch of joint angles (signed convention)."""
    arr = np.atleast_1d(np.asarray(angles_deg, dtype=float))
    if arr.size == 1:
        return np.array([_chord_scalar(axis, radius, hole, float(arr[0]))])
    angs = np.deg2rad(JOINT_ANGLE_SIGN * arr)
    half = _batch_rot(axis, angs / 2.0)
    step = np.array([0.0, 0.0, 2.0 * radius])
    # Roll(a) . h = R(a/2) (R(a/2) h + step)
    moved = np.einsum("nij,j->ni", half, hole)
    moved = np.einsum("nij,nj->ni", half, moved + step)
    return np.linalg.norm(moved - hole, axis=1)


def joint_cable_length(joint: JointGeometry, angle_deg: Union[float, np.ndarray],
                       hole: CableHole, radius: Optional[float] = None,
                       cable_diameter: float = CABLE_DIAMETER_MM,
                       strict: bool = True) -> Union[float, np.ndarray]:
    """Straight-chord cable length across one joint, mm.

    Args:
        joint: joint geometry (its radius is used unless overridden)
        angle_deg: joint angle, scalar or array
        hole: which hole the cable passes through
        radius: optional rolling-radius override (radius studies)
        cable_diameter: wire diameter for the bearing-line inset
        strict: raise RomViolationError when the angle leaves the ROM

    At angle 0 the result is exactly 2 r.
    """
    arr = np.atleast_1d(np.asarray(angle_deg, dtype=float))
    if strict:
        bad = (arr < joint.rom[0] - 1e-9) | (arr > joint.rom[1] + 1e-9)
        if np.any(bad):
            worst = float(arr[bad][0])
            raise RomViolationError(
                f"angle {worst:g} deg outside ROM [{joint.rom[0]:g}, "
                f"{joint.rom[1]:g}]",
                [(None, worst, joint.rom[0], joint.rom[1])])
    r = joint.radius if radius is None else float(radius)
    lengths = _chord_lengths(joint.axis, r,
                             hole.position(joint, cable_diameter), arr)
    if np.isscalar(angle_deg) or np.asarray(angle_deg).ndim == 0:
        return float(lengths[0])
    return lengths


def cable_deviation(joint: JointGeometry, angle_deg: Union[float, np.ndarray],
                    radius: Optional[float] = None,
                    cable_diameter: float = CABLE_DIAMETER_MM,
                    strict: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Length change of the joint's two antagonistic sides vs angle 0.

    For flexion joints the sides are (flexor, extensor); for the
    deviation joint they are (radial, ulnar) at the lateral offsets.
    Returned in that order; the first side shortens for positive angles.
    """
    if joint.axis is JointAxis.FLEXION:
        holes = (CableHole(DorsopalmarSide.FLEXOR),
                 CableHole(DorsopalmarSide.EXTENSOR))
    else:
        holes = (CableHole(DorsopalmarSide.FLEXOR, LateralSide.RADIAL),
                 CableHole(DorsopalmarSide.FLEXOR, LateralSide.ULNAR))
    r = joint.radius if radius is None else float(radius)
    out = []
    for hole in holes:
        lengths = joint_cable_length(joint, angle_deg, hole, radius=r,
                                     cable_diameter=cable_diameter,
                                     strict=strict)
        out.append(lengths - 2.0 * r)
    return out[0], out[1]


@dataclass(frozen=True)
class Tendon:
    """One cable: which holes it uses, which joints it crosses, where it ends."""

    name: str
    side: DorsopalmarSide
    lateral: LateralSide
    joints: Tuple[int, ...]     # traversed joint indices, proximal to distal
    anchor_link: int

    def hole(self) -> CableHole:
        return CableHole(self.side, self.lateral)


@dataclass(frozen=True)
class AntagonisticPair:
    """Two tendons wound on one motor in opposite directions."""

    name: str
    members: Tuple[str, str]    # (shortening-on-flexion member first)


@dataclass(frozen=True)
class TendonRoutingPlan:
    tendons: Tuple[Tendon, ...]
    pairs: Tuple[AntagonisticPair, ...]

    def tendon(self, name: str) -> Tendon:
        for t in self.tendons:
            if t.name == name:
                return t
        raise UnknownTendonError(f"unknown tendon {name!r}; have "
                                 f"{[t.name for t in self.tendons]}")

    def pair(self, name: str) -> AntagonisticPair:
        for p in self.pairs:
            if p.name == name:
                return p
        raise UnknownPairError(f"unknown pair {name!r}; have "
                               f"{[p.name for p in self.pairs]}")

    def pair_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.pairs)

    def tendon_names(self) -> Tuple[str, ...]:
        return tuple(t.name for t in self.tendons)


def build_routing_plan(finger: FingerModel) -> TendonRoutingPlan:
    """Routing and pairing for one finger.

    finger kind: four base cables cross the two basal joints and anchor
    on the proximal phalanx; the distal flexor/extensor pair crosses PIP
    and DIP and anchors on the distal phalanx.
    thumb kind: the base cables additionally cross the MCP flexion joint
    (underactuating the two basal flexion DOFs) and anchor on the
    proximal phalanx; the IP pair is independent.
    """
    if finger.kind == "thumb":
        base_joints, base_anchor = (0, 1, 2), 2
        distal_joints, distal_anchor = (3,), 3
    else:
        base_joints, base_anchor = (0, 1), 1
        distal_joints, distal_anchor = (2, 3), 3
    tendons = (
        Tendon("base-flexor-radial", DorsopalmarSide.FLEXOR, LateralSide.RADIAL,
               base_joints, base_anchor),
        Tendon("base-flexor-ulnar", DorsopalmarSide.FLEXOR, LateralSide.ULNAR,
               base_joints, base_anchor),
        Tendon("base-extensor-radial", DorsopalmarSide.EXTENSOR,
               LateralSide.RADIAL, base_joints, base_anchor),
        Tendon("base-extensor-ulnar", DorsopalmarSide.EXTENSOR,
               LateralSide.ULNAR, base_joints, base_anchor),
        Tendon("distal-flexor", DorsopalmarSide.FLEXOR, LateralSide.CENTER,
               distal_joints, distal_anchor),
        Tendon("distal-extensor", DorsopalmarSide.EXTENSOR, LateralSide.CENTER,
               distal_joints, distal_anchor),
    )
    # a flexion joint moves radial and ulnar cables identically, the
    # deviation joint moves flexors and extensors identically, so the
    # only pairings with near-zero summed length change are cross-lateral
    pairs = (
        AntagonisticPair("base-a", ("base-flexor-ulnar", "base-extensor-radial")),
        AntagonisticPair("base-b", ("base-flexor-radial", "base-extensor-ulnar")),
        AntagonisticPair("distal", ("distal-flexor", "distal-extensor")),
    )
    return TendonRoutingPlan(tendons, pairs)


def in_link_constant(finger: FingerModel, tendon: Tendon) -> float:
    """Pose-independent cable run inside the links between traversed joints."""
    total = 0.0
    for j in tendon.joints[:-1]:
        total += (finger.links[j].length - finger.joints[j].radius
                  - finger.joints[j + 1].radius)
    return total


def tendon_length(finger: FingerModel, angles: Sequence[float],
                  tendon: Union[str, Tendon],
                  strict: bool = True) -> float:
    """Total modelled length of one tendon at the given joint angles, mm."""
    if isinstance(tendon, str):
        tendon = finger.routing.tendon(tendon)
    arr = np.asarray(angles, dtype=float).reshape(4)
    hole = tendon.hole()
    total = in_link_constant(finger, tendon)
    for j in tendon.joints:
        total += joint_cable_length(finger.joints[j], arr[j], hole,
                                    cable_diameter=finger.cable_diameter,
                                    strict=strict)
    return float(total)


def tendon_deviation(finger: FingerModel, angles: Sequence[float],
                     tendon: Union[str, Tendon],
                     strict: bool = True) -> float:
    """Length change vs the zero pose (positive = longer)."""
    if isinstance(tendon, str):
        tendon = finger.routing.tendon(tendon)
    zero = 2.0 * sum(finger.joints[j].radius for j in tendon.joints) \
        + in_link_constant(finger, tendon)
    return tendon_length(finger, angles, tendon, strict=strict) - zero


def paired_deviation(finger: FingerModel, angles: Sequence[float],
                     pair: Union[str, AntagonisticPair],
                     strict: bool = True) -> float:
    """Summed length change of an antagonistic pair (the single-motor error)."""
    if isinstance(pair, str):
        pair = finger.routing.pair(pair)
    return sum(tendon_deviation(finger, angles, m, strict=strict)
               for m in pair.members)


def cable_state(finger: FingerModel, angles: Sequence[float],
                strict: bool = True) -> Dict[str, Tuple[float, float]]:
    """Per-tendon (total length, deviation from zero pose), mm."""
    state = {}
    for t in finger.routing.tendons:
        length = tendon_length(finger, angles, t, strict=strict)
        zero = 2.0 * sum(finger.joints[j].radius for j in t.joints) \
            + in_link_constant(finger, t)
        state[t.name] = (length, length - zero)
    return state
