"""Parametric model of rolling-contact-joint fingers and the full hand.

Conventions (per-finger frames):
  +z  distal, along the straight finger axis
  +x  dorsal (back of the finger); the palmar side is -x
  +y  completes the right-handed frame (lateral)

Each finger is a chain of four rolling-contact joints: joint 0 is the
radial-ulnar deviation joint (rotation about x), joints 1-3 are
flexion-extension joints (rotation about y).  A joint is two equal
circles of radius r rolling on each other, so a joint angle splits into
half a rotation per circle with a 2r longitudinal offset between the
circle centres.

Hole spacing semantics: ``flex_hole_spacing`` is the full dorsopalmar
distance between the flexor and extensor cable holes (holes sit at
+-spacing/2 from the joint centreline); ``lateral_hole_spacing`` is the
full distance between the radial and ulnar holes.  See cables.py for how
chord endpoints are derived from these.

Angles are degrees at every API boundary; lengths are millimetres.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidGeometryError, RomViolationError
from .transforms import GEOM_TOL, RigidTransform

FINGER_ORDER = ("thumb", "index", "middle", "ring", "little")

JOINT_COUNT = 4

# Default tension-wire diameter, mm.  Chord endpoints are inset from the
# nominal hole offsets by half this value (bearing-line correction).
CABLE_DIAMETER_MM = 0.75


class JointAxis(Enum):
    """Rotation axis of a rolling joint in its local frame."""

    FLEXION = "flexion"      # rotation about y; positive angle bends palmar (-x)
    DEVIATION = "deviation"  # rotation about x; positive angle deviates toward -y


@dataclass(frozen=True)
class JointGeometry:
    """Rolling-joint design parameters.

    Attributes:
        radius: rolling-circle radius r, mm
        flex_hole_spacing: full flexor-to-extensor hole distance, mm
        lateral_hole_spacing: full radial-to-ulnar hole distance, mm
        surface_half_angle: degrees; for flexion joints this is half the
            ROM span (angle between the link's rolling surfaces), for the
            deviation joint it is a quarter of the ROM span
        axis: JointAxis
        rom: (min, max) joint angle, degrees
    """

    radius: float
    flex_hole_spacing: float
    lateral_hole_spacing: float
    surface_half_angle: float
    axis: JointAxis
    rom: Tuple[float, float]

    def __post_init__(self):
        r = float(self.radius)
        if r <= 0:
            raise InvalidGeometryError(f"r > 0 violated: radius = {r}")
        if self.flex_hole_spacing <= 0:
            raise InvalidGeometryError(
                f"flex hole spacing > 0 violated: {self.flex_hole_spacing}")
        if self.lateral_hole_spacing <= 0:
            raise InvalidGeometryError(
                f"lateral hole spacing > 0 violated: {self.lateral_hole_spacing}")
        if r >= self.flex_hole_spacing:
            raise InvalidGeometryError(
                f"hole must lie outside rolling circle: r = {r} >= "
                f"flex hole spacing {self.flex_hole_spacing}")
        lo, hi = (float(self.rom[0]), float(self.rom[1]))
        object.__setattr__(self, "rom", (lo, hi))
        if hi < lo:
            raise InvalidGeometryError(f"empty ROM [{lo}, {hi}]")
        span = hi - lo
        if self.axis is JointAxis.FLEXION:
            if abs(span - 2.0 * self.surface_half_angle) > 1e-6:
                raise InvalidGeometryError(
                    "flexion ROM span must equal twice the surface half-angle: "
                    f"span {span} deg vs 2 x {self.surface_half_angle} deg")
        else:
            if abs(span - 4.0 * self.surface_half_angle) > 1e-6:
                raise InvalidGeometryError(
                    "deviation ROM span must equal four times the surface "
                    f"half-angle: span {span} deg vs 4 x {self.surface_half_angle} deg")
            if abs(lo + hi) > 1e-6:
                raise InvalidGeometryError(
                    f"deviation ROM must be symmetric about zero, got [{lo}, {hi}]")

    @property
    def rom_span(self) -> float:
        return self.rom[1] - self.rom[0]

    def clamp(self, angle_deg: float) -> float:
        return float(min(max(angle_deg, self.rom[0]), self.rom[1]))

    def contains(self, angle_deg: float, tol: float = 1e-9) -> bool:
        return self.rom[0] - tol <= angle_deg <= self.rom[1] + tol


@dataclass(frozen=True)
class LinkGeometry:
    """Phalanx (or knuckle) dimensions.

    ``width`` / ``thickness`` are the octagonal profile dimensions; they
    define solid geometry only and are unused by the kinematics.
    ``tip_offset`` applies to the distal phalanx; when None the tip point
    defaults to length - distal joint radius along the link axis.
    """

    length: float
    width: Optional[float] = None
    thickness: Optional[float] = None
    tip_offset: Optional[float] = None

    def __post_init__(self):
        if self.length <= 0:
            raise InvalidGeometryError(f"link length > 0 violated: {self.length}")
        for name in ("width", "thickness"):
            val = getattr(self, name)
            if val is not None and val <= 0:
                raise InvalidGeometryError(f"link {name} > 0 violated: {val}")


@dataclass(frozen=True)
class FingerModel:
    """One finger: four joints, four links, and a tendon routing plan.

    kind "thumb": the four base cables run through the metacarpal and
    anchor on the proximal phalanx (link 2), coupling the two basal
    flexion joints; the interphalangeal pair is independent.
    kind "finger": the base cables anchor on the proximal phalanx
    (link 1); the distal flexor/extensor pair crosses PIP and DIP and
    anchors on the distal phalanx.
    """

    kind: str
    joints: Tuple[JointGeometry, ...]
    links: Tuple[LinkGeometry, ...]
    cable_diameter: float = CABLE_DIAMETER_MM

    def __post_init__(self):
        if self.kind not in ("thumb", "finger"):
            raise InvalidGeometryError(f"unknown finger kind {self.kind!r}")
        joints = tuple(self.joints)
        links = tuple(self.links)
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "links", links)
        if len(joints) != JOINT_COUNT or len(links) != JOINT_COUNT:
            raise InvalidGeometryError(
                f"finger needs {JOINT_COUNT} joints and {JOINT_COUNT} links")
        if joints[0].axis is not JointAxis.DEVIATION:
            raise InvalidGeometryError("joint 0 must be the deviation joint")
        for i in (1, 2, 3):
            if joints[i].axis is not JointAxis.FLEXION:
                raise InvalidGeometryError(f"joint {i} must be a flexion joint")
        if self.cable_diameter < 0:
            raise InvalidGeometryError("cable diameter must be >= 0")
        # interior links span two rolling circles; the chain degenerates
        # unless the circle centres stay separated
        for i in range(3):
            gap = links[i].length - joints[i].radius - joints[i + 1].radius
            if gap <= 0:
                raise InvalidGeometryError(
                    f"link {i} too short: l = {links[i].length} <= "
                    f"r{i} + r{i + 1} = {joints[i].radius + joints[i + 1].radius}")
        if links[3].length - joints[3].radius <= 0:
            raise InvalidGeometryError("distal link shorter than its joint radius")
        for name in ("width", "thickness"):
            vals = [getattr(l, name) for l in links]
            present = [v for v in vals if v is not None]
            if len(present) == len(vals):
                for i in range(3):
                    if vals[i + 1] > vals[i] + GEOM_TOL:
                        raise InvalidGeometryError(
                            f"link {name}s must taper distally: "
                            f"{name}[{i + 1}] = {vals[i + 1]} > {name}[{i}] = {vals[i]}")

    @cached_property
    def routing(self):
        from .cables import build_routing_plan
        return build_routing_plan(self)

    @property
    def rom_lo(self) -> np.ndarray:
        return np.array([j.rom[0] for j in self.joints])

    @property
    def rom_hi(self) -> np.ndarray:
        return np.array([j.rom[1] for j in self.joints])

    @property
    def total_length(self) -> float:
        return float(sum(l.length for l in self.links))

    def tip_offset(self) -> float:
        """Tip point distance from the distal joint centre along the link axis."""
        distal = self.links[3]
        if distal.tip_offset is not None:
            return distal.tip_offset
        return distal.length - self.joints[3].radius


def validate_rom(finger: FingerModel, angles: Sequence[float],
                 mode: str = "strict") -> np.ndarray:
    """Check (or clamp) a 4-vector of joint angles against the finger's ROM.

    Args:
        finger: the finger model
        angles: (deviation, flex1, flex2, flex3) in degrees
        mode: "strict" raises RomViolationError listing offenders,
              "clamp" saturates to [rom_min, rom_max]

    Returns:
        the validated (possibly clamped) angles as a float array
    """
    if mode not in ("strict", "clamp"):
        raise ValueError(f"unknown ROM mode {mode!r}")
    arr = np.asarray(angles, dtype=float).reshape(JOINT_COUNT)
    if mode == "clamp":
        return np.clip(arr, finger.rom_lo, finger.rom_hi)
    offenders = []
    for i, joint in enumerate(finger.joints):
        if not joint.contains(arr[i]):
            offenders.append((i, float(arr[i]), joint.rom[0], joint.rom[1]))
    if offenders:
        detail = "; ".join(
            f"joint {i}: {a:g} deg outside [{lo:g}, {hi:g}]"
            for i, a, lo, hi in offenders)
        raise RomViolationError(f"ROM violation: {detail}", offenders)
    return arr


@dataclass(frozen=True)
class Pose:
    """Joint angles for the whole hand, degrees.

    ``joint_angles`` maps finger name to (deviation, flex1, flex2, flex3).
    """

    joint_angles: Dict[str, Tuple[float, float, float, float]]

    def __post_init__(self):
        clean = {}
        for name, vals in self.joint_angles.items():
            if name not in FINGER_ORDER:
                raise InvalidGeometryError(f"unknown finger {name!r} in pose")
            arr = tuple(float(v) for v in vals)
            if len(arr) != JOINT_COUNT:
                raise InvalidGeometryError(
                    f"pose for {name} needs {JOINT_COUNT} angles, got {len(arr)}")
            clean[name] = arr
        object.__setattr__(self, "joint_angles", clean)

    @staticmethod
    def zero(fingers: Sequence[str] = FINGER_ORDER) -> "Pose":
        return Pose({name: (0.0, 0.0, 0.0, 0.0) for name in fingers})

    def angles(self, finger: str) -> np.ndarray:
        try:
            return np.array(self.joint_angles[finger], dtype=float)
        except KeyError:
            raise InvalidGeometryError(f"pose has no finger {finger!r}") from None

    def fingers(self):
        return tuple(self.joint_angles.keys())

    def with_finger(self, name: str, angles: Sequence[float]) -> "Pose":
        updated = dict(self.joint_angles)
        updated[name] = tuple(float(v) for v in angles)
        return Pose(updated)


@dataclass(frozen=True)
class HandModel:
    """Five fingers plus their palm placements.

    ``placements`` maps finger name to the rigid transform from the palm
    frame to that finger's origin frame O.  ``thumb_length`` is the thumb
    length d used by the opposability index; it defaults to the summed
    thumb link lengths.
    """

    fingers: Dict[str, FingerModel]
    placements: Dict[str, RigidTransform]
    thumb_length: Optional[float] = None

    def __post_init__(self):
        missing = [n for n in FINGER_ORDER if n not in self.fingers]
        if missing:
            raise InvalidGeometryError(f"hand is missing fingers: {missing}")
        extra = [n for n in self.fingers if n not in FINGER_ORDER]
        if extra:
            raise InvalidGeometryError(f"unknown fingers: {extra}")
        for name in FINGER_ORDER:
            if name not in self.placements:
                raise InvalidGeometryError(f"missing placement for {name}")
            tf = self.placements[name]
            if not tf.is_rigid():
                raise InvalidGeometryError(f"placement for {name} is not rigid")
        if self.thumb_length is None:
            object.__setattr__(self, "thumb_length",
                               self.fingers["thumb"].total_length)
        elif self.thumb_length <= 0:
            raise InvalidGeometryError("thumb length must be positive")

    def finger(self, name: str) -> FingerModel:
        try:
            return self.fingers[name]
        except KeyError:
            raise InvalidGeometryError(f"unknown finger {name!r}") from None

    def zero_pose(self) -> Pose:
        return Pose.zero()

    def validate_pose(self, pose: Pose, mode: str = "strict") -> Pose:
        out = {}
        for name in pose.fingers():
            out[name] = tuple(validate_rom(self.finger(name),
                                           pose.angles(name), mode=mode))
        return Pose(out)

    def scaled(self, factor: float) -> "HandModel":
        """Uniformly scale every length (radii, spacings, links, placements)."""
        if factor <= 0:
            raise InvalidGeometryError("scale factor must be positive")
        fingers = {}
        for name, f in self.fingers.items():
            joints = tuple(
                JointGeometry(j.radius * factor, j.flex_hole_spacing * factor,
                              j.lateral_hole_spacing * factor,
                              j.surface_half_angle, j.axis, j.rom)
                for j in f.joints)
            links = tuple(
                LinkGeometry(l.length * factor,
                             None if l.width is None else l.width * factor,
                             None if l.thickness is None else l.thickness * factor,
                             None if l.tip_offset is None else l.tip_offset * factor)
                for l in f.links)
            fingers[name] = FingerModel(f.kind, joints, links,
                                        f.cable_diameter * factor)
        placements = {
            name: RigidTransform(tf.rotation, tf.translation * factor)
            for name, tf in self.placements.items()}
        return HandModel(fingers, placements, self.thumb_length * factor)
