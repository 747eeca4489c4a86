"""Hand configuration documents: load, validate, save.

The configuration is a single human-editable YAML file with fixed units
(millimetres, degrees, seconds) encoded in the key names.  Unknown keys
are rejected so typos fail loudly.  The shipped default document
(data/default_hand.yaml) carries the desk-scale anthropomorphic
parameter set and authored palm placements plus the pose preset catalog.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
import yaml

from .actuation import ActuatorConfig, CouplingRule
from .errors import ConfigError, InvalidGeometryError, RomViolationError
from .geometry import (FINGER_ORDER, FingerModel, HandModel, JointAxis,
                       JointGeometry, LinkGeometry, Pose)
from .transforms import RigidTransform

CONFIG_VERSION = 1

_JOINT_KEYS = {"axis", "radius_mm", "flex_hole_spacing_mm",
               "lateral_hole_spacing_mm", "surface_half_angle_deg", "rom_deg"}
_LINK_KEYS = {"length_mm", "width_mm", "thickness_mm", "tip_offset_mm"}
_FINGER_KEYS = {"kind", "joints", "links"}
_PLACEMENT_KEYS = {"translation_mm", "rotation_axis", "rotation_deg"}
_ACTUATION_KEYS = {"bobbin_radius_mm", "coupling_ratio"}
_TOP_KEYS = {"version", "cable_diameter_mm", "thumb_length_mm", "fingers",
             "placements", "actuation", "presets"}


@dataclass(frozen=True)
class LoadedConfig:
    """Everything a pipeline needs, parsed and validated."""

    hand: HandModel
    actuator: ActuatorConfig
    presets: Dict[str, Pose]
    source: Optional[Path]
    sha256: str

    def preset(self, name: str) -> Pose:
        from .actuation import preset_pose
        return preset_pose(self.presets, name)


def default_config_path() -> Path:
    with resources.as_file(
            resources.files("rcjhand").joinpath("data/default_hand.yaml")) as p:
        return Path(p)


def _require_keys(mapping, allowed, required, context):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{context}: expected a mapping, got "
                          f"{type(mapping).__name__}", key=context)
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown key(s) {sorted(unknown)}",
                          key=f"{context}.{sorted(unknown)[0]}")
    missing = required - set(mapping)
    if missing:
        raise ConfigError(f"{context}: missing key(s) {sorted(missing)}",
                          key=f"{context}.{sorted(missing)[0]}")


def _number(value, context):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context}: expected a number, got {value!r}",
                          key=context)
    return float(value)


def _parse_joint(doc, context) -> JointGeometry:
    _require_keys(doc, _JOINT_KEYS, _JOINT_KEYS, context)
    axis_name = doc["axis"]
    try:
        axis = JointAxis(axis_name)
    except ValueError:
        raise ConfigError(f"{context}.axis: must be 'flexion' or 'deviation', "
                          f"got {axis_name!r}", key=f"{context}.axis") from None
    rom = doc["rom_deg"]
    if not isinstance(rom, (list, tuple)) or len(rom) != 2:
        raise ConfigError(f"{context}.rom_deg: expected [min, max]",
                          key=f"{context}.rom_deg")
    return JointGeometry(
        radius=_number(doc["radius_mm"], f"{context}.radius_mm"),
        flex_hole_spacing=_number(doc["flex_hole_spacing_mm"],
                                  f"{context}.flex_hole_spacing_mm"),
        lateral_hole_spacing=_number(doc["lateral_hole_spacing_mm"],
                                     f"{context}.lateral_hole_spacing_mm"),
        surface_half_angle=_number(doc["surface_half_angle_deg"],
                                   f"{context}.surface_half_angle_deg"),
        axis=axis,
        rom=(_number(rom[0], f"{context}.rom_deg[0]"),
             _number(rom[1], f"{context}.rom_deg[1]")),
    )


def _parse_link(doc, context) -> LinkGeometry:
    _require_keys(doc, _LINK_KEYS, {"length_mm"}, context)
    opt = {}
    for key, attr in (("width_mm", "width"), ("thickness_mm", "thickness"),
                      ("tip_offset_mm", "tip_offset")):
        if key in doc and doc[key] is not None:
            opt[attr] = _number(doc[key], f"{context}.{key}")
    return LinkGeometry(length=_number(doc["length_mm"],
                                       f"{context}.length_mm"), **opt)


def _parse_finger(doc, context, cable_diameter) -> FingerModel:
    _require_keys(doc, _FINGER_KEYS, _FINGER_KEYS, context)
    joints = doc["joints"]
    links = doc["links"]
    if not isinstance(joints, list) or len(joints) != 4:
        raise ConfigError(f"{context}.joints: expected 4 entries",
                          key=f"{context}.joints")
    if not isinstance(links, list) or len(links) != 4:
        raise ConfigError(f"{context}.links: expected 4 entries",
                          key=f"{context}.links")
    return FingerModel(
        kind=doc["kind"],
        joints=tuple(_parse_joint(j, f"{context}.joints[{i}]")
                     for i, j in enumerate(joints)),
        links=tuple(_parse_link(l, f"{context}.links[{i}]")
                    for i, l in enumerate(links)),
        cable_diameter=cable_diameter,
    )


def _parse_placement(doc, context) -> RigidTransform:
    _require_keys(doc, _PLACEMENT_KEYS, _PLACEMENT_KEYS, context)
    tr = doc["translation_mm"]
    axis = doc["rotation_axis"]
    for name, vec in (("translation_mm", tr), ("rotation_axis", axis)):
        if not isinstance(vec, (list, tuple)) or len(vec) != 3:
            raise ConfigError(f"{context}.{name}: expected [x, y, z]",
                              key=f"{context}.{name}")
    angle = _number(doc["rotation_deg"], f"{context}.rotation_deg")
    axis = [_number(v, f"{context}.rotation_axis") for v in axis]
    if angle != 0.0 and float(np.linalg.norm(axis)) == 0.0:
        raise ConfigError(f"{context}.rotation_axis: zero axis with nonzero "
                          "angle", key=f"{context}.rotation_axis")
    return RigidTransform.from_axis_angle(
        axis, angle, [_number(v, f"{context}.translation_mm") for v in tr])


def _parse_presets(doc, hand: HandModel, context) -> Dict[str, Pose]:
    if not isinstance(doc, dict):
        raise ConfigError(f"{context}: expected a mapping", key=context)
    presets = {}
    for name, entry in doc.items():
        pctx = f"{context}.{name}"
        _require_keys(entry, set(FINGER_ORDER), set(FINGER_ORDER), pctx)
        angles = {}
        for finger in FINGER_ORDER:
            vals = entry[finger]
            if not isinstance(vals, (list, tuple)) or len(vals) != 4:
                raise ConfigError(f"{pctx}.{finger}: expected 4 angles",
                                  key=f"{pctx}.{finger}")
            angles[finger] = tuple(_number(v, f"{pctx}.{finger}") for v in vals)
        pose = Pose(angles)
        try:
            hand.validate_pose(pose, mode="strict")
        except RomViolationError as exc:
            raise ConfigError(f"{pctx}: preset outside ROM: {exc}",
                              key=pctx) from exc
        presets[name] = pose
    return presets


def load_config(path) -> LoadedConfig:
    """Parse and fully validate a hand configuration document."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=path)


def parse_config(text: str, source: Optional[Path] = None) -> LoadedConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1})" if mark else ""
        raise ConfigError(f"config parse error{where}: {exc}") from exc
    _require_keys(doc, _TOP_KEYS,
                  {"version", "fingers", "placements", "actuation", "presets"},
                  "config")
    if doc["version"] != CONFIG_VERSION:
        raise ConfigError(f"config.version: expected {CONFIG_VERSION}, "
                          f"got {doc['version']!r}", key="config.version")
    cable_diameter = _number(doc.get("cable_diameter_mm", 0.75),
                             "config.cable_diameter_mm")

    fingers_doc = doc["fingers"]
    _require_keys(fingers_doc, set(FINGER_ORDER), set(FINGER_ORDER),
                  "config.fingers")
    fingers = {name: _parse_finger(fingers_doc[name],
                                   f"config.fingers.{name}", cable_diameter)
               for name in FINGER_ORDER}
    # force routing-plan construction so hole/cable constraints surface now
    for name, finger in fingers.items():
        _ = finger.routing

    placements_doc = doc["placements"]
    _require_keys(placements_doc, set(FINGER_ORDER), set(FINGER_ORDER),
                  "config.placements")
    placements = {name: _parse_placement(placements_doc[name],
                                         f"config.placements.{name}")
                  for name in FINGER_ORDER}

    thumb_length = None
    if doc.get("thumb_length_mm") is not None:
        thumb_length = _number(doc["thumb_length_mm"], "config.thumb_length_mm")
    hand = HandModel(fingers, placements, thumb_length)

    act_doc = doc["actuation"]
    _require_keys(act_doc, _ACTUATION_KEYS, _ACTUATION_KEYS, "config.actuation")
    actuator = ActuatorConfig(
        bobbin_radius=_number(act_doc["bobbin_radius_mm"],
                              "config.actuation.bobbin_radius_mm"),
        coupling=CouplingRule(_number(act_doc["coupling_ratio"],
                                      "config.actuation.coupling_ratio")))

    presets = _parse_presets(doc["presets"], hand, "config.presets")
    sha = hashlib.sha256(text.encode()).hexdigest()
    return LoadedConfig(hand, actuator, presets, source, sha)


def load_default() -> LoadedConfig:
    return load_config(default_config_path())


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _joint_doc(j: JointGeometry) -> Dict:
    return {
        "axis": j.axis.value,
        "radius_mm": j.radius,
        "flex_hole_spacing_mm": j.flex_hole_spacing,
        "lateral_hole_spacing_mm": j.lateral_hole_spacing,
        "surface_half_angle_deg": j.surface_half_angle,
        "rom_deg": [j.rom[0], j.rom[1]],
    }


def _link_doc(l: LinkGeometry) -> Dict:
    out = {"length_mm": l.length}
    if l.width is not None:
        out["width_mm"] = l.width
    if l.thickness is not None:
        out["thickness_mm"] = l.thickness
    if l.tip_offset is not None:
        out["tip_offset_mm"] = l.tip_offset
    return out


def config_document(hand: HandModel, actuator: ActuatorConfig,
                    presets: Dict[str, Pose]) -> Dict:
    placements = {}
    for name in FINGER_ORDER:
        tf = hand.placements[name]
        axis, angle = tf.axis_angle()
        placements[name] = {
            "translation_mm": [float(v) for v in tf.translation],
            "rotation_axis": [float(v) for v in axis],
            "rotation_deg": float(angle),
        }
    return {
        "version": CONFIG_VERSION,
        "cable_diameter_mm": hand.fingers["thumb"].cable_diameter,
        "thumb_length_mm": hand.thumb_length,
        "fingers": {
            name: {
                "kind": f.kind,
                "joints": [_joint_doc(j) for j in f.joints],
                "links": [_link_doc(l) for l in f.links],
            }
            for name, f in ((n, hand.fingers[n]) for n in FINGER_ORDER)
        },
        "placements": placements,
        "actuation": {
            "bobbin_radius_mm": actuator.bobbin_radius,
            "coupling_ratio": actuator.coupling.ratio,
        },
        "presets": {
            name: {finger: list(pose.joint_angles[finger])
                   for finger in FINGER_ORDER}
            for name, pose in presets.items()
        },
    }


def save_config(hand: HandModel, actuator: ActuatorConfig,
                presets: Dict[str, Pose], path) -> None:
    doc = config_document(hand, actuator, presets)
    Path(path).write_text(yaml.safe_dump(doc, sort_keys=False,
                                         default_flow_style=None))
