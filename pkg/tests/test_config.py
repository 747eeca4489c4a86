import numpy as np
import pytest
import yaml

from rcjhand import (ConfigError, InvalidGeometryError, default_config_path,
                     load_config, parse_config, save_config)
from rcjhand.geometry import FINGER_ORDER, JointAxis

TABLE_INDEX = {
    "lengths": [15.5, 42.5, 24.5, 24.5],
    "lateral": [7.5, 7.5, 6.5, 6.0],
    "flex": [9.5, 12.7, 8.7, 8.2],
    "half_angles": [15.0, 50.0, 50.0, 50.0],
    "radii": [1.9, 4.9, 3.3, 3.1],
}
TABLE_THUMB = {
    "lengths": [16.0, 35.0, 27.5, 27.5],
    "lateral": [9.5, 9.5, 8.2, 7.5],
    "flex": [9.1, 11.7, 10.2, 8.7],
    "half_angles": [22.5, 50.0, 50.0, 50.0],
    "radii": [3.4, 4.5, 3.9, 3.3],
}


def _doc():
    return yaml.safe_load(default_config_path().read_text())


def test_defaults_reproduce_design_table(hand):
    for name, table in (("index", TABLE_INDEX), ("middle", TABLE_INDEX),
                        ("ring", TABLE_INDEX), ("little", TABLE_INDEX),
                        ("thumb", TABLE_THUMB)):
        finger = hand.finger(name)
        assert [l.length for l in finger.links] == table["lengths"]
        assert [j.lateral_hole_spacing for j in finger.joints] == \
            table["lateral"]
        assert [j.flex_hole_spacing for j in finger.joints] == table["flex"]
        assert [j.surface_half_angle for j in finger.joints] == \
            table["half_angles"]
        assert [j.radius for j in finger.joints] == table["radii"]


def test_defaults_reproduce_rom_table(hand):
    assert hand.finger("thumb").joints[0].rom == (-45.0, 45.0)
    for name in ("index", "middle", "ring", "little"):
        finger = hand.finger(name)
        assert finger.joints[0].rom == (-30.0, 30.0)
        for joint in finger.joints[1:]:
            assert joint.rom == (0.0, 100.0)


def test_default_metadata(hand, cfg):
    assert hand.thumb_length == 106.0
    assert hand.finger("thumb").total_length == pytest.approx(106.0)
    assert hand.fingers["thumb"].cable_diameter == 0.75
    assert cfg.actuator.bobbin_radius == 5.0
    assert cfg.actuator.coupling.ratio == 1.0
    assert hand.finger("index").joints[0].axis is JointAxis.DEVIATION


def test_roundtrip_preserves_model(tmp_path, cfg):
    path = tmp_path / "out.yaml"
    save_config(cfg.hand, cfg.actuator, cfg.presets, path)
    again = load_config(path)
    for name in FINGER_ORDER:
        a, b = cfg.hand.fingers[name], again.hand.fingers[name]
        assert a.kind == b.kind
        for ja, jb in zip(a.joints, b.joints):
            assert ja == jb
        for la, lb in zip(a.links, b.links):
            assert la == lb
        pa, pb = cfg.hand.placements[name], again.hand.placements[name]
        assert np.allclose(pa.rotation, pb.rotation, atol=1e-9)
        assert np.allclose(pa.translation, pb.translation, atol=1e-9)
    assert again.hand.thumb_length == cfg.hand.thumb_length
    assert again.actuator == cfg.actuator
    assert set(again.presets) == set(cfg.presets)
    for name in cfg.presets:
        assert again.presets[name].joint_angles == \
            cfg.presets[name].joint_angles


def test_negative_radius_names_invariant(tmp_path):
    doc = _doc()
    doc["fingers"]["index"]["joints"][1]["radius_mm"] = -1.0
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(doc))
    with pytest.raises(InvalidGeometryError, match="r > 0"):
        load_config(path)


def test_rom_surface_angle_cross_check(tmp_path):
    doc = _doc()
    doc["fingers"]["index"]["joints"][1]["rom_deg"] = [0, 90]
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(doc))
    with pytest.raises(InvalidGeometryError, match="twice the surface"):
        load_config(path)


def test_unknown_key_rejected(tmp_path):
    doc = _doc()
    doc["fingers"]["index"]["joints"][0]["bogus_key"] = 1.0
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(doc))
    with pytest.raises(ConfigError, match="bogus_key"):
        load_config(path)


def test_unknown_top_level_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(default_config_path().read_text()
                     + "\nsurprise: 1\n")


def test_parse_error_reports_line():
    with pytest.raises(ConfigError, match="parse error"):
        parse_config("fingers: [unclosed")


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/path.yaml")


def test_preset_outside_rom_rejected(tmp_path):
    doc = _doc()
    doc["presets"]["open"]["index"] = [0, 120, 0, 0]
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(doc))
    with pytest.raises(ConfigError, match="outside ROM"):
        load_config(path)


def test_binary_document_rejected(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_bytes(b"\x00\x01\x02binary")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_hash_stable(cfg):
    text = default_config_path().read_text()
    assert parse_config(text).sha256 == cfg.sha256
