import numpy as np
import pytest

from rcjhand import (ActuatorConfig, CouplingRule, CouplingViolationError,
                     MotorState, Pose, RomViolationError, UnknownPresetError,
                     UnreachablePayoutError, motor_to_pose, pose_to_motor,
                     preset_pose, validate_rom)
from rcjhand.actuation import motor_name
from rcjhand.cables import paired_deviation


def random_consistent_pose(hand, rng, ratio=1.0):
    angles = {}
    for name, finger in hand.fingers.items():
        lo, hi = finger.rom_lo, finger.rom_hi
        dev = rng.uniform(lo[0], hi[0])
        if finger.kind == "thumb":
            a = rng.uniform(lo[1], min(hi[1], hi[2] / ratio))
            b = rng.uniform(lo[3], hi[3])
            angles[name] = (dev, a, ratio * a, b)
        else:
            a = rng.uniform(lo[1], hi[1])
            b = rng.uniform(lo[2], min(hi[2], hi[3] / ratio))
            angles[name] = (dev, a, b, ratio * b)
    return Pose(angles)


def test_zero_pose_zero_motors(hand, cfg):
    state = pose_to_motor(hand, Pose.zero(), cfg.actuator)
    assert len(state.angles) == 15
    for value in state.angles.values():
        assert value == pytest.approx(0.0, abs=1e-12)


def test_pure_abduction_moves_base_motors_oppositely(hand, cfg):
    pose = Pose.zero().with_finger("index", (20.0, 0.0, 0.0, 0.0))
    state = pose_to_motor(hand, pose, cfg.actuator)
    a = state.angle(motor_name("index", "base-a"))
    b = state.angle(motor_name("index", "base-b"))
    assert a == pytest.approx(-b, abs=1e-12)
    assert abs(a) > 1e-3
    assert state.angle(motor_name("index", "distal")) == pytest.approx(0.0)
    for other in ("thumb", "middle", "ring", "little"):
        for pair in ("base-a", "base-b", "distal"):
            assert state.angle(motor_name(other, pair)) == pytest.approx(0.0)


def test_pure_basal_flexion_moves_base_motors_identically(hand, cfg):
    pose = Pose.zero().with_finger("index", (0.0, 70.0, 0.0, 0.0))
    state = pose_to_motor(hand, pose, cfg.actuator)
    a = state.angle(motor_name("index", "base-a"))
    b = state.angle(motor_name("index", "base-b"))
    assert a == pytest.approx(b, abs=1e-12)
    assert a > 0  # flexion reels the flexors in


def test_motor_payout_definition(hand, cfg):
    pose = Pose.zero().with_finger("index", (0.0, 50.0, 0.0, 0.0))
    state = pose_to_motor(hand, pose, cfg.actuator)
    key = motor_name("index", "base-a")
    assert state.payout(key) == pytest.approx(
        cfg.actuator.bobbin_radius * state.angle(key))


def test_coupling_violation_rejected(hand, cfg):
    pose = Pose.zero().with_finger("index", (0.0, 0.0, 40.0, 80.0))
    with pytest.raises(CouplingViolationError):
        pose_to_motor(hand, pose, cfg.actuator)


def test_rom_violation_rejected(hand, cfg):
    pose = Pose.zero().with_finger("index", (40.0, 0.0, 0.0, 0.0))
    with pytest.raises(RomViolationError):
        pose_to_motor(hand, pose, cfg.actuator)


def test_zero_motors_zero_pose(hand, cfg):
    state = MotorState({motor_name(f, p): 0.0
                        for f in hand.fingers
                        for p in ("base-a", "base-b", "distal")},
                       cfg.actuator.bobbin_radius)
    pose = motor_to_pose(hand, state, cfg.actuator)
    for name in hand.fingers:
        assert pose.angles(name) == pytest.approx([0, 0, 0, 0], abs=1e-7)


def test_round_trip_pose_motor_pose(hand, cfg):
    rng = np.random.default_rng(50)
    for _ in range(60):
        pose = random_consistent_pose(hand, rng)
        state = pose_to_motor(hand, pose, cfg.actuator)
        back = motor_to_pose(hand, state, cfg.actuator)
        for name in hand.fingers:
            err = np.max(np.abs(np.deg2rad(back.angles(name))
                                - np.deg2rad(pose.angles(name))))
            assert err < 1e-6


def test_round_trip_motor_pose_motor(hand, cfg):
    rng = np.random.default_rng(51)
    for _ in range(30):
        pose = random_consistent_pose(hand, rng)
        state = pose_to_motor(hand, pose, cfg.actuator)
        again = pose_to_motor(hand, motor_to_pose(hand, state, cfg.actuator),
                              cfg.actuator)
        for key in state.angles:
            payout_err = abs(again.payout(key) - state.payout(key))
            assert payout_err < 1e-6


def test_unreachable_payout(hand, cfg):
    finger = hand.finger("index")
    full = paired_deviation(finger, [0, 0, 0, 0], "distal")  # zero, baseline
    # demand a reel-in beyond the full-flexion flexor deviation
    angles = {motor_name("index", p): 0.0 for p in ("base-a", "base-b")}
    angles[motor_name("index", "distal")] = 10.0  # 50 mm of reel-in
    with pytest.raises(UnreachablePayoutError):
        motor_to_pose(hand, MotorState(angles, cfg.actuator.bobbin_radius),
                      cfg.actuator)
    assert full == pytest.approx(0.0, abs=1e-12)


def test_antagonistic_consistency(hand, cfg):
    # the pair's two payout magnitudes differ by at most the paired
    # deviation bound; that is the premise of single-motor actuation
    from rcjhand.cables import tendon_deviation
    rng = np.random.default_rng(52)
    for _ in range(20):
        pose = random_consistent_pose(hand, rng)
        for name, finger in hand.fingers.items():
            for pair_name in finger.routing.pair_names():
                pair = finger.routing.pair(pair_name)
                joints = finger.routing.tendon(pair.members[0]).joints
                dev_f = tendon_deviation(finger, pose.angles(name),
                                         pair.members[0])
                dev_e = tendon_deviation(finger, pose.angles(name),
                                         pair.members[1])
                assert abs(dev_f + dev_e) <= 0.05 * len(joints)


def test_coupling_ratio_respected(hand):
    cfg = ActuatorConfig(bobbin_radius=5.0, coupling=CouplingRule(ratio=0.8))
    pose = Pose.zero().with_finger("index", (0.0, 30.0, 50.0, 40.0))
    state = pose_to_motor(hand, pose, cfg)
    back = motor_to_pose(hand, state, cfg)
    assert back.angles("index") == pytest.approx([0, 30, 50, 40], abs=1e-6)


def test_actuator_config_validation():
    with pytest.raises(Exception):
        ActuatorConfig(bobbin_radius=0.0)
    with pytest.raises(Exception):
        CouplingRule(ratio=-1.0)


# --- presets ----------------------------------------------------------------

CUTKOSKY_CLASSES = (
    "large-heavy-wrap", "small-heavy-wrap", "medium-wrap", "adducted-thumb",
    "light-tool", "thumb-4-fingers", "thumb-3-fingers", "thumb-2-fingers",
    "thumb-index-finger", "power-disk", "power-sphere", "precision-disk",
    "precision-sphere", "tripod", "platform-push", "lateral-pinch",
)


def test_preset_catalog_contents(cfg):
    for name in CUTKOSKY_CLASSES + ("open", "close", "pinch"):
        assert name in cfg.presets
    assert len(cfg.presets) == 19


def test_open_preset_is_zero(cfg):
    pose = preset_pose(cfg.presets, "open")
    for name in pose.fingers():
        assert pose.angles(name) == pytest.approx([0, 0, 0, 0])


def test_all_presets_rom_valid_strict(cfg, hand):
    for name, pose in cfg.presets.items():
        for finger in pose.fingers():
            validate_rom(hand.finger(finger), pose.angles(finger),
                         mode="strict")


def test_all_presets_coupling_consistent(cfg, hand):
    from rcjhand.actuation import check_coupling
    for pose in cfg.presets.values():
        for finger in pose.fingers():
            check_coupling(hand.finger(finger), pose.angles(finger),
                           cfg.actuator.coupling)


def test_unknown_preset(cfg):
    with pytest.raises(UnknownPresetError):
        preset_pose(cfg.presets, "does-not-exist")
