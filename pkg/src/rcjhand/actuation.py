"""Motor-space <-> joint-space mappings under antagonistic single-motor drive.

Each finger carries three motors, one per antagonistic pair:

    <finger>:base-a   flexor-ulnar  + extensor-radial   (basal 2-DOF group)
    <finger>:base-b   flexor-radial + extensor-ulnar
    <finger>:distal   distal flexor + distal extensor   (coupled IP group)

A motor's angle is defined by the payout of its pair's flexor-side
member: reeling in the flexor by x mm is psi = x / b (b = bobbin
radius), and the opposite winding pays the extensor out by the same
amount.  The antagonistic-pair property of the joint geometry is what
makes that single winding consistent for both members.

Underactuation: the distal flexor crosses two flexion joints in series
(PIP+DIP on fingers, the two basal flexion joints on the thumb), so a
free-space pose must satisfy theta_second = ratio * theta_first.  The
ratio is a configuration value, 1 by default.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import (ConvergenceError, CouplingViolationError,
                     InvalidGeometryError, UnknownPresetError,
                     UnreachablePayoutError)
from .cables import tendon_deviation
from .geometry import FingerModel, HandModel, Pose, validate_rom

PAYOUT_TOL_MM = 1e-9
COUPLING_TOL_DEG = 1e-8
MAX_SOLVER_ITERATIONS = 100

PAIR_NAMES = ("base-a", "base-b", "distal")


@dataclass(frozen=True)
class CouplingRule:
    """Which flexion joints a single tendon pair couples, and their ratio.

    ratio = angle rate of the second (distal) joint over the first.
    """

    ratio: float = 1.0

    def __post_init__(self):
        if self.ratio <= 0:
            raise InvalidGeometryError(f"coupling ratio must be > 0, "
                                       f"got {self.ratio}")

    @staticmethod
    def coupled_joints(kind: str) -> Tuple[int, int]:
        """(first, second) coupled joint indices for a finger kind."""
        return (1, 2) if kind == "thumb" else (2, 3)


@dataclass(frozen=True)
class ActuatorConfig:
    """Bobbin geometry plus the coupling rule."""

    bobbin_radius: float = 5.0   # mm; convenience default, not a design datum
    coupling: CouplingRule = CouplingRule()

    def __post_init__(self):
        if self.bobbin_radius <= 0:
            raise InvalidGeometryError("bobbin radius must be positive")


@dataclass(frozen=True)
class MotorState:
    """Motor angles in radians, keyed '<finger>:<pair>'."""

    angles: Dict[str, float]
    bobbin_radius: float

    def __post_init__(self):
        object.__setattr__(self, "angles",
                           {k: float(v) for k, v in self.angles.items()})

    def angle(self, motor: str) -> float:
        return self.angles[motor]

    def payout(self, motor: str) -> float:
        """Flexor reel-in of this motor, mm (positive = flexor shortened)."""
        return self.bobbin_radius * self.angles[motor]

    def payouts(self) -> Dict[str, float]:
        return {k: self.bobbin_radius * v for k, v in self.angles.items()}


def motor_name(finger: str, pair: str) -> str:
    return f"{finger}:{pair}"


def _coupling_angles(finger: FingerModel, base_angles: Sequence[float],
                     coupling: CouplingRule) -> np.ndarray:
    """Expand solver variables to the 4-vector of joint angles.

    finger kind: variables (dev, flex1, flex2) -> (dev, flex1, flex2, r*flex2)
    thumb kind:  variables (dev, flex1, flex3) -> (dev, flex1, r*flex1, flex3)
    """
    dev, a, b = base_angles
    if finger.kind == "thumb":
        return np.array([dev, a, coupling.ratio * a, b])
    return np.array([dev, a, b, coupling.ratio * b])


def check_coupling(finger: FingerModel, angles: Sequence[float],
                   coupling: CouplingRule,
                   tol: float = COUPLING_TOL_DEG) -> None:
    first, second = CouplingRule.coupled_joints(finger.kind)
    arr = np.asarray(angles, dtype=float)
    err = arr[second] - coupling.ratio * arr[first]
    if abs(err) > tol:
        raise CouplingViolationError(
            f"coupled joints {first}/{second} violate ratio "
            f"{coupling.ratio:g}: angles {arr[first]:g} / {arr[second]:g} deg")


def _flexor_deviations(finger: FingerModel,
                       angles: Sequence[float]) -> Dict[str, float]:
    plan = finger.routing
    return {pair.name: tendon_deviation(finger, angles, pair.members[0],
                                        strict=False)
            for pair in plan.pairs}


def pose_to_motor(hand: HandModel, pose: Pose,
                  cfg: ActuatorConfig = ActuatorConfig()) -> MotorState:
    """Exact motor angles realizing a coupling-consistent pose.

    Raises RomViolationError / CouplingViolationError on invalid poses.
    """
    angles = {}
    for name in pose.fingers():
        finger = hand.finger(name)
        arr = validate_rom(finger, pose.angles(name), mode="strict")
        check_coupling(finger, arr, cfg.coupling)
        for pair_name, dev in _flexor_deviations(finger, arr).items():
            # flexors shorten with flexion; reel-in is a positive motor angle
            angles[motor_name(name, pair_name)] = -dev / cfg.bobbin_radius
    return MotorState(angles, cfg.bobbin_radius)


# ---------------------------------------------------------------------------
# Inverse mapping (free space): damped Newton with bisection fallback
# ---------------------------------------------------------------------------

class _FlexorEval:
    """Fast flexor-deviation evaluator over the solver variables.

    Prefetches each pair's flexor routing (joint axis, radius, chord
    endpoint) so a solver iteration costs a handful of scalar chords.
    """

    def __init__(self, finger: FingerModel, coupling: CouplingRule):
        from .cables import _chord_scalar
        self._chord = _chord_scalar
        self.finger = finger
        self.coupling = coupling
        self.pairs = {}
        for pair in finger.routing.pairs:
            tendon = finger.routing.tendon(pair.members[0])
            hole = tendon.hole()
            self.pairs[pair.name] = tuple(
                (finger.joints[j].axis, finger.joints[j].radius,
                 hole.position(finger.joints[j], finger.cable_diameter), j)
                for j in tendon.joints)

    def deviation(self, pair_name: str, var: Sequence[float]) -> float:
        angles = _coupling_angles(self.finger, var, self.coupling)
        total = 0.0
        for axis, radius, hole, j in self.pairs[pair_name]:
            total += self._chord(axis, radius, hole, angles[j]) - 2.0 * radius
        return total


def _newton(func, x0: np.ndarray, lo: np.ndarray, hi: np.ndarray,
            tol: float) -> Optional[np.ndarray]:
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    fx = func(x)
    for _ in range(MAX_SOLVER_ITERATIONS):
        if np.max(np.abs(fx)) <= tol:
            return x
        n = x.size
        jac = np.zeros((n, n))
        h = 1e-6
        for k in range(n):
            dx = np.zeros(n)
            dx[k] = h
            jac[:, k] = (func(np.clip(x + dx, lo, hi + h))
                         - func(np.clip(x - dx, lo - h, hi))) / (2 * h)
        try:
            step = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError:
            return None
        lam, norm0 = 1.0, float(np.linalg.norm(fx))
        while lam > 1e-6:
            trial = np.clip(x + lam * step, lo, hi)
            f_trial = func(trial)
            if np.linalg.norm(f_trial) < norm0:
                x, fx = trial, f_trial
                break
            lam *= 0.5
        else:
            return None
    return x if np.max(np.abs(fx)) <= tol else None


def _bisect(func, lo: float, hi: float, tol: float) -> float:
    """Root of a monotone scalar function on [lo, hi] (values bracket 0)."""
    f_lo, f_hi = func(lo), func(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise ConvergenceError(
            f"bisection bracket does not straddle the root "
            f"(f({lo:g}) = {f_lo:g}, f({hi:g}) = {f_hi:g})",
            residual=min(abs(f_lo), abs(f_hi)))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = func(mid)
        if abs(f_mid) <= tol:
            return mid
        if f_lo * f_mid <= 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def _variable_box(finger: FingerModel,
                  coupling: CouplingRule) -> Tuple[np.ndarray, np.ndarray]:
    """ROM box of the solver variables, coupled joint folded in."""
    lo, hi = finger.rom_lo, finger.rom_hi
    first, second = CouplingRule.coupled_joints(finger.kind)
    first_lo = max(lo[first], lo[second] / coupling.ratio)
    first_hi = min(hi[first], hi[second] / coupling.ratio)
    if finger.kind == "thumb":
        return (np.array([lo[0], first_lo, lo[3]]),
                np.array([hi[0], first_hi, hi[3]]))
    return (np.array([lo[0], lo[1], first_lo]),
            np.array([hi[0], hi[1], first_hi]))


_SOLVER_CACHE: Dict[Tuple[int, float], Tuple] = {}


def _solver_data(finger: FingerModel, coupling: CouplingRule):
    """Per-finger evaluator, variable box, and reachable payout ranges.

    Keyed on object identity: finger models are immutable, and reusing
    the evaluator makes repeated inverse solves cheap.
    """
    key = (id(finger), coupling.ratio)
    hit = _SOLVER_CACHE.get(key)
    if hit is not None and hit[0] is finger:
        return hit[1:]
    ev = _FlexorEval(finger, coupling)
    lo, hi = _variable_box(finger, coupling)
    # flexor deviations are monotone per joint, so the attainable range
    # is spanned by the variable-box corners
    ranges = {}
    for pair in PAIR_NAMES:
        corners = [ev.deviation(pair, (v0, v1, v2))
                   for v0 in (lo[0], hi[0])
                   for v1 in (lo[1], hi[1])
                   for v2 in (lo[2], hi[2])]
        ranges[pair] = (min(corners), max(corners))
    _SOLVER_CACHE[key] = (finger, ev, lo, hi, ranges)
    return ev, lo, hi, ranges


def _asin_clamped(value: float) -> float:
    return float(np.rad2deg(np.arcsin(np.clip(value, -1.0, 1.0))))


def _seed_variables(finger: FingerModel, coupling: CouplingRule,
                    targets: Dict[str, float], lo: np.ndarray,
                    hi: np.ndarray) -> np.ndarray:
    """Closed-form inversion of the in-ROM chord model as a Newton seed.

    Within the ROM every flexor chord is 2(r - h sin(angle/2)), so the
    base pair difference isolates the deviation joint and the sum
    isolates the basal flexion; the seed is exact there and Newton only
    has to polish numerical residue.
    """
    from .cables import chord_offset
    d = finger.cable_diameter
    ratio = coupling.ratio
    g0 = chord_offset(finger.joints[0].lateral_hole_spacing, d)
    h = [chord_offset(j.flex_hole_spacing, d) for j in finger.joints]
    diff = targets["base-a"] - targets["base-b"]        # ulnar minus radial
    phi = 2.0 * _asin_clamped(diff / (4.0 * g0))
    total = targets["base-a"] + targets["base-b"]
    if finger.kind == "thumb":
        flex1 = 2.0 * _asin_clamped(-total / (4.0 * (h[1] + ratio * h[2])))
        distal = 2.0 * _asin_clamped(-targets["distal"] / (2.0 * h[3]))
    else:
        flex1 = 2.0 * _asin_clamped(-total / (4.0 * h[1]))
        distal = 2.0 * _asin_clamped(
            -targets["distal"] / (2.0 * (h[2] + ratio * h[3])))
    return np.clip(np.array([phi, flex1, distal]), lo, hi)


def motor_to_pose(hand: HandModel, motors: MotorState,
                  cfg: ActuatorConfig = ActuatorConfig()) -> Pose:
    """Unique coupling-consistent ROM pose reproducing the motor payouts.

    Distal (1-DOF) and basal (2-DOF) groups are solved independently per
    finger: damped Newton on the flexor payout equations (seeded by the
    closed-form in-ROM inversion), with a monotone-bisection fallback.
    Payout residual tolerance PAYOUT_TOL_MM.
    """
    fingers = sorted({key.split(":", 1)[0] for key in motors.angles})
    pose_angles = {}
    for name in fingers:
        finger = hand.finger(name)
        targets = {}
        for pair in PAIR_NAMES:
            key = motor_name(name, pair)
            if key not in motors.angles:
                raise InvalidGeometryError(f"missing motor {key!r}")
            targets[pair] = -motors.bobbin_radius * motors.angles[key]
        ev, lo, hi, ranges = _solver_data(finger, cfg.coupling)
        for pair in PAIR_NAMES:
            dev_lo, dev_hi = ranges[pair]
            if not dev_lo - 1e-9 <= targets[pair] <= dev_hi + 1e-9:
                raise UnreachablePayoutError(
                    f"{motor_name(name, pair)}: target flexor deviation "
                    f"{targets[pair]:.6f} mm outside reachable "
                    f"[{dev_lo:.6f}, {dev_hi:.6f}] mm")

        seed = _seed_variables(finger, cfg.coupling, targets, lo, hi)

        # distal group: single variable
        def f_distal(theta: float) -> float:
            return ev.deviation("distal", (seed[0], seed[1], theta)) \
                - targets["distal"]

        sol = _newton(lambda v: np.array([f_distal(v[0])]),
                      np.array([seed[2]]), np.array([lo[2]]),
                      np.array([hi[2]]), PAYOUT_TOL_MM)
        if sol is not None:
            theta_d = float(sol[0])
        else:
            theta_d = _bisect(f_distal, lo[2], hi[2], PAYOUT_TOL_MM)

        # basal group: (deviation, first flexion)
        def f_base(var2: np.ndarray) -> np.ndarray:
            var = (var2[0], var2[1], theta_d)
            return np.array([ev.deviation("base-a", var) - targets["base-a"],
                             ev.deviation("base-b", var) - targets["base-b"]])

        sol = _newton(f_base, seed[:2], lo[:2], hi[:2], PAYOUT_TOL_MM)
        if sol is not None:
            dev_angle, flex1 = float(sol[0]), float(sol[1])
        else:
            # the pair difference depends on the deviation joint alone
            # (flexion joints move both flexors identically), so the 2-DOF
            # system splits into two monotone 1-DOF problems
            diff_target = targets["base-a"] - targets["base-b"]

            def f_diff(phi: float) -> float:
                var = (phi, seed[1], theta_d)
                return (ev.deviation("base-a", var)
                        - ev.deviation("base-b", var) - diff_target)

            dev_angle = _bisect(f_diff, lo[0], hi[0], PAYOUT_TOL_MM)

            def f_flex(theta: float) -> float:
                return ev.deviation("base-a", (dev_angle, theta, theta_d)) \
                    - targets["base-a"]

            flex1 = _bisect(f_flex, lo[1], hi[1], PAYOUT_TOL_MM)

        var = (dev_angle, flex1, theta_d)
        final = _coupling_angles(finger, var, cfg.coupling)
        residual = max(abs(ev.deviation(p, var) - targets[p])
                       for p in PAIR_NAMES)
        if residual > 10 * PAYOUT_TOL_MM:
            raise ConvergenceError(
                f"{name}: payout residual {residual:.3e} mm above tolerance",
                residual=residual)
        pose_angles[name] = tuple(validate_rom(finger, final, mode="clamp"))
    return Pose(pose_angles)


def preset_pose(presets: Mapping[str, Pose], name: str) -> Pose:
    """Look up a stored pose preset by name."""
    try:
        return presets[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; available: {sorted(presets)}") from None
