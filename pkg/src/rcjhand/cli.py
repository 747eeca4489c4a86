"""Command-line pipelines.

    rcjhand describe                   summarize the configured hand
    rcjhand fk ...                     finger forward kinematics
    rcjhand cable-sweep ...            tendon/pair deviation sweeps
    rcjhand optimize-radius ...        single-joint radius optimization
    rcjhand sweep ...                  radius optimization over a kappa/beta grid
    rcjhand workspace ...              reachable-workspace point cloud
    rcjhand opposability ...           thumb opposability report
    rcjhand simulate ...               preset-to-preset trajectory + motor log
    rcjhand rmse A.csv B.csv           trajectory comparison
    rcjhand presets                    list pose presets

Every command reads one configuration document (--config, defaulting to
the packaged hand), writes its artifacts into --out-dir (default: the
RCJHAND_OUT_DIR environment variable, else the working directory), and
prints a one-line summary.  Exit codes: 0 success, 1 validation or
computation error, 2 usage error.  Artifacts are deterministic byte for
byte for identical inputs: every file carries only the tool version and
the config hash as provenance, never timestamps.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .actuation import pose_to_motor, preset_pose
from .cables import cable_deviation, paired_deviation, tendon_deviation
from .config import LoadedConfig, default_config_path, load_config
from .errors import RcjHandError
from .geometry import FINGER_ORDER
from .kinematics import finger_fk
from .radius_opt import (deviation_problem, flexion_problem, optimize_radius,
                         sweep, write_sweep_csv)
from .trajectory import (generate_trajectory, read_trajectory_csv,
                         trajectory_rmse, write_trajectory_csv)
from .workspace import (DEFAULT_STEPS_PER_JOINT, DEFAULT_VOXEL_EDGE_MM,
                        opposability_index, sample_workspace,
                        write_pointcloud_csv)


def _provenance(cfg: LoadedConfig) -> str:
    return f"rcjhand {__version__} config={cfg.sha256[:12]}"


def _out_path(args, name: str) -> Path:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / name


def _write_json(path: Path, payload: dict, cfg: LoadedConfig) -> None:
    doc = {"provenance": _provenance(cfg), **payload}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _parse_floats(text: str, flag: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise RcjHandError(f"{flag}: expected comma-separated numbers, "
                           f"got {text!r}") from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_describe(args, cfg: LoadedConfig) -> str:
    lines = [f"hand config {cfg.sha256[:12]} "
             f"({cfg.source if cfg.source else 'inline'})"]
    for name in FINGER_ORDER:
        f = cfg.hand.fingers[name]
        radii = ", ".join(f"{j.radius:g}" for j in f.joints)
        lengths = ", ".join(f"{l.length:g}" for l in f.links)
        lines.append(f"  {name:6s} kind={f.kind:6s} r=[{radii}] mm "
                     f"l=[{lengths}] mm")
    lines.append(f"  thumb length d = {cfg.hand.thumb_length:g} mm; "
                 f"bobbin {cfg.actuator.bobbin_radius:g} mm; "
                 f"coupling ratio {cfg.actuator.coupling.ratio:g}; "
                 f"{len(cfg.presets)} presets")
    _write_json(_out_path(args, "describe.json"), {
        "fingers": {
            name: {
                "kind": cfg.hand.fingers[name].kind,
                "radii_mm": [j.radius for j in cfg.hand.fingers[name].joints],
                "link_lengths_mm": [l.length
                                    for l in cfg.hand.fingers[name].links],
                "rom_deg": [list(j.rom) for j in cfg.hand.fingers[name].joints],
            } for name in FINGER_ORDER},
        "thumb_length_mm": cfg.hand.thumb_length,
        "preset_count": len(cfg.presets),
    }, cfg)
    print("\n".join(lines))
    return f"described {len(FINGER_ORDER)} fingers"


def _cmd_fk(args, cfg: LoadedConfig) -> str:
    angles = _parse_floats(args.angles, "--angles")
    if len(angles) != 4:
        raise RcjHandError("--angles: expected 4 comma-separated degrees")
    mode = "clamp" if args.clamp else "strict"
    chain = finger_fk(cfg.hand.finger(args.finger), angles, rom_mode=mode)
    path = _out_path(args, f"fk_{args.finger}.csv")
    with open(path, "w", newline="") as fh:
        fh.write(f"# {_provenance(cfg)}\n")
        writer = csv.writer(fh)
        writer.writerow(["frame", "x_mm", "y_mm", "z_mm"])
        for name, tf in chain.named():
            t = tf.translation
            writer.writerow([name, f"{t[0]:.6f}", f"{t[1]:.6f}",
                             f"{t[2]:.6f}"])
    tip = chain.tip_position
    return (f"{args.finger} tip at ({tip[0]:.3f}, {tip[1]:.3f}, "
            f"{tip[2]:.3f}) mm -> {path}")


def _cmd_cable_sweep(args, cfg: LoadedConfig) -> str:
    finger = cfg.hand.finger(args.finger)
    path = _out_path(args, f"cable_sweep_{args.finger}.csv")
    step = args.step
    with open(path, "w", newline="") as fh:
        fh.write(f"# {_provenance(cfg)}\n")
        writer = csv.writer(fh)
        writer.writerow(["joint", "angle_deg", "kind", "name", "deviation_mm"])
        for j, joint in enumerate(finger.joints):
            angles = np.arange(joint.rom[0], joint.rom[1] + step / 2, step)
            dev_a, dev_b = cable_deviation(joint, angles)
            side_a, side_b = (("radial", "ulnar")
                              if joint.axis.value == "deviation"
                              else ("flexor", "extensor"))
            for k, ang in enumerate(angles):
                writer.writerow([j, f"{ang:.3f}", "side", side_a,
                                 f"{dev_a[k]:.6f}"])
                writer.writerow([j, f"{ang:.3f}", "side", side_b,
                                 f"{dev_b[k]:.6f}"])
                writer.writerow([j, f"{ang:.3f}", "pair", "sum",
                                 f"{dev_a[k] + dev_b[k]:.6f}"])
    worst = 0.0
    for pair in finger.routing.pair_names():
        for j, joint in enumerate(finger.joints):
            for ang in np.arange(joint.rom[0], joint.rom[1] + step / 2, step):
                probe = np.zeros(4)
                probe[j] = ang
                worst = max(worst, abs(paired_deviation(finger, probe, pair)))
    return (f"{args.finger}: per-joint sweep at {step} deg -> {path} "
            f"(worst single-joint pair deviation {worst:.4f} mm)")


def _radius_args_to_problem(args, cfg: LoadedConfig):
    cable_d = (cfg.hand.fingers["thumb"].cable_diameter
               if args.cable_diameter is None else args.cable_diameter)
    if args.kappa is not None:
        if args.beta is None:
            raise RcjHandError("--kappa requires --beta")
        return flexion_problem(args.kappa, args.beta, cable_d), {
            "kappa_mm": args.kappa, "beta_deg": args.beta}
    if args.gamma is not None:
        if args.alpha is None:
            raise RcjHandError("--gamma requires --alpha")
        return deviation_problem(args.gamma, args.alpha, cable_d), {
            "gamma_mm": args.gamma, "alpha_deg": args.alpha}
    raise RcjHandError("give either --kappa/--beta or --gamma/--alpha")


def _cmd_optimize_radius(args, cfg: LoadedConfig) -> str:
    problem, inputs = _radius_args_to_problem(args, cfg)
    r_opt, res = optimize_radius(problem)
    _write_json(_out_path(args, "optimize_radius.json"), {
        "inputs": inputs,
        "offset_mm": problem.offset,
        "travel_deg": problem.travel,
        "r_opt_mm": round(r_opt, 6),
        "residual_mm": round(res, 9),
    }, cfg)
    return f"r* = {r_opt:.4f} mm, residual = {res:.6f} mm"


def _cmd_sweep(args, cfg: LoadedConfig) -> str:
    kappas = _parse_floats(args.kappas, "--kappas")
    betas = _parse_floats(args.betas, "--betas")
    cable_d = (cfg.hand.fingers["thumb"].cable_diameter
               if args.cable_diameter is None else args.cable_diameter)
    result = sweep(kappas, betas, cable_d)
    path = _out_path(args, "sweep.csv")
    write_sweep_csv(result, path, header_comment=_provenance(cfg))
    return (f"{len(result.cells)} cells -> {path} "
            f"(max residual {result.max_residual():.6f} mm)")


def _cmd_workspace(args, cfg: LoadedConfig) -> str:
    grid = sample_workspace(cfg.hand, args.finger, steps=args.steps,
                            voxel_edge=args.voxel)
    path = _out_path(args, f"workspace_{args.finger}.csv")
    write_pointcloud_csv(grid, path, header_comment=_provenance(cfg))
    return (f"{args.finger} workspace {grid.volume_cm3:.1f} cm^3 "
            f"({grid.count} voxels at {grid.edge:g} mm) -> {path}")


def _cmd_opposability(args, cfg: LoadedConfig) -> str:
    report = opposability_index(cfg.hand, steps=args.steps,
                                voxel_edge=args.voxel)
    _write_json(_out_path(args, "opposability.json"), report.to_dict(), cfg)
    shared = ", ".join(f"{n}={report.shared_cm3[n]:.1f}"
                       for n in ("index", "middle", "ring", "little"))
    return f"J = {report.index:.4f} (shared cm^3: {shared})"


def _cmd_simulate(args, cfg: LoadedConfig) -> str:
    start = preset_pose(cfg.presets, args.start)
    end = preset_pose(cfg.presets, args.end)
    traj = generate_trajectory(cfg.hand, [start, end], [args.duration],
                               rate_hz=args.rate)
    traj_path = _out_path(args, "trajectory.csv")
    write_trajectory_csv(traj, traj_path, header_comment=_provenance(cfg))
    motor_path = _out_path(args, "motors.csv")
    with open(motor_path, "w", newline="") as fh:
        fh.write(f"# {_provenance(cfg)}\n")
        writer = csv.writer(fh)
        writer.writerow(["t_s", "motor", "angle_rad"])
        for t, pose in zip(traj.times, traj.poses):
            state = pose_to_motor(cfg.hand, pose, cfg.actuator)
            for motor in sorted(state.angles):
                writer.writerow([f"{t:.6f}", motor,
                                 f"{state.angles[motor]:.9f}"])
    return (f"{args.start} -> {args.end}: {len(traj.times)} samples over "
            f"{traj.duration:g} s -> {traj_path}, {motor_path}")


def _cmd_rmse(args, cfg: LoadedConfig) -> str:
    a = read_trajectory_csv(args.trajectory_a)
    b = read_trajectory_csv(args.trajectory_b)
    report = trajectory_rmse(a, b, align_window=args.window,
                             smooth_width=args.smooth)
    _write_json(_out_path(args, "rmse.json"), report.to_dict(), cfg)
    per = ", ".join(f"{n}={v:.3f}" for n, v in sorted(report.per_finger.items()))
    return (f"RMSE {report.aggregate:.3f} mm (per finger: {per}; "
            f"shift {report.time_shift:g} s)")


def _cmd_presets(args, cfg: LoadedConfig) -> str:
    _write_json(_out_path(args, "presets.json"), {
        "presets": {name: {f: list(p.joint_angles[f]) for f in FINGER_ORDER}
                    for name, p in sorted(cfg.presets.items())},
    }, cfg)
    for name in sorted(cfg.presets):
        print(name)
    return f"{len(cfg.presets)} presets (all ROM-valid)"


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcjhand",
        description="Rolling-contact-joint hand kinematics and design toolkit")
    parser.add_argument("--config", type=Path, default=None,
                        help="hand configuration YAML (default: packaged)")
    parser.add_argument("--out-dir", type=Path,
                        default=os.environ.get("RCJHAND_OUT_DIR", "."),
                        help="artifact output directory "
                             "(default: $RCJHAND_OUT_DIR or '.')")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("describe", help="summarize the configured hand")

    p = sub.add_parser("fk", help="finger forward kinematics")
    p.add_argument("--finger", required=True, choices=FINGER_ORDER)
    p.add_argument("--angles", required=True,
                   help="deviation,flex1,flex2,flex3 in degrees")
    p.add_argument("--clamp", action="store_true",
                   help="clamp to ROM instead of failing")

    p = sub.add_parser("cable-sweep", help="per-joint cable deviation sweep")
    p.add_argument("--finger", required=True, choices=FINGER_ORDER)
    p.add_argument("--step", type=float, default=0.5,
                   help="sweep step, degrees")

    p = sub.add_parser("optimize-radius", help="optimize one rolling radius")
    p.add_argument("--kappa", type=float, help="flexor-extensor hole spacing, mm")
    p.add_argument("--beta", type=float, help="flexion surface half-angle, deg")
    p.add_argument("--gamma", type=float, help="radial-ulnar hole spacing, mm")
    p.add_argument("--alpha", type=float,
                   help="deviation surface half-angle, deg")
    p.add_argument("--cable-diameter", type=float, default=None)

    p = sub.add_parser("sweep", help="radius optimization over a grid")
    p.add_argument("--kappas", required=True,
                   help="comma-separated hole spacings, mm")
    p.add_argument("--betas", required=True,
                   help="comma-separated half-angles, deg")
    p.add_argument("--cable-diameter", type=float, default=None)

    p = sub.add_parser("workspace", help="reachable workspace point cloud")
    p.add_argument("--finger", required=True, choices=FINGER_ORDER)
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS_PER_JOINT)
    p.add_argument("--voxel", type=float, default=DEFAULT_VOXEL_EDGE_MM)

    p = sub.add_parser("opposability", help="thumb opposability report")
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS_PER_JOINT)
    p.add_argument("--voxel", type=float, default=DEFAULT_VOXEL_EDGE_MM)

    p = sub.add_parser("simulate", help="trajectory between two presets")
    p.add_argument("--start", dest="start", default="open")
    p.add_argument("--end", dest="end", required=True)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--rate", type=float, default=100.0)

    p = sub.add_parser("rmse", help="compare two trajectory CSV files")
    p.add_argument("trajectory_a", type=Path)
    p.add_argument("trajectory_b", type=Path)
    p.add_argument("--window", type=float, default=0.0,
                   help="time-shift search half-width, s")
    p.add_argument("--smooth", type=int, default=1,
                   help="moving-average width, samples")

    sub.add_parser("presets", help="list pose presets")
    return parser


_COMMANDS = {
    "describe": _cmd_describe,
    "fk": _cmd_fk,
    "cable-sweep": _cmd_cable_sweep,
    "optimize-radius": _cmd_optimize_radius,
    "sweep": _cmd_sweep,
    "workspace": _cmd_workspace,
    "opposability": _cmd_opposability,
    "simulate": _cmd_simulate,
    "rmse": _cmd_rmse,
    "presets": _cmd_presets,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config if args.config else default_config_path())
        summary = _COMMANDS[args.command](args, cfg)
        print(summary)
        return 0
    except RcjHandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
