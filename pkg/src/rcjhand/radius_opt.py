"""Rolling-radius optimization for single-motor antagonistic actuation.

For one joint, the objective is the worst-case summed length change of
the antagonistic chord pair,

    residual(r) = max over the joint's travel of |dc_close(a) + dc_open(a)|,

evaluated on a dense angle grid.  The pair objective depends only on the
per-side chord offset and the relative rotation, identically for flexion
and deviation joints, so problems are stated in terms of that offset.

The travel is the full width of the ROM, swept from the rolling-contact
reference: [0, 2*beta] for a flexion joint and [0, 4*alpha] for the
deviation joint (whose symmetric ROM [-2a, +2a] spans 4*alpha of
relative rotation).

The objective typically has a flat minimum region; ties are broken
toward the smallest radius (most compact joint), so the optimizer
refines the left edge of the minimizing set.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidGeometryError, NoMinimumError
from .geometry import CABLE_DIAMETER_MM, JointAxis, JointGeometry
from .cables import chord_offset, _chord_lengths

DEFAULT_ANGLE_STEP_DEG = 0.25
DEFAULT_RADIUS_TOL_MM = 1e-4
COARSE_SCAN_SAMPLES = 64
_TIE_EPS = 1e-12


@dataclass(frozen=True)
class RadiusProblem:
    """One radius-optimization instance.

    Attributes:
        offset: per-side chord-endpoint offset, mm
        travel: swept relative rotation [0, travel], degrees
        search: (lo, hi) radius interval, mm; defaults to
            (0.05 * offset, 0.95 * offset)
        step: angular grid step for the objective, degrees
        tol: convergence tolerance on the radius, mm
    """

    offset: float
    travel: float
    search: Optional[Tuple[float, float]] = None
    step: float = DEFAULT_ANGLE_STEP_DEG
    tol: float = DEFAULT_RADIUS_TOL_MM

    def __post_init__(self):
        if self.offset <= 0:
            raise InvalidGeometryError(f"offset must be positive, got {self.offset}")
        if self.travel <= 0:
            raise InvalidGeometryError(f"travel must be positive, got {self.travel}")
        if self.step <= 0 or self.step > 1.0:
            raise InvalidGeometryError(f"angular step must be in (0, 1] deg, "
                                       f"got {self.step}")
        if self.tol <= 0:
            raise InvalidGeometryError("tolerance must be positive")
        search = self.search
        if search is None:
            search = (0.05 * self.offset, 0.95 * self.offset)
        lo, hi = float(search[0]), float(search[1])
        if not (0.0 < lo < hi < self.offset):
            raise InvalidGeometryError(
                f"search interval ({lo}, {hi}) must lie inside (0, {self.offset})")
        object.__setattr__(self, "search", (lo, hi))

    def angle_grid(self) -> np.ndarray:
        n = int(np.ceil(self.travel / self.step))
        return np.linspace(0.0, self.travel, n + 1)


def flexion_problem(flex_hole_spacing: float, surface_half_angle: float,
                    cable_diameter: float = CABLE_DIAMETER_MM,
                    **kwargs) -> RadiusProblem:
    """Problem for a flexion joint: offset (spacing - d)/2, travel 2*beta."""
    return RadiusProblem(chord_offset(flex_hole_spacing, cable_diameter),
                         2.0 * surface_half_angle, **kwargs)


def deviation_problem(lateral_hole_spacing: float, surface_half_angle: float,
                      cable_diameter: float = CABLE_DIAMETER_MM,
                      **kwargs) -> RadiusProblem:
    """Problem for the deviation joint: offset (spacing - d)/2, travel 4*alpha."""
    return RadiusProblem(chord_offset(lateral_hole_spacing, cable_diameter),
                         4.0 * surface_half_angle, **kwargs)


def problem_for_joint(joint: JointGeometry,
                      cable_diameter: float = CABLE_DIAMETER_MM,
                      **kwargs) -> RadiusProblem:
    if joint.axis is JointAxis.FLEXION:
        return flexion_problem(joint.flex_hole_spacing,
                               joint.surface_half_angle, cable_diameter, **kwargs)
    return deviation_problem(joint.lateral_hole_spacing,
                             joint.surface_half_angle, cable_diameter, **kwargs)


def residual(problem: RadiusProblem, r: float,
             angles_deg: Optional[np.ndarray] = None) -> float:
    """max |dc_close + dc_open| over the travel grid at radius r, mm."""
    grid = problem.angle_grid() if angles_deg is None else np.asarray(angles_deg)
    hole_close = np.array([-problem.offset, 0.0, 0.0])
    hole_open = np.array([+problem.offset, 0.0, 0.0])
    close = _chord_lengths(JointAxis.FLEXION, r, hole_close, grid) - 2.0 * r
    opened = _chord_lengths(JointAxis.FLEXION, r, hole_open, grid) - 2.0 * r
    return float(np.max(np.abs(close + opened)))


_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _golden_section(f: Callable[[float], float], lo: float, hi: float,
                    tol: float) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _left_edge_bisect(f: Callable[[float], float], lo: float, hi: float,
                      level: float, tol: float) -> float:
    """Smallest r in (lo, hi] with f(r) <= level; f crosses the level once."""
    a, b = lo, hi                   # f(a) > level, f(b) <= level
    while (b - a) > tol:
        mid = 0.5 * (a + b)
        if f(mid) <= level:
            b = mid
        else:
            a = mid
    return b


def minimize_smallest(f: Callable[[float], float], lo: float, hi: float,
                      tol: float,
                      samples: int = COARSE_SCAN_SAMPLES) -> Tuple[float, float]:
    """Minimize a (weakly) unimodal f, breaking ties toward smaller argument.

    Coarse scan to locate the minimizing region; golden-section when the
    minimum is strict, left-edge bisection when the scan shows a flat
    minimizing plateau.  Raises NoMinimumError when the scan is strictly
    monotone into a boundary.
    """
    grid = np.linspace(lo, hi, samples)
    vals = np.array([f(r) for r in grid])
    vmin = float(np.min(vals))
    ties = np.flatnonzero(vals <= vmin + _TIE_EPS)
    k = int(ties[0])
    if ties.size == 1:
        if k == 0:
            raise NoMinimumError(
                "coarse scan is monotone increasing: minimum at the lower bound")
        if k == samples - 1:
            raise NoMinimumError(
                "coarse scan is monotone decreasing: minimum at the upper bound")
        r_star = _golden_section(f, grid[k - 1], grid[k + 1], tol)
    elif k == 0:
        r_star = grid[0]
    else:
        r_star = _left_edge_bisect(f, grid[k - 1], grid[k], vmin + _TIE_EPS, tol)
    return r_star, f(r_star)


def optimize_radius(problem: RadiusProblem) -> Tuple[float, float]:
    """Radius minimizing the pair residual; ties broken toward smaller r.

    Returns:
        (r_opt, residual_at_r_opt) in mm
    """
    grid = problem.angle_grid()
    lo, hi = problem.search
    return minimize_smallest(lambda r: residual(problem, r, grid), lo, hi,
                             problem.tol)


@dataclass(frozen=True)
class SweepCell:
    kappa: float
    beta: float
    r_opt: float
    residual: float
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    cells: Tuple[SweepCell, ...]

    def max_residual(self) -> float:
        vals = [c.residual for c in self.cells if c.error is None]
        return max(vals) if vals else float("nan")

    def rows(self):
        for c in self.cells:
            yield (c.kappa, c.beta, c.r_opt, c.residual)


def sweep(kappa_values: Sequence[float], beta_values: Sequence[float],
          cable_diameter: float = CABLE_DIAMETER_MM,
          step: float = DEFAULT_ANGLE_STEP_DEG,
          tol: float = DEFAULT_RADIUS_TOL_MM) -> SweepResult:
    """optimize_radius over a (kappa, beta) grid of flexion joints.

    Cells where the search fails are recorded with NaN results and an
    error note rather than aborting the sweep.
    """
    if len(kappa_values) == 0 or len(beta_values) == 0:
        raise InvalidGeometryError("sweep grids must be non-empty")
    cells = []
    for kappa in kappa_values:
        for beta in beta_values:
            problem = flexion_problem(kappa, beta, cable_diameter,
                                      step=step, tol=tol)
            try:
                r_opt, res = optimize_radius(problem)
                cells.append(SweepCell(float(kappa), float(beta), r_opt, res))
            except NoMinimumError as exc:
                cells.append(SweepCell(float(kappa), float(beta),
                                       float("nan"), float("nan"), str(exc)))
    return SweepResult(tuple(cells))


def write_sweep_csv(result: SweepResult, path,
                    header_comment: Optional[str] = None) -> None:
    """Write a sweep as kappa_mm,beta_deg,r_opt_mm,residual_mm."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["kappa_mm", "beta_deg", "r_opt_mm", "residual_mm"])
        for kappa, beta, r_opt, res in result.rows():
            writer.writerow([f"{kappa:.6g}", f"{beta:.6g}",
                             f"{r_opt:.6f}", f"{res:.9f}"])
