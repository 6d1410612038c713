"""
Invisibility: parallel rays in one direction, traced through the obstacle,
must leave along the line they came in on.
"""

from dataclasses import dataclass
from math import ceil
from typing import List, Tuple

import numpy as np
import scipy.linalg

from rootcloak.config import IntegratorSettings, ThresholdSettings
from rootcloak.core.exceptions import ConfigInvalid, GeometryInvalid
from rootcloak.executor.executor import BatchExecutor
from rootcloak.geometry.geodesic import (
    TraceResult,
    angle_between,
    bounding_radius,
    integrate,
    launch_distance,
    launch_state,
    mirror_residual,
    reverse,
)
from rootcloak.geometry.metricfield import HamiltonianField, validate_geometry
from rootcloak.geometry.rootsys import RootSystem
from rootcloak.logging.logger import get_logger
from rootcloak.verify.report import InvisibilityReport, RayRecord

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class Direction:
    vector: np.ndarray
    label: str
    root: int | None = None
    sign: int = 1


def parse_direction(text: str, rs: RootSystem) -> Direction:
    """
    `root:i` / `root:-i` (1-based, i <= N) or `custom:c_1,...,c_n`.

    Raises ConfigInvalid for anything else.
    """
    kind, _, value = text.partition(":")
    if kind == "root":
        try:
            index = int(value)
        except ValueError:
            raise ConfigInvalid(f"Invalid root direction '{text}'", f"use root:i or root:-i with 1 <= i <= {rs.N}", field="direction")
        if index == 0 or abs(index) > rs.N:
            raise ConfigInvalid(f"Root index out of range in '{text}'", f"1 <= |i| <= {rs.N}", field="direction")
        sign = 1 if index > 0 else -1
        return root_direction(rs, abs(index) - 1, sign)
    if kind == "custom":
        try:
            vector = np.array([float(c) for c in value.split(",")])
        except ValueError:
            raise ConfigInvalid(f"Invalid custom direction '{text}'", "use custom:c_1,...,c_n", field="direction")
        if vector.shape != (rs.n,) or not np.linalg.norm(vector) > 0:
            raise ConfigInvalid(f"Custom direction needs {rs.n} components and a nonzero norm", field="direction")
        match = rs.match_root(vector / np.linalg.norm(vector) * np.sqrt(2.0), tol=1e-12)
        if match is not None:
            return root_direction(rs, *match)
        return Direction(vector=vector / np.linalg.norm(vector), label=text)
    raise ConfigInvalid(f"Unknown direction '{text}'", "use root:i, root:-i or custom:c_1,...,c_n", field="direction")


def root_direction(rs: RootSystem, index: int, sign: int = 1) -> Direction:
    vector = sign * rs.roots[index]
    label = f"root:{sign * (index + 1)}"
    return Direction(vector=vector / np.linalg.norm(vector), label=label, root=index, sign=sign)


def signed_root_directions(rs: RootSystem) -> List[Direction]:
    """root:1 .. root:N, then root:-1 .. root:-N."""
    return [root_direction(rs, i, sign) for sign in (1, -1) for i in range(rs.N)]


def control_direction(rs: RootSystem, angle: float) -> Direction:
    """v_1 rotated by `angle` towards v_2 inside their common plane."""
    u = rs.roots[0] / np.linalg.norm(rs.roots[0])
    w = rs.roots[1] - (rs.roots[1] @ u) * u
    w = w / np.linalg.norm(w)
    vector = np.cos(angle) * u + np.sin(angle) * w
    label = "custom:" + ",".join(f"{c:.17g}" for c in vector)
    return Direction(vector=vector, label=label)


def ray_offsets(direction: np.ndarray, extent: float, count: int) -> np.ndarray:
    """
    Offsets on a square grid of the hyperplane orthogonal to direction, covering
    [-extent, extent]^(n-1) with ceil(count^(1/(n-1))) points per axis.
    """
    n = direction.shape[0]
    basis = scipy.linalg.null_space(direction[None, :])
    per_axis = max(1, ceil(count ** (1.0 / (n - 1)) - 1e-9))
    axis = np.linspace(-extent, extent, per_axis) if per_axis > 1 else np.zeros(1)
    coords = np.stack(np.meshgrid(*([axis] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1)
    return coords @ basis.T


@dataclass(frozen=True)
class TraceOptions:
    bounding_radius: float
    tol: float
    atol: float
    max_param: float
    max_step_fraction: float
    method: str

    @classmethod
    def for_field(cls, hf: HamiltonianField, integrator: IntegratorSettings, tol: float | None = None) -> "TraceOptions":
        return cls(
            bounding_radius=bounding_radius(hf),
            tol=integrator.rel_tol if tol is None else tol,
            atol=integrator.abs_tol,
            max_param=integrator.max_param,
            max_step_fraction=integrator.max_step_fraction,
            method=integrator.method,
        )

    def integrator_kwargs(self) -> dict:
        return dict(tol=self.tol, atol=self.atol, max_param=self.max_param, max_step_fraction=self.max_step_fraction, method=self.method)


def trace_ray(hf: HamiltonianField, direction: np.ndarray, offset: np.ndarray, options: TraceOptions) -> TraceResult:
    state = launch_state(direction, offset, launch_distance(hf))
    return integrate(hf, state, options.bounding_radius, **options.integrator_kwargs())


def _pair_sets(hf: HamiltonianField, root: int | None) -> List[set]:
    if root is None or hf.group is None:
        return []
    return [set(pair) for pair in hf.group.reflection_pairs(root)]


def _record(
    hf: HamiltonianField,
    direction: Direction,
    offset: np.ndarray,
    options: TraceOptions,
    pairs: List[set],
    check_reversal: bool,
) -> RayRecord:
    trace = trace_ray(hf, direction.vector, offset, options)
    balls = trace.balls_crossed
    crossing_ok = True
    mirror = None
    if direction.root is not None:
        crossing_ok = len(balls) == 0 or (len(balls) == 2 and set(balls) in pairs)
        crossing_ok = crossing_ok and all(c.t_out is not None for c in trace.crossings)
        mirror = mirror_residual(trace, hf.rs.roots[direction.root])

    reversal = None
    if check_reversal:
        back = reverse(hf, trace, options.bounding_radius, **options.integrator_kwargs())
        lateral = trace.entry_line.distance_to(back.exit_line.point)
        angular = angle_between(trace.entry_line.direction, -back.exit_line.direction)
        reversal = max(lateral, angular)

    return RayRecord(
        offset=offset.tolist(),
        lateral=trace.lateral_deviation,
        angular=trace.angular_deviation,
        balls_crossed=balls,
        energy_drift=trace.energy_drift,
        time_delay=trace.time_delay,
        crossing_ok=crossing_ok,
        mirror_residual=mirror,
        reversal_residual=reversal,
    )


def _trace_all(
    hf: HamiltonianField,
    direction: Direction,
    ray_count: int,
    options: TraceOptions,
    executor: BatchExecutor,
    check_reversal: bool,
) -> Tuple[np.ndarray, List[RayRecord]]:
    extent = hf.obstacle_radius
    offsets = ray_offsets(direction.vector, extent, ray_count)
    pairs = _pair_sets(hf, direction.root)
    records = executor.map_strict(
        lambda offset: _record(hf, direction, offset, options, pairs, check_reversal),
        list(offsets),
    )
    return offsets, records


def _maximum(values: List[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return max(present) if present else None


def verify_invisibility(
    hf: HamiltonianField,
    direction: Direction | np.ndarray,
    ray_count: int,
    tol: float = 1e-12,
    thresholds: ThresholdSettings | None = None,
    integrator: IntegratorSettings | None = None,
    executor: BatchExecutor | None = None,
    check_reversal: bool = True,
) -> InvisibilityReport:
    """
    Trace ray_count parallel rays in `direction` (integrator tolerance `tol`) and
    report the largest lateral and angular deviations.

    For signed roots each ray must also cross no ball or exactly one pair swapped
    by the root's reflection, and be symmetric under that reflection.

    Raises GeometryInvalid if the ball layout fails validate_geometry.
    """
    thresholds = thresholds or ThresholdSettings()
    integrator = integrator or IntegratorSettings()
    if not isinstance(direction, Direction):
        vector = np.asarray(direction, dtype=float)
        if not np.linalg.norm(vector) > 0:
            raise ConfigInvalid("Direction must be nonzero", field="direction")
        direction = parse_direction("custom:" + ",".join(repr(float(c)) for c in vector), hf.rs)

    geometry = validate_geometry(hf)
    if not geometry.passed:
        failed = [c for c in geometry.conditions if not c.passed]
        raise GeometryInvalid(
            "Invisibility is only claimed when the small-ball conditions hold",
            "; ".join(f"{c.name} violated by balls {c.violation}" for c in failed),
        )

    options = TraceOptions.for_field(hf, integrator, tol)
    executor = executor or BatchExecutor(label=direction.label)
    _, records = _trace_all(hf, direction, ray_count, options, executor, check_reversal)

    rho = hf.radius
    max_lateral = max(r.lateral for r in records)
    max_angular = max(r.angular for r in records)
    max_drift = max(r.energy_drift for r in records)
    max_mirror = _maximum([r.mirror_residual for r in records])
    max_reversal = _maximum([r.reversal_residual for r in records])
    crossings_valid = all(r.crossing_ok for r in records)

    passed = (
        max_lateral <= thresholds.lateral * rho
        and max_angular <= thresholds.angular
        and max_drift <= thresholds.energy_drift
        and crossings_valid
        and (max_mirror is None or max_mirror <= thresholds.mirror)
        and (max_reversal is None or max_reversal <= thresholds.reversal)
    )
    report = InvisibilityReport(
        label=direction.label,
        direction=direction.vector.tolist(),
        root=direction.root,
        rays=len(records),
        hits=sum(1 for r in records if r.balls_crossed),
        max_lateral=max_lateral,
        max_angular=max_angular,
        max_energy_drift=max_drift,
        max_mirror_residual=max_mirror,
        max_reversal_residual=max_reversal,
        crossings_valid=crossings_valid,
        thresholds={
            "lateral": thresholds.lateral * rho,
            "angular": thresholds.angular,
            "energy_drift": thresholds.energy_drift,
            "mirror": thresholds.mirror,
            "reversal": thresholds.reversal,
        },
        passed=passed,
        records=records,
    )
    logger.info(
        f"Invisibility {direction.label}: {'pass' if passed else 'FAIL'}",
        name="verify.invisibility",
        direction=direction.label,
        max_lateral=max_lateral,
        max_angular=max_angular,
        hits=report.hits,
    )
    return report


def verify_visibility_control(
    hf: HamiltonianField,
    angle: float,
    ray_count: int,
    tol: float = 1e-12,
    thresholds: ThresholdSettings | None = None,
    integrator: IntegratorSettings | None = None,
    executor: BatchExecutor | None = None,
) -> InvisibilityReport:
    """
    Rays along v_1 rotated by `angle`; passes when at least one ray is displaced by
    control_lateral * rho or more, showing the obstacle is not invisible in general.
    """
    thresholds = thresholds or ThresholdSettings()
    integrator = integrator or IntegratorSettings()
    direction = control_direction(hf.rs, angle)
    options = TraceOptions.for_field(hf, integrator, tol)
    executor = executor or BatchExecutor(label="control")
    _, records = _trace_all(hf, direction, ray_count, options, executor, check_reversal=False)

    max_lateral = max(r.lateral for r in records)
    bound = thresholds.control_lateral * hf.radius
    report = InvisibilityReport(
        label=direction.label,
        direction=direction.vector.tolist(),
        control=True,
        rays=len(records),
        hits=sum(1 for r in records if r.balls_crossed),
        max_lateral=max_lateral,
        max_angular=max(r.angular for r in records),
        max_energy_drift=max(r.energy_drift for r in records),
        thresholds={"control_lateral": bound},
        passed=max_lateral >= bound,
        records=records,
    )
    logger.info(
        f"Visibility control: {'pass' if report.passed else 'FAIL'}",
        name="verify.control",
        max_lateral=max_lateral,
    )
    return report
