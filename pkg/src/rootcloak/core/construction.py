"""
Resolving a Settings object into a concrete construction.

Fields left as "auto" are filled in the order chamber point -> ball radius ->
epsilon, since each depends on the one before.
"""

import hashlib
import json
from dataclasses import dataclass
from typing import List

import numpy as np
from pydantic import BaseModel

from rootcloak.config import AmplitudeSettings, Settings
from rootcloak.event_progress import ProgressAction
from rootcloak.geometry.bumps import BumpSet, check_amplitudes, draw_amplitudes
from rootcloak.geometry.metricfield import (
    GeometryReport,
    HamiltonianField,
    auto_radius,
    condition_profile,
    max_admissible_epsilon,
    validate_geometry,
)
from rootcloak.geometry.rootsys import RootSystem, WeylGroup, build_roots, build_weyl_group
from rootcloak.logging.logger import event_context, get_logger

logger = get_logger(__name__)

DIGEST_EXCLUDE = {"logger", "executor"}
"""Settings that change how a run is observed, not what it computes."""


class ConstructionReport(BaseModel):
    n: int
    roots: int
    balls: int
    chamber_point: List[float]
    centers: List[List[float]]
    ball_radius: float
    radius_auto: bool
    amplitudes: List[float]
    epsilon: float
    epsilon_auto: bool
    epsilon_threshold: float | None = None
    """Conservative admissible epsilon from the bisection; set when epsilon was "auto"."""

    max_grad_phi: float
    max_hess_phi: float
    """Bounds on ||grad phi_i|| and ||Hess phi_i|| over all bumps; eps times them is the size of the perturbation."""

    condition_flat: float
    condition_min: float
    condition_max: float
    geometry: GeometryReport
    config_digest: str


@dataclass(frozen=True, eq=False)
class Construction:
    """Everything a command needs: resolved settings and the immutable field."""

    settings: Settings
    roots: RootSystem
    group: WeylGroup
    bumps: BumpSet
    field: HamiltonianField
    report: ConstructionReport

    @property
    def digest(self) -> str:
        return self.report.config_digest


def config_digest(settings: Settings) -> str:
    """SHA-256 of the canonical JSON form of the settings."""
    data = settings.model_dump(mode="json", exclude=DIGEST_EXCLUDE)
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def resolve_amplitudes(settings: Settings) -> np.ndarray:
    amp = settings.amplitudes
    if amp.values is not None:
        return np.asarray(amp.values, dtype=float)
    return draw_amplitudes(settings.root_count, amp.seed, amp.low, amp.high)


def resolve_config(settings: Settings) -> Construction:
    """
    Build roots, group, bumps and field, resolving every "auto" field.

    Raises ConfigInvalid, AmplitudeDegenerate, GeometryInvalid or ThresholdNotFound.
    """
    with event_context(logger, "Resolved construction", name="construction.resolved", n=settings.n):
        logger.info(
            "Building root system",
            name="construction.roots",
            progress_action=ProgressAction.BUILDING,
            target="construction",
        )
        rs = build_roots(settings.n)

        chamber_point = None if settings.chamber_point == "auto" else np.asarray(settings.chamber_point, dtype=float)
        group = build_weyl_group(rs, chamber_point)

        radius_auto = settings.ball_radius == "auto"
        radius = auto_radius(rs, group, settings.radius_fraction) if radius_auto else float(settings.ball_radius)

        amplitudes = resolve_amplitudes(settings)
        check_amplitudes(rs, amplitudes)
        bs = BumpSet(center=group.chamber_point, radius=radius, amplitudes=amplitudes, profile=settings.profile)

        epsilon_auto = settings.epsilon == "auto"
        threshold = None
        if epsilon_auto:
            search = settings.epsilon_search
            threshold = max_admissible_epsilon(
                rs,
                bs,
                grid_resolution=search.grid_resolution,
                lower=search.lower,
                upper=search.upper,
                iterations=search.iterations,
                min_eigenvalue=search.min_eigenvalue,
                safety=search.safety,
            )
            epsilon = 0.5 * threshold
        else:
            epsilon = float(settings.epsilon)

        field = HamiltonianField.build(rs, bs, epsilon, group)
        geometry = validate_geometry(field)
        if not geometry.passed:
            logger.warning(
                "Ball layout violates the small-ball conditions",
                name="construction.geometry",
                failed=[c.name for c in geometry.conditions if not c.passed],
            )
        flat, lowest, highest = condition_profile(field, settings.epsilon_search.grid_resolution)
        max_grad, max_hess = bs.derivative_bounds()

        resolved = settings.model_copy(
            update={
                "epsilon": epsilon,
                "ball_radius": radius,
                "chamber_point": group.chamber_point.tolist(),
                "amplitudes": AmplitudeSettings(
                    values=amplitudes.tolist(),
                    seed=settings.amplitudes.seed,
                    low=settings.amplitudes.low,
                    high=settings.amplitudes.high,
                ),
            }
        )
        report = ConstructionReport(
            n=rs.n,
            roots=rs.N,
            balls=group.order,
            chamber_point=group.chamber_point.tolist(),
            centers=group.centers.tolist(),
            ball_radius=radius,
            radius_auto=radius_auto,
            amplitudes=amplitudes.tolist(),
            epsilon=epsilon,
            epsilon_auto=epsilon_auto,
            epsilon_threshold=threshold,
            max_grad_phi=max_grad,
            max_hess_phi=max_hess,
            condition_flat=flat,
            condition_min=lowest,
            condition_max=highest,
            geometry=geometry,
            config_digest=config_digest(resolved),
        )
    return Construction(settings=resolved, roots=rs, group=group, bumps=bs, field=field, report=report)
