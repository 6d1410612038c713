"""Runs a selection of suites against a resolved construction."""

import time
from typing import Iterable, List

from rootcloak.core.construction import Construction
from rootcloak.core.exceptions import ConfigInvalid
from rootcloak.executor.executor import BatchExecutor
from rootcloak.geometry.metricfield import validate_geometry
from rootcloak.logging.logger import get_logger
from rootcloak.verify.curvature import verify_flatness
from rootcloak.verify.energy import verify_energy
from rootcloak.verify.invisibility import (
    parse_direction,
    signed_root_directions,
    verify_invisibility,
    verify_visibility_control,
)
from rootcloak.verify.report import InvisibilityReport, VerificationReport
from rootcloak.verify.symmetry import verify_symmetry

logger = get_logger(__name__)

SUITES: List[str] = ["geometry", "invisibility", "symmetry", "energy", "flatness"]


def expand_suites(suites: Iterable[str]) -> List[str]:
    selected = set()
    for suite in suites:
        if suite == "all":
            selected.update(SUITES)
        elif suite in SUITES:
            selected.add(suite)
        else:
            raise ConfigInvalid(f"Unknown suite '{suite}'", f"choose from {', '.join(SUITES + ['all'])}", field="suite")
    return [s for s in SUITES if s in selected]


def run_verification(
    construction: Construction,
    suites: Iterable[str] = ("all",),
    direction: str | None = None,
    rays: int | None = None,
) -> VerificationReport:
    """
    Run the chosen suites. Invisibility covers every signed root plus the
    visibility control unless a single direction is given.
    """
    settings = construction.settings
    hf = construction.field
    verification = settings.verification
    thresholds = settings.thresholds
    integrator = settings.integrator
    ray_count = rays or verification.rays
    selected = expand_suites(suites)
    report = VerificationReport(config_digest=construction.digest)
    start = time.perf_counter()

    def executor(label: str) -> BatchExecutor:
        return BatchExecutor(settings.executor, label=label)

    if "geometry" in selected:
        report.geometry = validate_geometry(hf)

    if "invisibility" in selected:
        results: List[InvisibilityReport] = []
        if direction is not None:
            chosen = [parse_direction(direction, construction.roots)]
        else:
            chosen = signed_root_directions(construction.roots)
        for d in chosen:
            results.append(
                verify_invisibility(
                    hf,
                    d,
                    ray_count,
                    tol=integrator.rel_tol,
                    thresholds=thresholds,
                    integrator=integrator,
                    executor=executor(d.label),
                )
            )
        if direction is None:
            results.append(
                verify_visibility_control(
                    hf,
                    verification.control_angle,
                    ray_count,
                    tol=integrator.rel_tol,
                    thresholds=thresholds,
                    integrator=integrator,
                    executor=executor("control"),
                )
            )
        report.invisibility = results

    if "symmetry" in selected:
        report.symmetry = verify_symmetry(
            hf,
            verification.symmetry_samples,
            seed=verification.seed,
            threshold=thresholds.symmetry,
            executor=executor("symmetry"),
        )

    if "energy" in selected:
        report.energy = verify_energy(
            hf,
            points=verification.energy_points,
            section_rays=verification.section_rays,
            seed=verification.seed,
            thresholds=thresholds,
            integrator=integrator,
            executor=executor("sections"),
        )

    if "flatness" in selected:
        report.flatness = verify_flatness(
            hf,
            fd_step_fraction=verification.fd_step_fraction,
            obstruction_grid=verification.obstruction_grid,
            thresholds=thresholds,
        )

    report.duration = time.perf_counter() - start
    logger.info(
        f"Verification {'passed' if report.passed else 'FAILED'}",
        name="verify.finished",
        suites=selected,
        **report.summary(),
    )
    return report
