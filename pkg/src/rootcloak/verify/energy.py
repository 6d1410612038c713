"""
Energy-level membership of the sections w_i = v_i + eps grad phi_i, in the base
ball, pushed to every other ball, and along geodesics of the single-ball field.
"""

from math import ceil, gamma, pi
from typing import List

import numpy as np

from rootcloak.config import IntegratorSettings, ThresholdSettings
from rootcloak.executor.executor import BatchExecutor
from rootcloak.geometry.geodesic import SCAN_SUBSTEPS, GeodesicState, integrate
from rootcloak.geometry.metricfield import HamiltonianField, base_ball_grid, evaluate, section_covectors, solve_batch
from rootcloak.logging.logger import get_logger
from rootcloak.verify.report import EnergyReport, SectionResidual

logger = get_logger(__name__)


def grid_resolution_for(n: int, points: int) -> int:
    """Points per axis so that a cube grid clipped to the inscribed ball holds about `points` points."""
    ball_fraction = pi ** (n / 2) / gamma(n / 2 + 1) / 2**n
    return max(2, ceil((points / ball_fraction) ** (1.0 / n)))


def level_deviation(hf: HamiltonianField, points: int) -> tuple[int, float]:
    """
    max over base-ball grid points and roots of |1/2 (H w_i, w_i) - 1|.

    Returns (grid size, deviation); a singular grid point counts as an infinite deviation.
    """
    grid = base_ball_grid(hf.bs, grid_resolution_for(hf.n, points))
    H, condition, _ = solve_batch(hf, grid)
    W = section_covectors(hf, grid)
    energy = 0.5 * np.einsum("pia,pab,pib->pi", W, H, W)
    deviation = np.abs(energy - 1.0)
    if not np.all(np.isfinite(condition)):
        return grid.shape[0], float("inf")
    return grid.shape[0], float(np.max(deviation))


def pushed_deviation(hf: HamiltonianField, points: int, seed: int) -> tuple[int, float]:
    """
    For every ball j, the covectors R_j w_i(y) at x = c_j + R_j (y - P_1) lie in {h = 1}.
    Samples `points` random base-ball points per ball.
    """
    rng = np.random.default_rng(seed)
    n = hf.n
    directions = rng.normal(size=(points, n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    ys = hf.bs.center + hf.radius * rng.uniform(0.0, 0.999, size=points)[:, None] ** (1.0 / n) * directions
    W = section_covectors(hf, ys)

    worst = 0.0
    for piece in hf.pieces:
        R = piece.rotation
        for y, w in zip(ys, W):
            H = evaluate(hf, piece.center + R @ (y - hf.bs.center), derivatives=False).H
            pushed = w @ R.T
            energy = 0.5 * np.einsum("ia,ab,ib->i", pushed, H, pushed)
            worst = max(worst, float(np.max(np.abs(energy - 1.0))))
    return points * len(hf.pieces), worst


def section_invariance(
    hf: HamiltonianField,
    root: int,
    rays: int,
    integrator: IntegratorSettings,
) -> SectionResidual:
    """
    Geodesics of the single-ball field launched with p = v_k outside the support
    stay on the section: sup_t |p(t) - v_k - eps grad phi_k(x(t))| along each trace.
    Also reports the angle between the exit direction and v_k.
    """
    single = HamiltonianField.single_ball(hf.rs, hf.bs, hf.epsilon)
    v = hf.rs.roots[root]
    unit = v / np.linalg.norm(v)
    center = hf.bs.center
    rho = hf.radius

    # offsets spread over the ball's cross-section along one perpendicular axis
    other = np.linalg.svd(unit[None, :])[2][1]
    offsets = np.linspace(-0.9 * rho, 0.9 * rho, rays) if rays > 1 else np.zeros(1)
    radius = float(np.linalg.norm(center)) + 4.0 * rho

    worst = 0.0
    worst_angle = 0.0
    for offset in offsets:
        x0 = center + offset * other - 2.0 * rho * unit
        trace = integrate(
            single,
            GeodesicState(x=x0, p=v.copy()),
            radius,
            tol=integrator.rel_tol,
            atol=integrator.abs_tol,
            max_param=integrator.max_param,
            max_step_fraction=integrator.max_step_fraction,
            method=integrator.method,
        )
        fractions = np.linspace(0.0, 1.0, SCAN_SUBSTEPS, endpoint=False)
        t = trace.t
        grid = np.append((t[:-1, None] + np.diff(t)[:, None] * fractions).ravel(), t[-1])
        xs, ps = trace.state_at(grid)
        expected = v + hf.epsilon * hf.bs.gradients(xs)[:, root, :]
        worst = max(worst, float(np.max(np.linalg.norm(ps - expected, axis=1))))
        worst_angle = max(worst_angle, trace.angular_deviation)
    return SectionResidual(root=root, rays=len(offsets), max_residual=worst, max_exit_angle=worst_angle)


def verify_energy(
    hf: HamiltonianField,
    points: int = 10_000,
    section_rays: int = 5,
    seed: int = 7,
    thresholds: ThresholdSettings | None = None,
    integrator: IntegratorSettings | None = None,
    executor: BatchExecutor | None = None,
) -> EnergyReport:
    thresholds = thresholds or ThresholdSettings()
    integrator = integrator or IntegratorSettings()
    executor = executor or BatchExecutor(label="energy")

    grid_points, level = level_deviation(hf, points)
    pushed_points, pushed = pushed_deviation(hf, max(1, points // 100), seed)
    sections: List[SectionResidual] = executor.map_strict(
        lambda k: section_invariance(hf, k, section_rays, integrator),
        range(hf.rs.N),
    )
    max_section = max(s.max_residual for s in sections)
    max_angle = max(s.max_exit_angle for s in sections)

    passed = (
        level <= thresholds.energy_level
        and pushed <= thresholds.energy_level
        and max_section <= thresholds.section
        and max_angle <= thresholds.angular
    )
    report = EnergyReport(
        grid_points=grid_points,
        max_level_deviation=level,
        pushed_points=pushed_points,
        max_pushed_deviation=pushed,
        sections=sections,
        max_section_residual=max_section,
        thresholds={
            "energy_level": thresholds.energy_level,
            "section": thresholds.section,
            "angular": thresholds.angular,
        },
        passed=passed,
    )
    logger.info(
        f"Energy: {'pass' if passed else 'FAIL'}",
        name="verify.energy",
        max_level_deviation=level,
        max_pushed_deviation=pushed,
        max_section_residual=max_section,
    )
    return report
