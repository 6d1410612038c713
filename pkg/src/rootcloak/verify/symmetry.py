"""Every root reflection must be an isometry: H(s x) = s H(x) s^T."""

import numpy as np

from rootcloak.executor.executor import BatchExecutor
from rootcloak.geometry.metricfield import HamiltonianField, evaluate
from rootcloak.geometry.rootsys import reflection
from rootcloak.logging.logger import get_logger
from rootcloak.verify.report import SymmetryReport

logger = get_logger(__name__)


def sample_points(hf: HamiltonianField, samples: int, seed: int) -> np.ndarray:
    """
    Half uniform in the obstacle's bounding box, half uniform inside randomly
    chosen balls, so the interior where H differs from the identity is well covered.
    """
    rng = np.random.default_rng(seed)
    n = hf.n
    extent = hf.obstacle_radius
    in_box = samples // 2
    in_balls = samples - in_box
    box = rng.uniform(-extent, extent, size=(in_box, n))

    centers = hf.centers[rng.integers(0, len(hf.pieces), size=in_balls)]
    directions = rng.normal(size=(in_balls, n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = hf.radius * rng.uniform(0.0, 1.0, size=in_balls) ** (1.0 / n)
    return np.vstack([box, centers + radii[:, None] * directions])


def equivariance_residual(hf: HamiltonianField, s: np.ndarray, points: np.ndarray) -> float:
    """max over points of the Frobenius norm of H(s x) - s H(x) s^T."""
    worst = 0.0
    for x in points:
        H = evaluate(hf, x, derivatives=False).H
        H_image = evaluate(hf, s @ x, derivatives=False).H
        worst = max(worst, float(np.linalg.norm(H_image - s @ H @ s.T)))
    return worst


def verify_symmetry(
    hf: HamiltonianField,
    samples: int,
    seed: int = 7,
    threshold: float = 1e-10,
    executor: BatchExecutor | None = None,
) -> SymmetryReport:
    """Equivariance residual for each generating reflection over random points."""
    points = sample_points(hf, samples, seed)
    generators = [reflection(v) for v in hf.rs.roots]
    executor = executor or BatchExecutor(label="symmetry")
    residuals = executor.map_strict(lambda s: equivariance_residual(hf, s, points), generators)

    max_residual = max(residuals)
    report = SymmetryReport(
        samples=samples,
        per_generator=residuals,
        max_residual=max_residual,
        threshold=threshold,
        passed=max_residual <= threshold,
    )
    logger.info(
        f"Symmetry: {'pass' if report.passed else 'FAIL'}",
        name="verify.symmetry",
        max_residual=max_residual,
    )
    return report
