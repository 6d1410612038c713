"""
Riemann curvature of the metric G = H^{-1} by central finite differences,
and the non-flatness suite built on it.
"""

from typing import Tuple

import numpy as np

from rootcloak.config import ThresholdSettings
from rootcloak.geometry.metricfield import HamiltonianField, metric_tensor
from rootcloak.logging.logger import get_logger
from rootcloak.verify.obstruction import scan_obstruction
from rootcloak.verify.report import CurvatureSample, FlatnessReport

logger = get_logger(__name__)

NOISE_FLOOR_MIN = 1e-6


def christoffel(hf: HamiltonianField, x: np.ndarray, h: float) -> np.ndarray:
    """Gamma[i, j, k] = 1/2 g^{il} (d_j g_lk + d_k g_lj - d_l g_jk)."""
    n = hf.n
    eye = np.eye(n)
    dg = np.empty((n, n, n))
    for c in range(n):
        dg[:, :, c] = (metric_tensor(hf, x + h * eye[c]) - metric_tensor(hf, x - h * eye[c])) / (2.0 * h)
    g_inv = np.linalg.inv(metric_tensor(hf, x))
    # dg[a, b, c] = d_c g_ab
    combined = dg.transpose(0, 2, 1) + dg - dg.transpose(2, 0, 1)
    return 0.5 * np.einsum("il,ljk->ijk", g_inv, combined)


def riemann_tensor(hf: HamiltonianField, x: np.ndarray, fd_step: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    R[i, j, k, l] = R^i_jkl = d_k Gamma^i_lj - d_l Gamma^i_kj + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj.

    Uses points within 2 * fd_step of x. Returns (R, G at x).
    """
    x = np.asarray(x, dtype=float)
    n = hf.n
    eye = np.eye(n)
    gamma = christoffel(hf, x, fd_step)
    d_gamma = np.empty((n, n, n, n))
    for m in range(n):
        d_gamma[m] = (christoffel(hf, x + fd_step * eye[m], fd_step) - christoffel(hf, x - fd_step * eye[m], fd_step)) / (
            2.0 * fd_step
        )
    R = (
        np.einsum("kilj->ijkl", d_gamma)
        - np.einsum("likj->ijkl", d_gamma)
        + np.einsum("ikm,mlj->ijkl", gamma, gamma)
        - np.einsum("ilm,mkj->ijkl", gamma, gamma)
    )
    return R, metric_tensor(hf, x)


def symmetry_residual(R_lowered: np.ndarray) -> float:
    """Largest violation of R_ijkl = -R_jikl = -R_ijlk = R_klij."""
    return float(
        max(
            np.max(np.abs(R_lowered + R_lowered.transpose(1, 0, 2, 3))),
            np.max(np.abs(R_lowered + R_lowered.transpose(0, 1, 3, 2))),
            np.max(np.abs(R_lowered - R_lowered.transpose(2, 3, 0, 1))),
        )
    )


def curvature(hf: HamiltonianField, x: np.ndarray, fd_step: float) -> CurvatureSample:
    """max |R^i_jkl|, scalar curvature and the symmetry residual at x."""
    R, G = riemann_tensor(hf, x, fd_step)
    lowered = np.einsum("ia,ajkl->ijkl", G, R)
    ricci = np.einsum("ijil->jl", R)
    scalar = float(np.einsum("jl,jl->", np.linalg.inv(G), ricci))
    return CurvatureSample(
        x=np.asarray(x, dtype=float).tolist(),
        fd_step=fd_step,
        max_riemann=float(np.max(np.abs(R))),
        scalar=scalar,
        symmetry_residual=symmetry_residual(lowered),
    )


def sample_point(hf: HamiltonianField) -> np.ndarray:
    """Off-centre point of the base ball, where the bump derivatives are large."""
    point = np.array(hf.bs.center, dtype=float)
    point[0] += 0.4 * hf.radius
    return point


def outside_point(hf: HamiltonianField) -> np.ndarray:
    """A point at distance >= 2 rho from every ball centre."""
    point = np.zeros(hf.n)
    point[0] = hf.obstacle_radius + hf.radius
    return point


def verify_flatness(
    hf: HamiltonianField,
    fd_step_fraction: float = 1e-3,
    obstruction_grid: int = 41,
    thresholds: ThresholdSettings | None = None,
) -> FlatnessReport:
    """
    Curvature at the sample point against the eps = 0 noise floor of the same stencil.

    The lower bound on curvature is only asserted when some pair obstruction is
    nonzero; a vanishing obstruction does not imply flatness, so nothing is
    asserted in that case beyond the flat-limit checks.
    """
    thresholds = thresholds or ThresholdSettings()
    step = fd_step_fraction * hf.radius
    sample = curvature(hf, sample_point(hf), step)
    flat = curvature(hf.with_epsilon(0.0), sample_point(hf), step)
    outside = curvature(hf, outside_point(hf), step)
    obstruction = scan_obstruction(hf, obstruction_grid, thresholds.obstruction)

    noise_floor = max(flat.max_riemann, NOISE_FLOOR_MIN)
    # truncation error of the nested stencil, bounded by fd_step_fraction relative to the tensor
    symmetry_tolerance = 10.0 * max(noise_floor, fd_step_fraction * sample.max_riemann)
    claimed = obstruction.nonzero and hf.epsilon > 0

    passed = (
        flat.max_riemann <= NOISE_FLOOR_MIN
        and outside.max_riemann <= NOISE_FLOOR_MIN
        and sample.symmetry_residual <= symmetry_tolerance
        and (not claimed or sample.max_riemann > thresholds.curvature_floor_ratio * noise_floor)
    )
    report = FlatnessReport(
        sample=sample,
        flat=flat,
        outside=outside,
        noise_floor=noise_floor,
        floor_ratio=sample.max_riemann / noise_floor,
        claimed=claimed,
        obstruction=obstruction,
        symmetry_tolerance=symmetry_tolerance,
        passed=passed,
    )
    logger.info(
        f"Flatness: {'pass' if passed else 'FAIL'}",
        name="verify.flatness",
        max_riemann=sample.max_riemann,
        noise_floor=noise_floor,
        claimed=claimed,
    )
    return report
