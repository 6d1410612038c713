"""
First-order flatness obstruction.

If the metric were flat, for every pair k < l the combination
phi_kl - (phi_k - phi_l) would have zero derivative along v_k + v_l. A nonzero
value anywhere certifies the metric is not flat.
"""

from typing import List, Tuple

import numpy as np

from rootcloak.core.exceptions import ConfigInvalid
from rootcloak.geometry.bumps import degenerate_pairs
from rootcloak.geometry.metricfield import HamiltonianField
from rootcloak.logging.logger import get_logger
from rootcloak.verify.report import ObstructionReport, PairObstruction

logger = get_logger(__name__)


def _combined_gradient(hf: HamiltonianField, k: int, l: int, x: np.ndarray) -> np.ndarray:
    rs = hf.rs
    if not 0 <= k < l < rs.n:
        raise ConfigInvalid(f"Obstruction needs 0 <= k < l < n, got k={k}, l={l}", field="pair")
    kl = rs.pair_index[(k, l)]
    grads = hf.bs.gradients(x)
    return grads[..., kl, :] - grads[..., k, :] + grads[..., l, :]


def flatness_obstruction(hf: HamiltonianField, k: int, l: int, x: np.ndarray) -> float:
    """(grad(phi_kl - phi_k + phi_l)(x), v_k + v_l) at a base-frame point x; exactly 0 outside the support."""
    direction = hf.rs.roots[k] + hf.rs.roots[l]
    return float(_combined_gradient(hf, k, l, np.asarray(x, dtype=float)) @ direction)


def obstruction_grid(hf: HamiltonianField, resolution: int) -> np.ndarray:
    """resolution^n points covering the cube around the base ball."""
    n = hf.n
    axis = np.linspace(-hf.radius, hf.radius, resolution)
    mesh = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return hf.bs.center + mesh


def obstruction_values(hf: HamiltonianField, points: np.ndarray) -> Tuple[List[Tuple[int, int]], np.ndarray]:
    """
    Obstruction of every pair at every point.

    Returns the pairs (0-based, in pair_index order) and a (P, pairs) array.
    """
    pairs = sorted(hf.rs.pair_index, key=hf.rs.pair_index.get)
    columns = []
    for k, l in pairs:
        direction = hf.rs.roots[k] + hf.rs.roots[l]
        columns.append(_combined_gradient(hf, k, l, points) @ direction)
    values = np.stack(columns, axis=-1) if columns else np.zeros((points.shape[0], 0))
    return pairs, values


def scan_obstruction(hf: HamiltonianField, resolution: int = 41, threshold: float = 1e-6) -> ObstructionReport:
    """Largest |obstruction| per pair over a cube grid around the base ball."""
    points = obstruction_grid(hf, resolution)
    pairs, values = obstruction_values(hf, points)
    results = []
    for column, (k, l) in enumerate(pairs):
        index = int(np.argmax(np.abs(values[:, column])))
        results.append(
            PairObstruction(k=k + 1, l=l + 1, max_abs=float(abs(values[index, column])), at=points[index].tolist())
        )
    report = ObstructionReport(
        grid_points=points.shape[0],
        pairs=results,
        degenerate_pairs=[[k + 1, l + 1] for k, l in degenerate_pairs(hf.rs, hf.bs.amplitudes)],
        threshold=threshold,
    )
    logger.info(
        "Scanned flatness obstruction",
        name="verify.obstruction",
        nonzero=report.nonzero,
        max_abs=max((p.max_abs for p in results), default=0.0),
    )
    return report
