"""
The A_n root system in n-dimensional coordinates, its Weyl group, and the
orbit of a chamber point that places the balls.

Roots follow a fixed order. The first n are e_i - e_{n+1}; after them come
e_k - e_l for k < l <= n in lexicographic order, computed as v_k - v_l.
Every index in this module is 0-based.
"""

from dataclasses import dataclass
from itertools import combinations
from math import factorial
from typing import Dict, List, Tuple

import numpy as np
import scipy.spatial

from rootcloak.core.exceptions import ConfigInvalid, GeometryInvalid, GroupClosureError
from rootcloak.logging.logger import get_logger

logger = get_logger(__name__)

MATRIX_TOL = 1e-9
"""Two group elements closer than this (max-abs entry) are the same element."""


@dataclass(frozen=True, eq=False)
class RootSystem:
    """Positive roots of A_n written in an orthonormal basis of the hyperplane sum(x) = 0."""

    n: int
    roots: np.ndarray
    """(N, n) array; row i is v_{i+1}."""

    pair_index: Dict[Tuple[int, int], int]
    """(k, l) with 0 <= k < l < n -> row of v_k - v_l."""

    embedding: np.ndarray
    """(n, n+1) matrix with orthonormal rows spanning the hyperplane."""

    ambient: np.ndarray
    """(N, n+1) array of the e_a - e_b vectors the roots come from."""

    @property
    def N(self) -> int:
        return self.roots.shape[0]

    def gram(self) -> np.ndarray:
        return self.roots @ self.roots.T

    def match_root(self, vector: np.ndarray, tol: float = 1e-9) -> Tuple[int, int] | None:
        """(index, sign) with vector = sign * roots[index], or None."""
        for sign in (1, -1):
            distances = np.max(np.abs(self.roots - sign * vector), axis=1)
            index = int(np.argmin(distances))
            if distances[index] < tol:
                return index, sign
        return None


def _gram_schmidt_rows(vectors: np.ndarray) -> np.ndarray:
    """Orthonormalise rows in order, keeping each row's orientation (positive diagonal of R)."""
    q, r = np.linalg.qr(vectors.T)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return (q * signs).T


def build_roots(n: int) -> RootSystem:
    """
    Build the positive roots of A_n in R^n in the fixed order.

    Raises ConfigInvalid for n < 2.
    """
    if n < 2:
        raise ConfigInvalid(f"Dimension n must be at least 2, got {n}", field="n")

    eye = np.eye(n + 1)
    simple_ambient = np.array([eye[i] - eye[n] for i in range(n)])
    embedding = _gram_schmidt_rows(simple_ambient)

    first = simple_ambient @ embedding.T
    roots: List[np.ndarray] = [first[i] for i in range(n)]
    ambient: List[np.ndarray] = [simple_ambient[i] for i in range(n)]
    pair_index: Dict[Tuple[int, int], int] = {}
    for k, l in combinations(range(n), 2):
        pair_index[(k, l)] = len(roots)
        roots.append(roots[k] - roots[l])
        ambient.append(eye[k] - eye[l])

    rs = RootSystem(
        n=n,
        roots=np.array(roots),
        pair_index=pair_index,
        embedding=embedding,
        ambient=np.array(ambient),
    )
    logger.debug("Built root system", name="rootsys.built", n=n, N=rs.N)
    return rs


def reflection(v: np.ndarray) -> np.ndarray:
    """Orthogonal reflection in the hyperplane orthogonal to v."""
    return np.eye(v.shape[0]) - 2.0 * np.outer(v, v) / np.dot(v, v)


def dual_basis(rs: RootSystem) -> np.ndarray:
    """Rows u_i with (u_i, v_j) = delta_ij for the first n roots."""
    return np.linalg.inv(rs.roots[: rs.n].T)


def default_chamber_point(rs: RootSystem) -> np.ndarray:
    """
    Unit vector along sum_i (n - i) u_i (0-based i), the Weyl vector.

    Pairing with v_k - v_l gives c_k - c_l = l - k > 0, so the point is strictly
    inside the chamber of the positive roots.
    """
    coefficients = np.arange(rs.n, 0, -1, dtype=float)
    w = coefficients @ dual_basis(rs)
    return w / np.linalg.norm(w)


@dataclass(frozen=True, eq=False)
class WeylGroup:
    """The Weyl group as (n+1)! orthogonal matrices, element 0 being the identity."""

    elements: np.ndarray
    """((n+1)!, n, n) array."""

    generators: np.ndarray
    """(N, n, n) reflections s_{v_i}, in root order."""

    chamber_point: np.ndarray
    centers: np.ndarray
    """((n+1)!, n) orbit of chamber_point; centers[i] = elements[i] @ chamber_point."""

    @property
    def order(self) -> int:
        return self.elements.shape[0]

    def ball_permutation(self, g: np.ndarray) -> np.ndarray:
        """perm[i] = j where g @ centers[i] = centers[j]."""
        images = self.centers @ g.T
        tree = scipy.spatial.cKDTree(self.centers)
        distances, indices = tree.query(images)
        if np.max(distances) > 1e-8:
            raise GroupClosureError("Matrix does not permute the ball centers", f"largest mismatch {np.max(distances):.3e}")
        return indices.astype(int)

    def reflection_pairs(self, k: int) -> List[Tuple[int, int]]:
        """Ball index pairs (i, j), i < j, swapped by the k-th generator."""
        perm = self.ball_permutation(self.generators[k])
        return sorted({(min(i, int(j)), max(i, int(j))) for i, j in enumerate(perm)})


def _closure(generators: np.ndarray, expected: int) -> np.ndarray:
    """
    Breadth-first closure of the generators under multiplication.

    Each round multiplies every generator with every element of the frontier and
    keeps products not already present (distance below MATRIX_TOL).
    """
    n = generators.shape[1]
    elements = [np.eye(n)]
    frontier = [np.eye(n)]
    while frontier:
        tree = scipy.spatial.cKDTree(np.array(elements).reshape(len(elements), -1))
        products = np.einsum("aij,bjk->baik", generators, np.array(frontier)).reshape(-1, n, n)
        new_frontier: List[np.ndarray] = []
        for product in products:
            distance, _ = tree.query(product.reshape(-1))
            if distance < MATRIX_TOL:
                continue
            if any(np.max(np.abs(product - other)) < MATRIX_TOL for other in new_frontier):
                continue
            new_frontier.append(product)
        elements.extend(new_frontier)
        frontier = new_frontier
        if len(elements) > expected:
            raise GroupClosureError(
                f"Reflection closure exceeded (n+1)! = {expected} elements",
                "The generator matrices are not the A_n reflections; check the root construction.",
            )
    if len(elements) != expected:
        raise GroupClosureError(f"Reflection closure stopped at {len(elements)} elements, expected {expected}")
    return np.array(elements)


def build_weyl_group(rs: RootSystem, chamber_point: np.ndarray | None = None) -> WeylGroup:
    """
    Generate the Weyl group from the root reflections and the ball centers.

    Raises GroupClosureError if the closure does not have (n+1)! elements and
    GeometryInvalid if the chamber point is not strictly inside the chamber.
    """
    generators = np.array([reflection(v) for v in rs.roots])
    expected = factorial(rs.n + 1)
    elements = _closure(generators, expected)

    point = default_chamber_point(rs) if chamber_point is None else np.asarray(chamber_point, dtype=float)
    if point.shape != (rs.n,):
        raise ConfigInvalid(f"chamber_point must have {rs.n} coordinates", field="chamber_point")
    pairings = rs.roots @ point
    if np.any(pairings <= 0):
        bad = int(np.argmin(pairings))
        raise GeometryInvalid(
            "Chamber point is not strictly inside the fundamental chamber",
            f"(chamber_point, v_{bad + 1}) = {pairings[bad]:.6g}; every positive root must pair positively.",
        )

    centers = elements @ point
    group = WeylGroup(
        elements=elements,
        generators=generators,
        chamber_point=point,
        centers=centers,
    )
    logger.debug("Built Weyl group", name="rootsys.group", order=group.order)
    return group

