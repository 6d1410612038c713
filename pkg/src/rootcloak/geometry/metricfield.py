"""
The Hamiltonian matrix field H(x).

On the base ball the N unknowns h_ab (a <= b, lexicographic) solve the N
equations (H w_i, w_i) = 2 with w_i = v_i + eps * grad phi_i(x). Every other
ball carries the pushforward R H(R^T x) R^T of the base solution, and outside
all balls H is the identity.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, computed_field

from rootcloak.core.exceptions import GeometryInvalid, NotPositiveDefinite, SingularSystem, ThresholdNotFound
from rootcloak.event_progress import ProgressAction
from rootcloak.geometry.bumps import BumpSet
from rootcloak.geometry.rootsys import RootSystem, WeylGroup
from rootcloak.logging.logger import get_logger

logger = get_logger(__name__)

CONDITION_LIMIT = 1e12
RESIDUAL_LIMIT = 1e-10
CONDITION_SPREAD = 2.0
"""Admissible eps keep every base-ball condition number within a factor sqrt(2) of the flat one."""
COLLINEAR_TOL = 1e-9


class SolveReport(BaseModel):
    """Diagnostics of one pointwise solve."""

    condition_number: float
    residual: float
    min_eigenvalue: float
    ball: int = -1
    """Index of the ball containing the point, -1 outside all balls."""


@dataclass(frozen=True, eq=False)
class Piece:
    """One ball of the obstacle: its center and the rotation carrying the base ball onto it."""

    center: np.ndarray
    rotation: np.ndarray


@dataclass(frozen=True, eq=False)
class FieldSample:
    H: np.ndarray
    dH: np.ndarray | None
    """(n, n, n) array, dH[m] = dH/dx_m."""

    ball: int


@dataclass(frozen=True, eq=False)
class HamiltonianField:
    """Immutable description of the metric; every evaluation is a pure function of it."""

    rs: RootSystem
    bs: BumpSet
    epsilon: float
    group: WeylGroup | None
    pieces: Tuple[Piece, ...]

    @classmethod
    def build(cls, rs: RootSystem, bs: BumpSet, epsilon: float, group: WeylGroup) -> "HamiltonianField":
        """One piece per group element, ball i centred at group.centers[i]."""
        pieces = tuple(Piece(center=c, rotation=R) for c, R in zip(group.centers, group.elements))
        return cls(rs=rs, bs=bs, epsilon=float(epsilon), group=group, pieces=pieces)

    @classmethod
    def single_ball(cls, rs: RootSystem, bs: BumpSet, epsilon: float) -> "HamiltonianField":
        """Only the base ball, before symmetrisation."""
        piece = Piece(center=np.asarray(bs.center, dtype=float), rotation=np.eye(rs.n))
        return cls(rs=rs, bs=bs, epsilon=float(epsilon), group=None, pieces=(piece,))

    def with_epsilon(self, epsilon: float) -> "HamiltonianField":
        return HamiltonianField(rs=self.rs, bs=self.bs, epsilon=float(epsilon), group=self.group, pieces=self.pieces)

    def with_pieces(self, pieces: Tuple[Piece, ...]) -> "HamiltonianField":
        return HamiltonianField(rs=self.rs, bs=self.bs, epsilon=self.epsilon, group=self.group, pieces=pieces)

    @property
    def n(self) -> int:
        return self.rs.n

    @property
    def radius(self) -> float:
        return self.bs.radius

    @property
    def centers(self) -> np.ndarray:
        return np.array([piece.center for piece in self.pieces])

    @property
    def obstacle_radius(self) -> float:
        """Radius of the smallest origin-centred sphere containing every ball."""
        return float(np.max(np.linalg.norm(self.centers, axis=1)) + self.radius)

    def locate(self, x: np.ndarray) -> int:
        """Index of the ball containing x (open ball), -1 if none."""
        distances = np.linalg.norm(self.centers - x, axis=1)
        index = int(np.argmin(distances))
        return index if distances[index] < self.radius else -1

    def to_base(self, x: np.ndarray, ball: int) -> np.ndarray:
        piece = self.pieces[ball]
        return piece.rotation.T @ (x - piece.center) + self.bs.center


@lru_cache(maxsize=None)
def _triu(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    ia, ib = np.triu_indices(n)
    multiplicity = np.where(ia == ib, 1.0, 2.0)
    return ia, ib, multiplicity


def unknown_labels(n: int) -> List[str]:
    """Column labels h_ab (1-based, a <= b) in unknown order."""
    ia, ib, _ = _triu(n)
    return [f"h_{a + 1}{b + 1}" for a, b in zip(ia, ib)]


def _coefficients(W: np.ndarray) -> np.ndarray:
    """Row i holds the coefficients of (H w_i, w_i) in the unknowns; W has shape (..., N, n)."""
    ia, ib, multiplicity = _triu(W.shape[-1])
    return W[..., ia] * W[..., ib] * multiplicity


def _unpack(h: np.ndarray, n: int) -> np.ndarray:
    ia, ib, _ = _triu(n)
    H = np.zeros(h.shape[:-1] + (n, n))
    H[..., ia, ib] = h
    H[..., ib, ia] = h
    return H


def section_covectors(hf: HamiltonianField, y: np.ndarray) -> np.ndarray:
    """w_i(y) = v_i + eps grad phi_i(y) for all i; shape (..., N, n)."""
    return hf.rs.roots + hf.epsilon * hf.bs.gradients(y)


def assemble_system(hf: HamiltonianField, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    The N x N system A vec(H) = b at a point x of the base-ball frame.

    Coefficient of h_aa in row i is w_i[a]^2, of h_ab (a < b) it is 2 w_i[a] w_i[b];
    every right-hand side entry is 2.
    """
    W = section_covectors(hf, np.asarray(x, dtype=float))
    A = _coefficients(W)
    b = np.full(A.shape[:-1], 2.0)
    return A, b


@lru_cache(maxsize=None)
def flat_condition_number(n: int) -> float:
    """Condition number of the eps = 0 system; depends on n only."""
    from rootcloak.geometry.rootsys import build_roots

    return float(np.linalg.cond(_coefficients(build_roots(n).roots)))


def _solve_base(hf: HamiltonianField, y: np.ndarray, diagnostics: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray, SolveReport | None]:
    """Solve at a base-frame point; returns (H, A, h, report)."""
    A, b = assemble_system(hf, y)
    condition = float(np.linalg.cond(A)) if diagnostics else float("nan")
    if diagnostics and not condition < CONDITION_LIMIT:
        raise SingularSystem(
            "Metric system is numerically singular",
            f"condition number {condition:.3e} exceeds {CONDITION_LIMIT:.0e} at {np.array2string(y, precision=6)}; "
            "epsilon is probably too large for the bump data.",
            condition_number=condition,
        )
    try:
        h = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as e:
        raise SingularSystem("Metric system is singular", str(e), condition_number=float("inf")) from e

    residual = float(np.max(np.abs(A @ h - b)))
    if not residual <= RESIDUAL_LIMIT:
        raise SingularSystem(
            "Metric system solve is inaccurate",
            f"residual {residual:.3e} exceeds {RESIDUAL_LIMIT:.0e}",
            condition_number=condition,
        )
    H = _unpack(h, hf.n)
    min_eigenvalue = float(np.linalg.eigvalsh(H)[0])
    if min_eigenvalue <= 0:
        raise NotPositiveDefinite(
            "Solved H is not positive definite",
            f"min eigenvalue {min_eigenvalue:.3e}; epsilon is above the admissible threshold.",
            min_eigenvalue=min_eigenvalue,
        )
    report = SolveReport(condition_number=condition, residual=residual, min_eigenvalue=min_eigenvalue) if diagnostics else None
    return H, A, h, report


def _base_derivatives(hf: HamiltonianField, y: np.ndarray, A: np.ndarray, h: np.ndarray) -> np.ndarray:
    """
    d vec(H) / dy_j = -A^{-1} (dA/dy_j) vec(H); returns (n, n, n) with index j first.
    """
    n = hf.n
    ia, ib, multiplicity = _triu(n)
    W = section_covectors(hf, y)
    # dW[j, i, a] = eps * d^2 phi_i / dy_a dy_j
    dW = hf.epsilon * np.moveaxis(hf.bs.hessians(y), -1, 0)
    dA = multiplicity * (dW[..., ia] * W[:, ib] + W[:, ia] * dW[..., ib])
    rhs = -np.einsum("jik,k->ij", dA, h)
    dh = np.linalg.solve(A, rhs).T
    return _unpack(dh, n)


def evaluate(hf: HamiltonianField, x: np.ndarray, derivatives: bool = True) -> FieldSample:
    """H and (optionally) all first derivatives at x, without the diagnostic SVD."""
    x = np.asarray(x, dtype=float)
    n = hf.n
    ball = hf.locate(x)
    if ball < 0 or hf.epsilon == 0.0:
        return FieldSample(H=np.eye(n), dH=np.zeros((n, n, n)) if derivatives else None, ball=ball)

    piece = hf.pieces[ball]
    R = piece.rotation
    y = hf.to_base(x, ball)
    H_base, A, h, _ = _solve_base(hf, y, diagnostics=False)
    H = R @ H_base @ R.T
    if not derivatives:
        return FieldSample(H=H, dH=None, ball=ball)

    dH_base = _base_derivatives(hf, y, A, h)
    # dy_j/dx_m = R[m, j]
    T = np.einsum("mj,jab->mab", R, dH_base)
    dH = np.einsum("ia,mab,kb->mik", R, T, R)
    return FieldSample(H=H, dH=dH, ball=ball)


def solve_H(hf: HamiltonianField, x: np.ndarray) -> Tuple[np.ndarray, SolveReport]:
    """
    H(x) with diagnostics. Identity outside every ball.

    Raises SingularSystem (condition number above 1e12) or NotPositiveDefinite.
    """
    x = np.asarray(x, dtype=float)
    n = hf.n
    ball = hf.locate(x)
    if ball < 0:
        return np.eye(n), SolveReport(condition_number=flat_condition_number(n), residual=0.0, min_eigenvalue=1.0, ball=-1)

    piece = hf.pieces[ball]
    H_base, _, _, report = _solve_base(hf, hf.to_base(x, ball), diagnostics=True)
    report.ball = ball
    return piece.rotation @ H_base @ piece.rotation.T, report


def dH(hf: HamiltonianField, x: np.ndarray, m: int) -> np.ndarray:
    """dH/dx_m at x; zero outside every bump support."""
    sample = evaluate(hf, x, derivatives=True)
    return sample.dH[m]


def metric_tensor(hf: HamiltonianField, x: np.ndarray) -> np.ndarray:
    """G = H^{-1}, the Riemannian metric itself."""
    sample = evaluate(hf, x, derivatives=False)
    if sample.ball < 0:
        return np.eye(hf.n)
    return np.linalg.inv(sample.H)


def base_ball_grid(bs: BumpSet, resolution: int) -> np.ndarray:
    """Points of a resolution^n cube grid over the base ball that lie strictly inside it."""
    n = bs.center.shape[0]
    axis = np.linspace(-bs.radius, bs.radius, resolution)
    mesh = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    inside = np.linalg.norm(mesh, axis=1) < bs.radius
    return bs.center + mesh[inside]


def solve_batch(hf: HamiltonianField, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Base-frame solves at many points without raising.

    Returns (H, condition, min_eigenvalue); singular points get H = nan and condition = inf.
    """
    A, b = assemble_system(hf, Y)
    condition = np.linalg.cond(A)
    good = np.isfinite(condition) & (condition < CONDITION_LIMIT)
    h = np.full(b.shape, np.nan)
    if np.any(good):
        h[good] = np.linalg.solve(A[good], b[good][..., None])[..., 0]
    H = _unpack(h, hf.n)
    min_eigenvalue = np.full(b.shape[0], -np.inf)
    if np.any(good):
        min_eigenvalue[good] = np.linalg.eigvalsh(H[good])[:, 0]
    condition = np.where(good, condition, np.inf)
    return H, condition, min_eigenvalue


def condition_profile(hf: HamiltonianField, resolution: int = 15) -> Tuple[float, float, float]:
    """(flat condition, min and max condition over the base ball at hf.epsilon)."""
    _, condition, _ = solve_batch(hf, base_ball_grid(hf.bs, resolution))
    return flat_condition_number(hf.n), float(np.min(condition)), float(np.max(condition))


def max_admissible_epsilon(
    rs: RootSystem,
    bs: BumpSet,
    grid_resolution: int = 15,
    lower: float = 1e-6,
    upper: float = 2.0,
    iterations: int = 30,
    min_eigenvalue: float = 0.01,
    safety: float = 0.5,
) -> float:
    """
    Largest eps in (0, upper] for which every grid solve succeeds with min eig(H) > min_eigenvalue
    and a condition number within CONDITION_SPREAD of the flat one, found by bisection and
    returned times `safety`.

    If eps = upper already passes the construction is not limited by the search
    range and upper is returned unchanged.
    Raises ThresholdNotFound when even eps = lower fails.
    """
    grid = base_ball_grid(bs, grid_resolution)
    field = HamiltonianField.single_ball(rs, bs, 0.0)
    flat = float(np.linalg.cond(_coefficients(rs.roots)))
    spread = np.sqrt(CONDITION_SPREAD)

    def admissible(epsilon: float) -> bool:
        _, condition, eig = solve_batch(field.with_epsilon(epsilon), grid)
        if not (np.all(np.isfinite(condition)) and np.all(eig > min_eigenvalue)):
            return False
        return bool(np.all(condition < flat * spread) and np.all(condition > flat / spread))

    if admissible(upper):
        logger.info("Whole epsilon range admissible", name="epsilon.unbounded", upper=upper)
        return float(upper)
    if not admissible(lower):
        raise ThresholdNotFound(
            "No admissible epsilon found",
            f"epsilon = {lower:g} already violates min eig(H) > {min_eigenvalue:g} or the conditioning bound on the base ball; the bump data is pathological.",
        )

    lo, hi = lower, upper
    for step in range(iterations):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
        logger.debug(
            "Bisecting epsilon",
            name="epsilon.bisect",
            progress_action=ProgressAction.BISECTING,
            target="epsilon-max",
            completed=step + 1,
            total=iterations,
            lo=lo,
            hi=hi,
        )
    logger.info("Admissible epsilon found", name="epsilon.found", threshold=lo, conservative=lo * safety)
    return float(lo * safety)


# Geometry of the ball layout


class ConditionResult(BaseModel):
    name: str
    passed: bool
    margin: float
    """Smallest separation minus its bound; negative when violated."""

    violation: List[int] | None = None
    """Violating ball indices (0-based): a pair, two pairs, or a triple."""

    root: int | None = None
    """Root index for per-root conditions."""


class GeometryReport(BaseModel):
    radius: float
    balls: int
    conditions: List[ConditionResult]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, name: str) -> ConditionResult:
        return next(c for c in self.conditions if c.name == name)


def _segment_distance(p0: np.ndarray, p1: np.ndarray, q0: np.ndarray, q1: np.ndarray) -> float:
    """Closest distance between segments [p0, p1] and [q0, q1] in R^n."""
    u, v, w = p1 - p0, q1 - q0, p0 - q0
    a, b, c, d, e = u @ u, u @ v, v @ v, u @ w, v @ w
    denom = a * c - b * b
    s = 0.0 if denom < 1e-15 else float(np.clip((b * e - c * d) / denom, 0.0, 1.0))
    t = float(np.clip((b * s + e) / c, 0.0, 1.0)) if c > 0 else 0.0
    s = float(np.clip((b * t - d) / a, 0.0, 1.0)) if a > 0 else 0.0
    return float(np.linalg.norm(p0 + s * u - q0 - t * v))


def _perpendicular(points: np.ndarray, v: np.ndarray) -> np.ndarray:
    unit = v / np.linalg.norm(v)
    return points - np.outer(points @ unit, unit)


def auto_radius(rs: RootSystem, group: WeylGroup, fraction: float = 0.9) -> float:
    """
    fraction * 1/2 * the smallest of
      - the distance between the two centres of any reflection pair, and
      - for every root, the distance between distinct pair axes (lines parallel to the root).
    """
    separations: List[float] = []
    for k, v in enumerate(rs.roots):
        pairs = group.reflection_pairs(k)
        feet = _perpendicular(group.centers, v)
        axes = np.array([feet[i] for i, _ in pairs])
        separations.extend(float(np.linalg.norm(group.centers[i] - group.centers[j])) for i, j in pairs)
        for a, b in combinations(range(len(axes)), 2):
            separations.append(float(np.linalg.norm(axes[a] - axes[b])))
    return fraction * 0.5 * min(separations)


def validate_geometry(hf: HamiltonianField) -> GeometryReport:
    """
    Check the small-ball conditions:
      balls_disjoint      every two balls are disjoint
      pair_hulls_disjoint for each root, the convex hulls of the reflection pairs are disjoint
      no_three_collinear  no three centres on a line
      corridors_disjoint  for each root, the cylinders around the pair axes are disjoint,
                          so a line along the root meets no ball or exactly one pair
    """
    if hf.group is None:
        raise GeometryInvalid("Geometry validation needs the full Weyl-symmetric field")
    centers = hf.centers
    radius = hf.radius
    count = centers.shape[0]
    conditions: List[ConditionResult] = []

    distances = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
    np.fill_diagonal(distances, np.inf)
    i, j = np.unravel_index(np.argmin(distances), distances.shape)
    margin = float(distances[i, j] - 2 * radius)
    conditions.append(
        ConditionResult(name="balls_disjoint", passed=margin > 0, margin=margin, violation=None if margin > 0 else [int(i), int(j)])
    )

    worst_hull: ConditionResult | None = None
    worst_corridor: ConditionResult | None = None
    for k, v in enumerate(hf.rs.roots):
        pairs = hf.group.reflection_pairs(k)
        feet = _perpendicular(centers, v)
        for (a0, a1), (b0, b1) in combinations(pairs, 2):
            gap = _segment_distance(centers[a0], centers[a1], centers[b0], centers[b1]) - 2 * radius
            if worst_hull is None or gap < worst_hull.margin:
                worst_hull = ConditionResult(name="pair_hulls_disjoint", passed=gap > 0, margin=gap, violation=[a0, a1, b0, b1], root=k)
            gap = float(np.linalg.norm(feet[a0] - feet[b0])) - 2 * radius
            if worst_corridor is None or gap < worst_corridor.margin:
                worst_corridor = ConditionResult(name="corridors_disjoint", passed=gap > 0, margin=gap, violation=[a0, a1, b0, b1], root=k)
    for worst, name in ((worst_hull, "pair_hulls_disjoint"), (worst_corridor, "corridors_disjoint")):
        if worst is None:
            conditions.append(ConditionResult(name=name, passed=True, margin=float("inf")))
        else:
            if worst.passed:
                worst = worst.model_copy(update={"violation": None, "root": None})
            conditions.append(worst)

    conditions.append(_collinearity(centers))
    report = GeometryReport(radius=radius, balls=count, conditions=conditions)
    logger.info(
        "Validated ball geometry",
        name="geometry.validated",
        passed=report.passed,
        **{c.name: c.passed for c in conditions},
    )
    return report


def _collinearity(centers: np.ndarray) -> ConditionResult:
    """Smallest triangle area over all centre triples (Gram determinant test)."""
    count = centers.shape[0]
    smallest = float("inf")
    worst: List[int] | None = None
    for a, b in combinations(range(count), 2):
        u = centers[b] - centers[a]
        rest = np.arange(b + 1, count)
        if rest.size == 0:
            continue
        w = centers[rest] - centers[a]
        gram = (u @ u) * np.einsum("ij,ij->i", w, w) - (w @ u) ** 2
        area = 0.5 * np.sqrt(np.maximum(gram, 0.0))
        index = int(np.argmin(area))
        if area[index] < smallest:
            smallest = float(area[index])
            worst = [a, b, int(rest[index])]
    passed = smallest > COLLINEAR_TOL
    return ConditionResult(name="no_three_collinear", passed=passed, margin=smallest - COLLINEAR_TOL, violation=None if passed else worst)
