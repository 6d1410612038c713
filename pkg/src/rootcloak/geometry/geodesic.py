"""
Hamiltonian geodesic flow of h(x, p) = 1/2 (H(x) p, p).

The flow is x' = H p, p'_m = -1/2 (dH/dx_m p, p), integrated with scipy's
embedded Runge-Kutta pairs (DOP853 by default) with dense output. A trace runs
from a launch point outside the obstacle until it leaves the bounding sphere
moving outward.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from rootcloak.core.exceptions import EscapeFailure, GeometryInvalid, StepFailure
from rootcloak.geometry.metricfield import HamiltonianField, evaluate
from rootcloak.logging.logger import get_logger

logger = get_logger(__name__)

CROSSING_XTOL = 1e-10
SCAN_SUBSTEPS = 8
"""Dense-output samples per accepted step when scanning for ball crossings."""


@dataclass(frozen=True, eq=False)
class GeodesicState:
    x: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def energy(self, hf: HamiltonianField) -> float:
        H = evaluate(hf, self.x, derivatives=False).H
        return 0.5 * float(self.p @ H @ self.p)


@dataclass(frozen=True, eq=False)
class Line:
    """A straight line through `point` with unit `direction`."""

    point: np.ndarray
    direction: np.ndarray

    @classmethod
    def through(cls, point: np.ndarray, direction: np.ndarray) -> "Line":
        direction = np.asarray(direction, dtype=float)
        return cls(point=np.asarray(point, dtype=float), direction=direction / np.linalg.norm(direction))

    def distance_to(self, x: np.ndarray) -> float:
        """Euclidean distance from x to the line."""
        offset = x - self.point
        return float(np.linalg.norm(offset - (offset @ self.direction) * self.direction))


def angle_between(a: np.ndarray, b: np.ndarray) -> float:
    """Angle between unit vectors, accurate near 0 and pi."""
    return float(2.0 * np.arctan2(np.linalg.norm(a - b), np.linalg.norm(a + b)))


@dataclass(frozen=True, eq=False)
class BallCrossing:
    ball: int
    t_in: float
    t_out: float | None
    """None if the trace ended inside the ball, which a valid trace never does."""


@dataclass(frozen=True, eq=False)
class TraceResult:
    t: np.ndarray
    xs: np.ndarray
    """(M, n) positions at the accepted steps."""

    ps: np.ndarray
    entry_line: Line
    exit_line: Line
    crossings: List[BallCrossing]
    energy_drift: float
    time_delay: float
    """Exit parameter minus the parameter a straight line needs to reach the same sphere."""

    solution: object = field(repr=False)
    """scipy OdeSolution, the dense output of the trace."""

    @property
    def balls_crossed(self) -> List[int]:
        return [c.ball for c in self.crossings]

    @property
    def final(self) -> GeodesicState:
        return GeodesicState(x=self.xs[-1], p=self.ps[-1], t=float(self.t[-1]))

    @property
    def lateral_deviation(self) -> float:
        """Distance from the exit point to the entry line."""
        return self.entry_line.distance_to(self.exit_line.point)

    @property
    def angular_deviation(self) -> float:
        return angle_between(self.entry_line.direction, self.exit_line.direction)

    def state_at(self, t: float | np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(x, p) from the dense output; for an array of times the shapes are (M, n)."""
        n = self.xs.shape[1]
        y = self.solution(t)
        return y[:n].T, y[n:].T

    def polyline(self) -> List[GeodesicState]:
        return [GeodesicState(x=x, p=p, t=float(t)) for t, x, p in zip(self.t, self.xs, self.ps)]


def hamilton_rhs(hf: HamiltonianField, s: GeodesicState) -> Tuple[np.ndarray, np.ndarray]:
    """dx = H p and dp_m = -1/2 p^T (dH/dx_m) p."""
    sample = evaluate(hf, s.x, derivatives=True)
    dx = sample.H @ s.p
    dp = -0.5 * np.einsum("mab,a,b->m", sample.dH, s.p, s.p)
    return dx, dp


def bounding_radius(hf: HamiltonianField) -> float:
    """Radius of the sphere on which traces stop: twice the obstacle radius plus a margin."""
    return 2.0 * (hf.obstacle_radius + hf.radius)


def launch_distance(hf: HamiltonianField) -> float:
    """How far behind the obstacle's plane of symmetry entry points are placed."""
    return hf.obstacle_radius + hf.radius


def launch_state(direction: np.ndarray, offset: np.ndarray, distance: float) -> GeodesicState:
    """
    Entry state on the line offset + s * direction, `distance` before the
    hyperplane through the origin, with momentum sqrt(2) * direction so h = 1
    outside the obstacle.
    """
    unit = np.asarray(direction, dtype=float)
    unit = unit / np.linalg.norm(unit)
    offset = np.asarray(offset, dtype=float)
    offset = offset - (offset @ unit) * unit
    return GeodesicState(x=offset - distance * unit, p=np.sqrt(2.0) * unit)


def _euclidean_exit_parameter(x0: np.ndarray, velocity: np.ndarray, radius: float) -> float:
    a = velocity @ velocity
    b = 2.0 * (x0 @ velocity)
    c = x0 @ x0 - radius**2
    return float((-b + np.sqrt(max(b * b - 4.0 * a * c, 0.0))) / (2.0 * a))


def _scan_crossings(hf: HamiltonianField, t: np.ndarray, dense, n: int) -> List[BallCrossing]:
    """Sign changes of |x(t) - c_i| - rho on a refined grid, then brentq on each change."""
    if t.size < 2:
        return []
    fractions = np.linspace(0.0, 1.0, SCAN_SUBSTEPS, endpoint=False)
    grid = np.append((t[:-1, None] + np.diff(t)[:, None] * fractions).ravel(), t[-1])
    xs = dense(grid)[:n].T
    centers = hf.centers
    gap = np.linalg.norm(xs[:, None, :] - centers[None, :, :], axis=-1) - hf.radius

    def distance(tt: float, ball: int) -> float:
        return float(np.linalg.norm(dense(tt)[:n] - centers[ball]) - hf.radius)

    crossings: List[BallCrossing] = []
    for ball in np.flatnonzero(np.any(gap < 0, axis=0)):
        g = gap[:, ball]
        entries = np.flatnonzero((g[:-1] > 0) & (g[1:] <= 0))
        exits = np.flatnonzero((g[:-1] <= 0) & (g[1:] > 0))
        for i in entries:
            t_in = brentq(distance, grid[i], grid[i + 1], args=(int(ball),), xtol=CROSSING_XTOL)
            later = exits[exits >= i]
            t_out = None
            if later.size:
                j = later[0]
                t_out = brentq(distance, grid[j], grid[j + 1], args=(int(ball),), xtol=CROSSING_XTOL)
            crossings.append(BallCrossing(ball=int(ball), t_in=float(t_in), t_out=None if t_out is None else float(t_out)))
    crossings.sort(key=lambda c: c.t_in)
    return crossings


def integrate(
    hf: HamiltonianField,
    s0: GeodesicState,
    bounding_radius: float,
    tol: float = 1e-12,
    atol: float | None = None,
    max_param: float = 1e3,
    max_step_fraction: float = 0.25,
    method: str = "DOP853",
) -> TraceResult:
    """
    Trace the geodesic from s0 until it leaves the sphere |x| = bounding_radius.
    `tol` is the relative tolerance; `atol` defaults to it.

    Raises:
        StepFailure: the step size underflowed, typically a field singularity
        EscapeFailure: the flow parameter reached max_param inside the sphere
    """
    n = hf.n
    x0 = np.asarray(s0.x, dtype=float)
    p0 = np.asarray(s0.p, dtype=float)
    if hf.locate(x0) >= 0:
        raise GeometryInvalid("Geodesics must be launched outside every ball", f"start point {np.array2string(x0, precision=6)}")
    if np.linalg.norm(x0) > bounding_radius * (1.0 + 1e-12):
        raise GeometryInvalid("Start point lies outside the bounding sphere", f"|x0| = {np.linalg.norm(x0):.6g} > {bounding_radius:.6g}")

    h0 = s0.energy(hf)
    if not h0 > 0:
        raise GeometryInvalid("Initial energy must be positive", f"h(s0) = {h0:.6g}")

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        dx, dp = hamilton_rhs(hf, GeodesicState(x=y[:n], p=y[n:]))
        return np.concatenate([dx, dp])

    def escape(_t: float, y: np.ndarray) -> float:
        return float(np.linalg.norm(y[:n]) - bounding_radius)

    escape.terminal = True
    escape.direction = 1.0

    velocity0, _ = hamilton_rhs(hf, GeodesicState(x=x0, p=p0))
    speed = float(np.linalg.norm(velocity0))
    sol = solve_ivp(
        rhs,
        (s0.t, s0.t + max_param),
        np.concatenate([x0, p0]),
        method=method,
        rtol=tol,
        atol=tol if atol is None else atol,
        dense_output=True,
        events=escape,
        max_step=max_step_fraction * hf.radius / speed,
    )
    if sol.status == -1:
        raise StepFailure("Geodesic integration failed", sol.message)
    if sol.status == 0:
        raise EscapeFailure(
            "Geodesic did not leave the bounding sphere",
            f"flow parameter reached {max_param:g} at |x| = {np.linalg.norm(sol.y[:n, -1]):.6g}; the trace may be trapped.",
        )

    xs, ps = sol.y[:n].T, sol.y[n:].T
    energies = np.array([GeodesicState(x=x, p=p).energy(hf) for x, p in zip(xs, ps)])
    x_end, p_end = xs[-1], ps[-1]
    velocity_end, _ = hamilton_rhs(hf, GeodesicState(x=x_end, p=p_end))

    crossings = _scan_crossings(hf, sol.t, sol.sol, n)
    t_straight = _euclidean_exit_parameter(x0, velocity0, bounding_radius)
    result = TraceResult(
        t=sol.t,
        xs=xs,
        ps=ps,
        entry_line=Line.through(x0, velocity0),
        exit_line=Line.through(x_end, velocity_end),
        crossings=crossings,
        energy_drift=float(np.max(np.abs(energies - h0))),
        time_delay=float(sol.t[-1] - s0.t - t_straight),
        solution=sol.sol,
    )
    logger.debug(
        "Traced geodesic",
        name="geodesic.traced",
        steps=int(sol.t.size),
        balls=result.balls_crossed,
        energy_drift=result.energy_drift,
    )
    return result


def reverse(
    hf: HamiltonianField,
    trace: TraceResult,
    bounding_radius: float,
    **integrator_options,
) -> TraceResult:
    """Trace again from the exit state with negated momentum."""
    end = trace.final
    return integrate(hf, GeodesicState(x=end.x, p=-end.p), bounding_radius, **integrator_options)


def mirror_residual(trace: TraceResult, normal: np.ndarray, samples: int = 50) -> float:
    """
    Largest |x(t_c + tau) - s x(t_c - tau)| where t_c is the parameter at which the
    trace crosses the mirror normal-perp and s is the reflection in that mirror.
    """
    unit = np.asarray(normal, dtype=float)
    unit = unit / np.linalg.norm(unit)
    n = unit.shape[0]
    t0, t1 = float(trace.t[0]), float(trace.t[-1])

    def height(tt: float) -> float:
        return float(trace.solution(tt)[:n] @ unit)

    if np.sign(height(t0)) == np.sign(height(t1)):
        raise GeometryInvalid("Trace does not cross the mirror", "mirror residuals need a trace from one side to the other")
    t_c = brentq(height, t0, t1, xtol=CROSSING_XTOL)
    span = min(t_c - t0, t1 - t_c)
    tau = np.linspace(0.0, span, samples)
    forward, _ = trace.state_at(t_c + tau)
    backward, _ = trace.state_at(t_c - tau)
    mirrored = backward - 2.0 * np.outer(backward @ unit, unit)
    return float(np.max(np.linalg.norm(forward - mirrored, axis=1)))
