"""
Compactly supported bump functions phi_i = a_i * psi(|x - center| / radius), one per root.

psi(r) = exp(1 - 1/(1 - r^2)) for r < 1 and 0 otherwise, so psi(0) = 1 and every
derivative vanishes on the sphere r = 1. Value, gradient and Hessian are closed
form and accept either a single point (n,) or a batch (P, n).
"""

from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from rootcloak.core.exceptions import AmplitudeDegenerate, ConfigInvalid
from rootcloak.geometry.rootsys import RootSystem

LOG_TINY = float(np.log(np.finfo(float).tiny))
"""Exponents below this are clamped to an exact zero."""

DEGENERACY_TOL = 1e-9

ProfileFn = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]


def mollifier(s: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    f(s) = exp(1 - 1/(1 - s)) with s = r^2, and its first two s-derivatives.

    f' = -f / q^2 and f'' = f (1 - 2q) / q^4 with q = 1 - s.
    """
    s = np.asarray(s, dtype=float)
    value = np.zeros_like(s)
    first = np.zeros_like(s)
    second = np.zeros_like(s)

    inside = s < 1.0
    q = np.where(inside, 1.0 - s, 1.0)
    exponent = 1.0 - 1.0 / q
    live = inside & (exponent >= LOG_TINY)
    f = np.where(live, np.exp(np.where(live, exponent, 0.0)), 0.0)

    value[live] = f[live]
    first[live] = -f[live] / q[live] ** 2
    second[live] = f[live] * (1.0 - 2.0 * q[live]) / q[live] ** 4
    return value, first, second


PROFILES: Dict[str, ProfileFn] = {"mollifier": mollifier}


@dataclass(frozen=True, eq=False)
class BumpSet:
    """Per-root bumps sharing one radial profile, supported in the ball B(center, radius)."""

    center: np.ndarray
    radius: float
    amplitudes: np.ndarray
    profile: str = "mollifier"

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ConfigInvalid(f"Bump radius must be positive, got {self.radius}", field="ball_radius")
        if self.profile not in PROFILES:
            raise ConfigInvalid(f"Unknown profile '{self.profile}'", f"Known profiles: {', '.join(PROFILES)}", field="profile")

    @property
    def N(self) -> int:
        return self.amplitudes.shape[0]

    def with_amplitudes(self, amplitudes: np.ndarray) -> "BumpSet":
        return BumpSet(center=self.center, radius=self.radius, amplitudes=np.asarray(amplitudes, dtype=float), profile=self.profile)

    def shape(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        psi, grad psi and Hess psi at x.

        For x of shape (..., n) the results have shapes (...), (..., n) and (..., n, n).
        """
        x = np.asarray(x, dtype=float)
        d = (x - self.center) / self.radius
        s = np.einsum("...i,...i->...", d, d)
        f, f1, f2 = PROFILES[self.profile](s)

        # ds/dx = 2 d / radius
        ds = 2.0 * d / self.radius
        grad = f1[..., None] * ds
        hess = f2[..., None, None] * ds[..., :, None] * ds[..., None, :]
        hess = hess + (2.0 * f1 / self.radius**2)[..., None, None] * np.eye(x.shape[-1])
        return f, grad, hess

    def values(self, x: np.ndarray) -> np.ndarray:
        """All phi_i(x); shape (..., N)."""
        f, _, _ = self.shape(x)
        return f[..., None] * self.amplitudes

    def gradients(self, x: np.ndarray) -> np.ndarray:
        """All grad phi_i(x); shape (..., N, n)."""
        _, grad, _ = self.shape(x)
        return self.amplitudes[:, None] * grad[..., None, :]

    def hessians(self, x: np.ndarray) -> np.ndarray:
        """All Hess phi_i(x); shape (..., N, n, n)."""
        _, _, hess = self.shape(x)
        return self.amplitudes[:, None, None] * hess[..., None, :, :]

    def phi(self, i: int, x: np.ndarray) -> float:
        f, _, _ = self.shape(x)
        return self.amplitudes[i] * f

    def grad_phi(self, i: int, x: np.ndarray) -> np.ndarray:
        _, grad, _ = self.shape(x)
        return self.amplitudes[i] * grad

    def hess_phi(self, i: int, x: np.ndarray) -> np.ndarray:
        _, _, hess = self.shape(x)
        return self.amplitudes[i] * hess

    def derivative_bounds(self, samples: int = 4001) -> Tuple[float, float]:
        """
        Upper estimates of max ||grad phi_i|| and max ||Hess phi_i|| (spectral) over all i.

        Radial profile: the gradient norm is 2 r |f'(r^2)| / radius, the Hessian
        eigenvalues are 2 f' / radius^2 and (4 r^2 f'' + 2 f') / radius^2.
        """
        r = np.linspace(0.0, 1.0, samples, endpoint=False)
        _, f1, f2 = PROFILES[self.profile](r**2)
        grad = np.max(2.0 * r * np.abs(f1)) / self.radius
        radial = np.abs(4.0 * r**2 * f2 + 2.0 * f1)
        tangential = np.abs(2.0 * f1)
        hess = np.max(np.maximum(radial, tangential)) / self.radius**2
        scale = float(np.max(np.abs(self.amplitudes))) if self.N else 0.0
        return scale * float(grad), scale * float(hess)


def draw_amplitudes(count: int, seed: int, low: float = 0.5, high: float = 1.5) -> np.ndarray:
    """Deterministic amplitudes from a seeded generator, uniform in [low, high]."""
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, size=count)


def degenerate_pairs(rs: RootSystem, amplitudes: np.ndarray, tol: float = DEGENERACY_TOL) -> list[Tuple[int, int]]:
    """Pairs (k, l) with a_{kl} = a_k - a_l within tol; these cancel the flatness obstruction."""
    return [(k, l) for (k, l), kl in rs.pair_index.items() if abs(amplitudes[kl] - (amplitudes[k] - amplitudes[l])) <= tol]


def check_amplitudes(rs: RootSystem, amplitudes: np.ndarray) -> None:
    """Raise AmplitudeDegenerate on the first pair with a_{kl} = a_k - a_l."""
    if amplitudes.shape != (rs.N,):
        raise ConfigInvalid(f"Expected {rs.N} amplitudes, got {amplitudes.shape[0]}", field="amplitudes")
    bad = degenerate_pairs(rs, amplitudes)
    if bad:
        k, l = bad[0]
        kl = rs.pair_index[(k, l)]
        raise AmplitudeDegenerate(
            f"Amplitudes are degenerate for the pair ({k + 1}, {l + 1})",
            f"a_{kl + 1} = {amplitudes[kl]:.17g} equals a_{k + 1} - a_{l + 1} = {amplitudes[k] - amplitudes[l]:.17g}; "
            "the metric may then be flat. Change the amplitudes or the seed.",
            pair=(k + 1, l + 1),
        )
