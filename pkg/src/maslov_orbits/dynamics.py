"""Time integration of the orbit equations and Floquet analysis of period maps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg

from .errors import DomainError, EscapedDomainError, InvalidArgument
from .surface import (
    StabilityVerdict,
    SurfaceKind,
    _kind,
    _profile,
    conformal_density,
    orbit_data,
    riemann_distance,
    ModelPoint,
)
from .symplectic import GeneratorMatrix

__all__ = [
    "ELState",
    "Trajectory",
    "FloquetResult",
    "circular_state",
    "integrate_el",
    "monodromy",
    "floquet",
    "power_norms",
    "radial_geodesic",
]


@dataclass(frozen=True)
class ELState:
    """Position and velocity in polar coordinates ``(xi, theta)``."""

    xi: float
    theta: float
    xi_dot: float
    theta_dot: float

    def as_array(self) -> np.ndarray:
        return np.array([self.xi, self.theta, self.xi_dot, self.theta_dot], dtype=float)

    @classmethod
    def from_array(cls, y) -> "ELState":
        return cls(*(float(v) for v in y))


@dataclass
class Trajectory:
    """Sampled solution of the orbit equations.

    Attributes
    ----------
    times : ndarray, shape (m,)
    states : ndarray, shape (m, 4)
        Columns ``xi, theta, xi_dot, theta_dot``.
    angular_momentum : ndarray
        ``p(xi) xi^2 theta_dot``, conserved by the exact flow.
    energy : ndarray
        ``p (xi_dot^2 + xi^2 theta_dot^2) / 2 - q``, conserved by the exact flow.
    """

    times: np.ndarray
    states: np.ndarray
    angular_momentum: np.ndarray
    energy: np.ndarray

    def state(self, i: int) -> ELState:
        return ELState.from_array(self.states[i])

    @property
    def angular_momentum_drift(self) -> float:
        """Largest relative deviation of the angular momentum from its initial value."""
        L0 = self.angular_momentum[0]
        return float(np.max(np.abs(self.angular_momentum - L0)) / max(abs(L0), 1e-300))

    def radial_drift(self, xi0: float) -> float:
        return float(np.max(np.abs(self.states[:, 0] - xi0)))


def _in_domain(kind: SurfaceKind, xi: float) -> bool:
    if not math.isfinite(xi) or xi <= 0:
        return False
    return not (kind is SurfaceKind.HYPERBOLIC and xi >= 1)


def _rhs_factory(kind: SurfaceKind, alpha: float):
    def rhs(y):
        xi, _, xd, td = y
        p, dp, _, dq, _ = _profile(kind, xi, alpha)
        eta = p * xi * xi
        deta = dp * xi * xi + 2.0 * p * xi
        xdd = (-0.5 * dp * xd * xd + 0.5 * dp * xi * xi * td * td + p * xi * td * td + dq) / p
        tdd = -deta * xd * td / eta
        return np.array([xd, td, xdd, tdd])
    return rhs


def _invariants(kind: SurfaceKind, alpha: float, states: np.ndarray):
    xi, xd, td = states[:, 0], states[:, 2], states[:, 3]
    if kind is SurfaceKind.SPHERE:
        p, u = 2.0 / (1.0 + xi ** 2) ** 2, np.arctan(xi)
    elif kind is SurfaceKind.HYPERBOLIC:
        p, u = 2.0 / (1.0 - xi ** 2) ** 2, np.log((1.0 + xi) / (1.0 - xi))
    else:
        p, u = np.ones_like(xi), xi
    momentum = p * xi ** 2 * td
    energy = 0.5 * p * (xd ** 2 + xi ** 2 * td ** 2) - u ** alpha
    return momentum, energy


def circular_state(point: ModelPoint) -> ELState:
    """Initial data of the circular orbit through ``point`` (counter-clockwise)."""
    orbit = orbit_data(point)
    return ELState(point.xi, 0.0, 0.0, orbit.theta_dot)


def integrate_el(surface, alpha: float, state0: ELState, T: float, steps: int) -> Trajectory:
    """Integrate the orbit equations with the classical fixed-step RK4 scheme.

    The equations are::

        xi''    = (-p' xi'^2 / 2 + p' xi^2 theta'^2 / 2 + p xi theta'^2 + q') / p
        theta'' = -(p xi^2)' xi' theta' / (p xi^2)

    Parameters
    ----------
    surface : SurfaceKind or str
    alpha : float
    state0 : ELState
    T : float
        Final time.
    steps : int
        Number of RK4 steps.

    Raises
    ------
    EscapedDomainError
        If ``xi`` leaves the admissible interval; carries the partial
        trajectory and the last state inside the domain.
    """
    kind = _kind(surface)
    if not (T > 0) or not math.isfinite(T):
        raise InvalidArgument(f"T must be positive and finite, got {T!r}")
    if int(steps) != steps or steps < 1:
        raise InvalidArgument(f"steps must be a positive integer, got {steps!r}")
    steps = int(steps)
    if not _in_domain(kind, state0.xi):
        raise DomainError("initial xi inside the surface domain", f"xi={state0.xi!r}")
    rhs = _rhs_factory(kind, float(alpha))
    h = T / steps
    y = state0.as_array()
    out = np.empty((steps + 1, 4))
    out[0] = y
    with np.errstate(all="ignore"):
        for i in range(steps):
            try:
                k1 = rhs(y)
                k2 = rhs(y + 0.5 * h * k1)
                k3 = rhs(y + 0.5 * h * k2)
                k4 = rhs(y + h * k3)
                y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            except (ValueError, ZeroDivisionError, OverflowError):
                y_new = np.full(4, np.nan)
            if not (np.all(np.isfinite(y_new)) and _in_domain(kind, y_new[0])):
                partial = _trajectory(kind, alpha, h, out[: i + 1])
                raise EscapedDomainError(f"trajectory left the domain near t={(i + 1) * h:.6g}",
                                         last_state=ELState.from_array(y), trajectory=partial)
            y = y_new
            out[i + 1] = y
    return _trajectory(kind, alpha, h, out)


def _trajectory(kind, alpha, h, states):
    times = h * np.arange(len(states))
    momentum, energy = _invariants(kind, float(alpha), states)
    return Trajectory(times, states.copy(), momentum, energy)


# --------------------------------------------------------------------------- #
# Linear period maps
# --------------------------------------------------------------------------- #

def monodromy(gen, T: float) -> np.ndarray:
    """Period map ``exp(A T)`` of the linearised system.

    Parameters
    ----------
    gen : GeneratorMatrix or array_like
    T : float
        Positive period.
    """
    if not (T > 0) or not math.isfinite(T):
        raise InvalidArgument(f"T must be positive and finite, got {T!r}")
    A = gen.matrix if isinstance(gen, GeneratorMatrix) else np.asarray(gen, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2 or not np.all(np.isfinite(A)):
        raise InvalidArgument("generator must be a finite square matrix of even dimension")
    M = scipy.linalg.expm(A * T)
    return M


@dataclass(frozen=True)
class FloquetResult:
    """Floquet multipliers and growth class of a period map.

    ``tag`` is ``stable``, ``unstable-hyperbolic`` (a multiplier off the
    unit circle) or ``unstable-jordan`` (all multipliers on the unit circle
    but the powers grow, i.e. a non-trivial Jordan block).
    """

    multipliers: List[complex]
    tag: StabilityVerdict
    spectral_radius: float
    max_power_growth: float

    @property
    def pairing_defect(self) -> float:
        """Distance of the multiplier set from closure under ``1 / lambda`` and conjugation."""
        lam = np.array(self.multipliers)
        if lam.size == 0:
            return 0.0
        inv = np.min(np.abs(lam[:, None] - 1.0 / lam[None, :]), axis=1)
        conj = np.min(np.abs(lam[:, None] - np.conj(lam)[None, :]), axis=1)
        return float(max(inv.max(), conj.max()))


def power_norms(M, n_max: int = 64) -> np.ndarray:
    """Spectral norms ``|M^n|`` for ``n = 1 .. n_max``.

    The powers are renormalised at every step, so strongly hyperbolic maps
    give ``inf`` once a norm exceeds the float range instead of ``nan``.
    """
    M = np.asarray(M, dtype=float)
    out = np.empty(n_max)
    P = np.eye(M.shape[0])
    log_scale = 0.0
    for n in range(n_max):
        P = P @ M
        norm = np.linalg.norm(P, 2)
        log_scale += math.log(norm)
        P /= norm
        out[n] = math.exp(log_scale) if log_scale < 709.0 else math.inf
    return out


def floquet(M, radius_tol: float = 1e-6, growth_factor: float = 10.0, n_max: int = 64) -> FloquetResult:
    """Multipliers of a symplectic period map and its stability class.

    A multiplier with modulus above ``1 + radius_tol`` means hyperbolic
    instability. Otherwise the map is unstable when ``|M^n|`` exceeds
    ``growth_factor * |M|`` for some ``n <= n_max``; this detects Jordan
    blocks without an ill-conditioned rank decision.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise InvalidArgument("period map must be square of even dimension")
    lam = np.linalg.eigvals(M)
    order = np.lexsort((np.angle(lam), np.round(np.abs(lam), 9)))
    lam = lam[order]
    radius = float(np.max(np.abs(lam)))
    norms = power_norms(M, n_max)
    with np.errstate(over="ignore"):
        growth = float(norms.max() / max(norms[0], 1e-300))
    if radius > 1.0 + radius_tol:
        tag = StabilityVerdict.UNSTABLE_HYPERBOLIC
    elif growth > growth_factor:
        tag = StabilityVerdict.UNSTABLE_JORDAN
    else:
        tag = StabilityVerdict.STABLE
    return FloquetResult([complex(x) for x in lam], tag, radius, growth)


# --------------------------------------------------------------------------- #
# Radial geodesics
# --------------------------------------------------------------------------- #

def radial_geodesic(surface, R: float, s: float, steps: int = 4096) -> float:
    """Euclidean radius reached after arc length ``s`` along a radial geodesic.

    Solves ``mu_R(r) dr/ds = 1`` from ``r = 0`` with fixed-step RK4.

    Raises
    ------
    DomainError
        If ``s`` is negative or beyond the distance reachable on the surface.
    """
    kind = _kind(surface)
    if not (R > 0) or not math.isfinite(R):
        raise DomainError("R > 0", f"R={R!r}")
    if not (s >= 0) or not math.isfinite(s):
        raise DomainError("s >= 0", f"s={s!r}")
    if kind is SurfaceKind.EUCLIDEAN:
        return float(s)
    if kind is SurfaceKind.SPHERE and s >= math.pi * R:
        raise DomainError("s < pi R on the sphere", f"s={s!r}")
    if s == 0:
        return 0.0

    def f(r):
        return 1.0 / conformal_density(kind, r, R)

    h = s / int(steps)
    r = 0.0
    for _ in range(int(steps)):
        k1 = f(r)
        k2 = f(r + 0.5 * h * k1)
        k3 = f(r + 0.5 * h * k2)
        k4 = f(r + h * k3)
        r += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if kind is SurfaceKind.HYPERBOLIC:
        # Far out, r rounds onto the ideal boundary and no longer determines s.
        if not (math.isfinite(r) and r < R) or abs(riemann_distance(kind, r, R) - s) > 1e-7 * max(1.0, s):
            raise DomainError("s within the distance resolvable below r = R", f"s={s!r}")
    return float(r)
