"""Circular orbits of power-law central forces on constant-curvature surfaces.

All quantities are in normalized units: the radius is ``xi = r / R`` and the
mass and potential constants are scaled out, so the reduced Lagrangian is

    L = p(xi) (xi'^2 + xi^2 theta'^2) / 2 + q(xi)

with

==============  ====================  ==============================
surface         conformal factor p    potential q
==============  ====================  ==============================
sphere          2 / (1 + xi^2)^2      arctan(xi) ** alpha
hyperbolic      2 / (1 - xi^2)^2      log((1 + xi) / (1 - xi)) ** alpha
euclidean       1                     xi ** alpha
==============  ====================  ==============================

A circular orbit of radius ``xi0`` exists when
``theta'^2 = -2 q'(xi0) / eta'(xi0) > 0`` with ``eta = p xi^2``. Its
linearisation is the autonomous Hamiltonian system with generator
``A(a, b, c, d)``. The index and stability of the orbit depend on the signs
of a few explicit region functions of ``(xi0, alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.integrate
import scipy.optimize

from .closed_form import Sign, Subcase, _rotation_turns, classify_generator, closed_form_iota1
from .errors import DomainError, InvalidArgument
from .symplectic import GeneratorMatrix

__all__ = [
    "SurfaceKind",
    "StabilityVerdict",
    "ModelPoint",
    "CircularOrbit",
    "RegionLabel",
    "Curve",
    "conformal_factor",
    "potential",
    "orbit_data",
    "pipeline_coefficients",
    "region_classify",
    "boundary_curves",
    "stability_verdict",
    "riemann_distance",
    "riemann_distance_quadrature",
    "sphere_f1", "sphere_f2", "sphere_f3", "sphere_h", "sphere_f2_curve", "sphere_k_curve",
    "hyperbolic_g1", "hyperbolic_g2", "hyperbolic_g3", "hyperbolic_g1_curve", "hyperbolic_g2_curve",
    "hyperbolic_band_edge", "conformal_density",
    "h_curve_asymptote",
]

BOUNDARY_TOL = 1e-9


class SurfaceKind(str, Enum):
    SPHERE = "sphere"
    HYPERBOLIC = "hyperbolic"
    EUCLIDEAN = "euclidean"


class StabilityVerdict(str, Enum):
    STABLE = "stable"
    UNSTABLE_JORDAN = "unstable-jordan"
    UNSTABLE_HYPERBOLIC = "unstable-hyperbolic"
    UNSTABLE_NILPOTENT = "unstable-nilpotent"


def _kind(surface) -> SurfaceKind:
    try:
        return SurfaceKind(surface)
    except ValueError:
        raise InvalidArgument(f"unknown surface {surface!r}") from None


# --------------------------------------------------------------------------- #
# Conformal factor and potential
# --------------------------------------------------------------------------- #

def _check_xi(kind: SurfaceKind, xi: float):
    if not math.isfinite(xi) or xi <= 0:
        raise DomainError("xi > 0", f"xi={xi!r}")
    if kind is SurfaceKind.HYPERBOLIC and xi >= 1:
        raise DomainError("xi < 1 on the hyperbolic plane", f"xi={xi!r}")


def conformal_factor(surface, xi: float) -> float:
    """Conformal factor ``p(xi)`` of the normalized metric.

    Examples
    --------
    >>> conformal_factor("sphere", 1.0)
    0.5
    """
    kind = _kind(surface)
    _check_xi(kind, xi)
    if kind is SurfaceKind.SPHERE:
        return 2.0 / (1.0 + xi * xi) ** 2
    if kind is SurfaceKind.HYPERBOLIC:
        return 2.0 / (1.0 - xi * xi) ** 2
    return 1.0


def _distance_function(kind: SurfaceKind, xi: float) -> float:
    if kind is SurfaceKind.SPHERE:
        return math.atan(xi)
    if kind is SurfaceKind.HYPERBOLIC:
        return math.log((1.0 + xi) / (1.0 - xi))
    return xi


def potential(surface, xi: float, alpha: float) -> float:
    """Power-law potential ``q(xi) = u(xi) ** alpha`` of the normalized distance ``u``.

    ``u`` is ``arctan(xi)`` on the sphere, ``log((1 + xi) / (1 - xi))`` on the
    hyperbolic plane and ``xi`` in the Euclidean plane.
    """
    kind = _kind(surface)
    _check_xi(kind, xi)
    return _distance_function(kind, xi) ** alpha


def _profile(kind: SurfaceKind, xi: float, alpha: float):
    """Return ``p, p', p'', q', q''`` at ``xi``."""
    x2 = xi * xi
    if kind is SurfaceKind.SPHERE:
        s = 1.0 + x2
        p, dp, d2p = 2.0 / s ** 2, -8.0 * xi / s ** 3, 8.0 * (5.0 * x2 - 1.0) / s ** 4
        u, du, d2u = math.atan(xi), 1.0 / s, -2.0 * xi / s ** 2
    elif kind is SurfaceKind.HYPERBOLIC:
        s = 1.0 - x2
        p, dp, d2p = 2.0 / s ** 2, 8.0 * xi / s ** 3, (8.0 + 40.0 * x2) / s ** 4
        u, du, d2u = math.log((1.0 + xi) / (1.0 - xi)), 2.0 / s, 4.0 * xi / s ** 2
    else:
        p, dp, d2p = 1.0, 0.0, 0.0
        u, du, d2u = xi, 1.0, 0.0
    dq = alpha * u ** (alpha - 1.0) * du
    d2q = alpha * (alpha - 1.0) * u ** (alpha - 2.0) * du * du + alpha * u ** (alpha - 1.0) * d2u
    return p, dp, d2p, dq, d2q


# --------------------------------------------------------------------------- #
# Model points and orbit data
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class ModelPoint:
    """A circular orbit candidate: surface, normalized radius and exponent."""

    surface: SurfaceKind
    xi: float
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "surface", _kind(self.surface))
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "alpha", float(self.alpha))

    def violated_constraint(self) -> Optional[str]:
        """Name of the first admissibility constraint that fails, or None."""
        xi, alpha, kind = self.xi, self.alpha, self.surface
        if not (math.isfinite(xi) and math.isfinite(alpha)):
            return "finite xi and alpha"
        if xi <= 0:
            return "xi > 0"
        if alpha == 0:
            return "alpha != 0"
        if kind is SurfaceKind.SPHERE:
            if alpha > 0 and not xi > 1:
                return "xi > 1 for alpha > 0 on the sphere"
            if alpha < 0 and not xi < 1:
                return "xi < 1 for alpha < 0 on the sphere"
        elif kind is SurfaceKind.HYPERBOLIC:
            if not xi < 1:
                return "xi < 1 on the hyperbolic plane"
            if alpha > 0:
                return "alpha < 0 on the hyperbolic plane"
        elif alpha > 0:
            return "alpha < 0 in the Euclidean plane"
        return None

    def validate(self):
        problem = self.violated_constraint()
        if problem:
            raise DomainError(problem, f"xi={self.xi!r}, alpha={self.alpha!r}")


@dataclass(frozen=True)
class CircularOrbit:
    """Data of a circular orbit and of its linearisation.

    Attributes
    ----------
    point : ModelPoint
    theta_dot_sq : float
        Squared angular velocity.
    T : float
        Prime period ``2 pi / theta_dot``.
    coeffs : tuple of float
        ``(a, b, c, d)`` of the linearised generator.
    auxiliaries : dict
        ``p0, dp0, dq0, eta0, deta0, zeta0`` at the orbit radius.
    """

    point: ModelPoint
    theta_dot_sq: float
    T: float
    coeffs: Tuple[float, float, float, float]
    auxiliaries: Dict[str, float] = field(default_factory=dict)

    @property
    def theta_dot(self) -> float:
        return math.sqrt(self.theta_dot_sq)

    @property
    def generator(self) -> GeneratorMatrix:
        return GeneratorMatrix(*self.coeffs)


def pipeline_coefficients(surface, xi: float, alpha: float):
    """Generic coefficients from the derivatives of ``p`` and ``q``.

    Returns
    -------
    theta_dot_sq : float
    coeffs : tuple ``(a, b, c, d)``
    aux : dict
    """
    kind = _kind(surface)
    p, dp, d2p, dq, d2q = _profile(kind, xi, alpha)
    x2 = xi * xi
    eta = p * x2
    deta = dp * x2 + 2.0 * p * xi
    d2eta = d2p * x2 + 4.0 * dp * xi + 2.0 * p
    if deta == 0:
        raise DomainError("(p xi^2)' != 0", f"xi={xi!r}")
    theta_dot_sq = -2.0 * dq / deta
    zeta_sq = -2.0 * dq * deta
    zeta = math.copysign(math.sqrt(max(zeta_sq, 0.0)), deta)
    a = 1.0 / p
    b = zeta / eta
    c = 1.0 / eta
    d = 2.0 * dq * deta / eta + (d2q * deta - dq * d2eta) / deta
    scale_d = abs(2.0 * dq * deta / eta) + abs(d2q) + abs(dq * d2eta / deta)
    aux = dict(p0=p, dp0=dp, dq0=dq, eta0=eta, deta0=deta, zeta0=zeta, d_scale=scale_d)
    return theta_dot_sq, (a, b, c, d), aux


def _printed_coefficients(kind: SurfaceKind, xi: float, alpha: float):
    """Surface-specific closed forms of ``theta'^2`` and ``(a, b, c, d)``."""
    x2 = xi * xi
    if kind is SurfaceKind.SPHERE:
        F = math.atan(xi)
        s, m = 1.0 + x2, 1.0 - x2
        th2 = -alpha * F ** (alpha - 1) * s ** 2 / (2 * xi * m)
        a = s ** 2 / 2
        c = s ** 2 / (2 * x2)
        b = (2 * m / xi) * math.sqrt(-alpha * F ** (alpha - 1) / (2 * xi * m))
        d = alpha * F ** (alpha - 2) * sphere_f1(xi, alpha) / (xi * s ** 2 * m)
    elif kind is SurfaceKind.HYPERBOLIC:
        G = math.log((1 + xi) / (1 - xi))
        s, m = 1.0 + x2, 1.0 - x2
        th2 = -alpha * G ** (alpha - 1) * m ** 2 / (xi * s)
        a = m ** 2 / 2
        c = m ** 2 / (2 * x2)
        b = (2 * s / xi) * math.sqrt(-alpha * G ** (alpha - 1) / (xi * s))
        d = 2 * alpha * G ** (alpha - 2) * hyperbolic_g1(xi, alpha) / (xi * m ** 2 * s)
    else:
        th2 = -alpha * xi ** (alpha - 2)
        a = 1.0
        c = 1.0 / x2
        b = (2.0 / xi) * math.sqrt(-alpha * xi ** (alpha - 2))
        d = alpha * (alpha + 2) * xi ** (alpha - 2)
    return th2, (a, b, c, d)


def _agree(x, y, scale=0.0, rtol=1e-10):
    return abs(x - y) <= rtol * max(abs(x), abs(y), scale)


def orbit_data(point: ModelPoint) -> CircularOrbit:
    """Circular-orbit data, computed twice and cross-checked.

    The surface-specific closed forms are returned; the generic
    derivative pipeline must agree with them to ``1e-10`` relative.

    Raises
    ------
    DomainError
        If the point is inadmissible; the violated constraint is named.

    Examples
    --------
    >>> o = orbit_data(ModelPoint("euclidean", 1.0, -1.0))
    >>> o.coeffs
    (1.0, 2.0, 1.0, -1.0)
    """
    point.validate()
    kind, xi, alpha = point.surface, point.xi, point.alpha
    th2, coeffs, aux = pipeline_coefficients(kind, xi, alpha)
    if not th2 > 0:
        raise DomainError("theta_dot^2 > 0", f"theta_dot^2={th2!r}")
    th2_p, coeffs_p = _printed_coefficients(kind, xi, alpha)
    checks = [(th2, th2_p, 0.0)] + [(x, y, 0.0) for x, y in zip(coeffs[:3], coeffs_p[:3])]
    checks.append((coeffs[3], coeffs_p[3], aux["d_scale"]))
    for x, y, scale in checks:
        if not _agree(x, y, scale):
            raise AssertionError(f"closed form {y!r} disagrees with derivative pipeline {x!r}")
    aux = {k: v for k, v in aux.items() if k != "d_scale"}
    T = 2.0 * math.pi / math.sqrt(th2_p)
    return CircularOrbit(point, th2_p, T, tuple(float(c) for c in coeffs_p), aux)


# --------------------------------------------------------------------------- #
# Region functions
# --------------------------------------------------------------------------- #

def sphere_f1(xi, alpha):
    """Sign of ``-d`` on the sphere: ``d < 0`` exactly when ``f1 > 0``."""
    F = np.arctan(xi)
    return (3 * xi ** 4 - 2 * xi ** 2 + 3) * F + (alpha - 1) * xi * (1 - xi ** 2)


def sphere_f2(xi, alpha):
    """Sign of ``c d + b^2`` on the sphere."""
    F = np.arctan(xi)
    return (xi ** 4 - 6 * xi ** 2 + 1) * F - (alpha - 1) * xi * (1 - xi ** 2)


def sphere_f3(xi, alpha):
    """``sqrt(-a d) T / (2 pi)`` on the sphere, defined where ``f1 >= 0``."""
    F = np.arctan(xi)
    return np.sqrt(sphere_f1(xi, alpha) / (F * (1 + xi ** 2) ** 2))


def sphere_h(xi):
    """Exponent on the curve ``f1 = 0``: ``1 + (3 xi^4 - 2 xi^2 + 3) arctan(xi) / (xi (xi^2 - 1))``."""
    return 1 + (3 * xi ** 4 - 2 * xi ** 2 + 3) * np.arctan(xi) / (xi * (xi ** 2 - 1))


def sphere_f2_curve(xi):
    """Exponent on the curve ``f2 = 0``."""
    return 1 + (xi ** 4 - 6 * xi ** 2 + 1) * np.arctan(xi) / (xi * (1 - xi ** 2))


def sphere_k_curve(xi):
    """Exponent on the curve ``f3 = 1`` separating ``k = 0`` from ``k = 1``."""
    return 1 + 2 * (xi ** 2 - 1) * np.arctan(xi) / xi


def hyperbolic_g1(xi, alpha):
    """Sign of ``-d`` on the hyperbolic plane."""
    G = np.log((1 + xi) / (1 - xi))
    return (3 * xi ** 4 + 2 * xi ** 2 + 3) * G + 2 * (alpha - 1) * xi * (1 + xi ** 2)


def hyperbolic_g2(xi, alpha):
    """Sign of ``c d + b^2`` on the hyperbolic plane."""
    G = np.log((1 + xi) / (1 - xi))
    return (xi ** 4 + 6 * xi ** 2 + 1) * G - 2 * (alpha - 1) * xi * (1 + xi ** 2)


def hyperbolic_g3(xi, alpha):
    """``sqrt(-a d) T / (2 pi)`` on the hyperbolic plane, defined where ``g1 >= 0``."""
    G = np.log((1 + xi) / (1 - xi))
    return np.sqrt(hyperbolic_g1(xi, alpha) / ((1 - xi ** 2) ** 2 * G))


def hyperbolic_g1_curve(xi):
    """Exponent on the curve ``g1 = 0``."""
    G = np.log((1 + xi) / (1 - xi))
    return 1 - (3 * xi ** 4 + 2 * xi ** 2 + 3) * G / (2 * xi * (1 + xi ** 2))


def hyperbolic_g2_curve(xi):
    """Exponent on the curve ``g2 = 0`` (always above 1, so outside the model)."""
    G = np.log((1 + xi) / (1 - xi))
    return 1 + (xi ** 4 + 6 * xi ** 2 + 1) * G / (2 * xi * (1 + xi ** 2))


def h_curve_asymptote(xi_min: float = 1e3, xi_max: float = 1e5, samples: int = 200):
    """Least-squares line ``alpha = slope * xi + intercept`` fitted to the ``f1 = 0`` curve.

    The curve grows like ``3 xi arctan(xi)``, so the slope tends to ``3 pi / 2``.
    """
    xi = np.geomspace(xi_min, xi_max, samples)
    slope, intercept = np.polyfit(xi, sphere_h(xi), 1)
    return float(slope), float(intercept)


# --------------------------------------------------------------------------- #
# Classification
# --------------------------------------------------------------------------- #

def stability_verdict(a: float, b: float, c: float, d: float) -> StabilityVerdict:
    """Linear stability of ``exp(A T)`` from the generator coefficients.

    ``d < 0``: stable when ``c d + b^2 = 0`` (identity block times a
    rotation), otherwise a non-trivial Jordan block. ``d > 0``: hyperbolic.
    ``d = 0``: nilpotent generator, polynomial growth.
    """
    tag = classify_generator(a, b, c, d)
    if tag.d_sign is Sign.ZERO:
        return StabilityVerdict.UNSTABLE_NILPOTENT
    if tag.d_sign is Sign.POSITIVE:
        return StabilityVerdict.UNSTABLE_HYPERBOLIC
    if tag.subcase is Subcase.CDB2_ZERO:
        return StabilityVerdict.STABLE
    return StabilityVerdict.UNSTABLE_JORDAN


@dataclass(frozen=True)
class RegionLabel:
    """Region of the ``(xi, alpha)`` plane containing a model point.

    Attributes
    ----------
    name : str
        Region name, e.g. ``"Omega1,1^{+,-}"`` or ``"Omega3,2^+"``.
    index : int
        Generalized Conley-Zehnder index (the Morse index of the orbit).
    k : int or None
        Completed turns of the rotation factor when ``d < 0``.
    d_sign, cdb2_sign : int
        Signs of ``d`` and ``c d + b^2`` (0 on the corresponding curve).
    stability : StabilityVerdict
    boundary : str or None
        Name of the separatrix the point lies on (within ``1e-9`` in the
        region function value), if any.
    """

    name: str
    index: int
    k: Optional[int]
    d_sign: int
    cdb2_sign: int
    stability: StabilityVerdict
    boundary: Optional[str] = None

    @property
    def on_boundary(self) -> bool:
        return self.boundary is not None


def _sign(value: float, tol: float = BOUNDARY_TOL) -> int:
    if abs(value) <= tol:
        return 0
    return 1 if value > 0 else -1


def _turns(x: float):
    """Return ``(k, on_k_boundary)`` for ``x = sqrt(-a d) T / (2 pi) > 0``."""
    m = round(x)
    if m >= 1 and abs(x - m) <= BOUNDARY_TOL:
        return int(m) - 1, True
    return _rotation_turns(2 * math.pi * x), False


def _index_from_signs(d_sign: int, cdb2_sign: int, k: Optional[int]) -> int:
    # c > 0 on every admissible point, so the rows with index -1 never occur
    if d_sign < 0:
        return 2 * k + (1 if cdb2_sign < 0 else 0)
    return 0


def region_classify(point: ModelPoint) -> RegionLabel:
    """Name the region of ``point`` and attach its index.

    The index read from the region functions is cross-checked against the
    closed-form index of the orbit's generator for every point that is not
    on a separatrix.

    Raises
    ------
    DomainError
        If the point is inadmissible.
    """
    orbit = orbit_data(point)
    kind, xi, alpha = point.surface, point.xi, point.alpha
    boundary = None
    k = None
    if kind is SurfaceKind.SPHERE:
        family = "Omega1" if alpha > 0 else "Omega2"
        s1 = _sign(sphere_f1(xi, alpha))
        d_sign = -s1
        if s1 == 0:
            boundary = "h-curve"
            cdb2_sign = _sign(orbit.coeffs[2] * orbit.coeffs[3] + orbit.coeffs[1] ** 2, 0.0)
            name = f"{family}^0"
        elif s1 < 0:
            cdb2_sign = _sign(orbit.coeffs[2] * orbit.coeffs[3] + orbit.coeffs[1] ** 2, 0.0)
            name = f"{family}^-"
        else:
            cdb2_sign = _sign(sphere_f2(xi, alpha))
            if cdb2_sign == 0:
                boundary = "f2-curve"
            k, on_k = _turns(float(sphere_f3(xi, alpha)))
            if on_k:
                boundary = boundary or "k-boundary"
            sub = {1: "+", -1: "-", 0: "0"}[cdb2_sign]
            name = f"{family},{k}^{{+,{sub}}}"
    elif kind is SurfaceKind.HYPERBOLIC:
        s1 = _sign(hyperbolic_g1(xi, alpha))
        d_sign = -s1
        if s1 <= 0:
            cdb2_sign = _sign(orbit.coeffs[2] * orbit.coeffs[3] + orbit.coeffs[1] ** 2, 0.0)
            boundary = "g1-curve" if s1 == 0 else None
            name = "Omega3^0" if s1 == 0 else "Omega3^-"
        else:
            cdb2_sign = _sign(hyperbolic_g2(xi, alpha))
            if cdb2_sign == 0:
                boundary = "g2-curve"
            k, on_k = _turns(float(hyperbolic_g3(xi, alpha)))
            if on_k:
                boundary = boundary or "k-boundary"
            name = f"Omega3,{k}^+" if cdb2_sign > 0 else f"Omega3,{k}^{{+,{'-' if cdb2_sign < 0 else '0'}}}"
    else:
        s = _sign(alpha + 2.0)
        d_sign = -1 if s > 0 else (0 if s == 0 else 1)
        cdb2_sign = 1
        if s == 0:
            boundary = "alpha=-2"
            name = "Euclid^0"
        elif s < 0:
            name = "Euclid^-"
        else:
            k, on_k = _turns(math.sqrt(alpha + 2.0))
            if on_k:
                boundary = "alpha=-1"
            name = f"Euclid,{k}^+"
    index = _index_from_signs(d_sign, cdb2_sign, k)
    stability = stability_verdict(*orbit.coeffs)
    if boundary is None:
        closed, tag = closed_form_iota1(*orbit.coeffs, orbit.T)
        if closed != index:
            raise AssertionError(f"region index {index} disagrees with closed form {closed} at {point}")
    return RegionLabel(name, index, k, d_sign, cdb2_sign, stability, boundary)


# --------------------------------------------------------------------------- #
# Separatrices
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Curve:
    """A sampled separatrix polyline in the ``(xi, alpha)`` plane."""

    name: str
    points: np.ndarray


def _runs(name, xi, alpha, mask) -> List[Curve]:
    out = []
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return out
    breaks = np.nonzero(np.diff(idx) > 1)[0]
    for seg in np.split(idx, breaks + 1):
        if seg.size >= 2:
            out.append(Curve(name, np.column_stack([xi[seg], alpha[seg]])))
    return out


def _check_range(r, name):
    lo, hi = (float(v) for v in r)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise InvalidArgument(f"{name} must be an increasing finite pair, got {r!r}")
    return lo, hi


def _admissible_mask(kind: SurfaceKind, xi, alpha):
    xi = np.asarray(xi, float)
    alpha = np.asarray(alpha, float)
    ok = (xi > 0) & (alpha != 0) & np.isfinite(alpha)
    if kind is SurfaceKind.SPHERE:
        ok &= ((alpha > 0) & (xi > 1)) | ((alpha < 0) & (xi < 1))
    elif kind is SurfaceKind.HYPERBOLIC:
        ok &= (xi < 1) & (alpha < 0)
    else:
        ok &= alpha < 0
    return ok


def boundary_curves(surface, xi_range, alpha_range, resolution: int = 200) -> List[Curve]:
    """Separatrices of the region map inside a rectangle of the ``(xi, alpha)`` plane.

    Parameters
    ----------
    surface : SurfaceKind or str
    xi_range, alpha_range : pair of float
    resolution : int
        Number of samples along each curve, at least 16.

    Returns
    -------
    list of Curve
        Empty if no separatrix meets the admissible part of the rectangle.
    """
    kind = _kind(surface)
    x0, x1 = _check_range(xi_range, "xi_range")
    a0, a1 = _check_range(alpha_range, "alpha_range")
    if int(resolution) != resolution or resolution < 16:
        raise InvalidArgument(f"resolution must be an integer >= 16, got {resolution!r}")
    resolution = int(resolution)
    curves: List[Curve] = []

    def in_box(xi, al):
        return (al >= a0) & (al <= a1) & _admissible_mask(kind, xi, al)

    if kind is SurfaceKind.EUCLIDEAN:
        for value, name in ((-2.0, "alpha=-2"), (-1.0, "alpha=-1")):
            if a0 <= value <= a1 and x1 > 0:
                lo = max(x0, 0.0)
                curves.append(Curve(name, np.array([[lo, value], [x1, value]])))
        return curves

    xi = np.linspace(x0, x1, resolution)
    xi = xi[(xi > 0) & (xi != 1.0)]
    if kind is SurfaceKind.HYPERBOLIC:
        xi = xi[xi < 1]
    if xi.size < 2:
        return curves
    with np.errstate(all="ignore"):
        if kind is SurfaceKind.SPHERE:
            al = sphere_h(xi)
            curves += _runs("h-curve", xi, al, in_box(xi, al))
            al = sphere_f2_curve(xi)
            curves += _runs("f2-curve", xi, al, in_box(xi, al) & (sphere_f1(xi, al) > 0))
            al = sphere_k_curve(xi)
            curves += _runs("k-boundary", xi, al, in_box(xi, al) & (sphere_f1(xi, al) > 0))
            return curves
        al = hyperbolic_g1_curve(xi)
        curves += _runs("g1-curve", xi, al, in_box(xi, al))
        al = hyperbolic_g2_curve(xi)
        curves += _runs("g2-curve", xi, al, in_box(xi, al) & (hyperbolic_g1(xi, al) > 0))
    curves += _hyperbolic_bands(xi, np.linspace(a0, a1, resolution))
    return curves


def _hyperbolic_bands(xi_grid, alpha_grid, k_max: int = 16) -> List[Curve]:
    """Level sets ``g3 = k + 1`` (edges between bands ``k`` and ``k + 1``)."""
    fine = np.linspace(xi_grid[0], xi_grid[-1], 4 * len(xi_grid))
    fine = fine[(fine > 0) & (fine < 1)]
    levels: Dict[int, List[Tuple[float, float]]] = {}
    for al in alpha_grid:
        if not al < 0:
            continue
        with np.errstate(all="ignore"):
            g = hyperbolic_g3(fine, al)
        for level in range(1, k_max + 2):
            diff = g - level
            valid = np.isfinite(diff)
            sgn = np.sign(diff)
            hits = np.nonzero(valid[:-1] & valid[1:] & (sgn[:-1] * sgn[1:] < 0))[0]
            for i in hits[:1]:
                root = scipy.optimize.brentq(lambda x: hyperbolic_g3(x, al) - level,
                                             fine[i], fine[i + 1], xtol=1e-14)
                levels.setdefault(level, []).append((root, al))
    curves = []
    for level in sorted(levels):
        pts = np.array(levels[level])
        if len(pts) >= 2:
            curves.append(Curve(f"g3={level}", pts))
        elif len(pts) == 1:
            curves.append(Curve(f"g3={level}", np.vstack([pts, pts])))
    return curves


def hyperbolic_band_edge(alpha: float, level: int, lo: float = 1e-6) -> float:
    """The radius where ``g3(xi, alpha) = level``, found by bisection.

    The bracket starts at the inner edge of the region ``g1 > 0`` (or ``lo``)
    and grows toward ``xi = 1``, where ``g3`` diverges.
    """
    if not alpha < 0:
        raise InvalidArgument("the hyperbolic model needs alpha < 0")

    def f(x):
        with np.errstate(all="ignore"):
            v = hyperbolic_g3(x, alpha)
        return (v if np.isfinite(v) else 0.0) - level

    a = lo
    if f(a) >= 0:
        return a
    gap = 0.5 * (1.0 - a)
    b = 1.0 - gap
    while f(b) < 0:
        a = b
        gap *= 0.5
        b = 1.0 - gap
        if gap < 1e-15:
            raise DomainError("g3 level reachable below xi = 1", f"level={level}")
    return scipy.optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)


# --------------------------------------------------------------------------- #
# Distances
# --------------------------------------------------------------------------- #

def _check_radius(kind: SurfaceKind, r: float, R: float):
    if not (R > 0) or not math.isfinite(R):
        raise DomainError("R > 0", f"R={R!r}")
    if not (r >= 0) or not math.isfinite(r):
        raise DomainError("r >= 0", f"r={r!r}")
    if kind is SurfaceKind.HYPERBOLIC and not r < R:
        raise DomainError("r < R on the hyperbolic plane", f"r={r!r}, R={R!r}")


def conformal_density(surface, r: float, R: float) -> float:
    """Length density ``mu_R(r)`` of the metric along radial lines."""
    kind = _kind(surface)
    if kind is SurfaceKind.SPHERE:
        return 2 * R * R / (R * R + r * r)
    if kind is SurfaceKind.HYPERBOLIC:
        return 2 * R * R / (R * R - r * r)
    return 1.0


def riemann_distance(surface, r: float, R: float = 1.0) -> float:
    """Distance from the centre to a point at Euclidean radius ``r``.

    Examples
    --------
    >>> round(riemann_distance("hyperbolic", 0.5, 1.0), 12) == round(math.log(3), 12)
    True
    """
    kind = _kind(surface)
    _check_radius(kind, r, R)
    if kind is SurfaceKind.SPHERE:
        return 2 * R * math.atan(r / R)
    if kind is SurfaceKind.HYPERBOLIC:
        return R * math.log((R + r) / (R - r))
    return float(r)


def riemann_distance_quadrature(surface, r: float, R: float = 1.0) -> float:
    """Same distance by adaptive quadrature of the radial length density."""
    kind = _kind(surface)
    _check_radius(kind, r, R)
    value, _ = scipy.integrate.quad(lambda s: conformal_density(kind, s, R), 0.0, r,
                                    epsabs=0.0, epsrel=1e-13, limit=200)
    return float(value)
