"""Numerical Maslov-type indices of symplectic paths.

The engine computes ``mu(Delta, Gr gamma)``, the intersection index of the
graph of ``gamma`` with the diagonal ``Delta`` of ``R^2n x R^2n``, and the
generalized Conley-Zehnder index ``iota_1 = mu - n``.

How it works
------------
Every Lagrangian subspace ``L`` of ``(R^2n x R^2n, omega (+) -omega)`` with an
orthonormal frame ``Z = [Z1; Z2]`` is encoded by the symmetric unitary matrix
``W(L) = U U^T``, ``U = ((Z1 + Z2) + i J (Z1 - Z2)) / sqrt(2)``. This map has
three properties the engine relies on:

* ``dim ker(W - I) = dim(L cap Delta)``, so crossings with the diagonal are
  times when an eigenvalue of ``W`` passes through 1;
* rotating ``L`` by ``exp(s Jt)`` with ``Jt = diag(-J, J)`` multiplies ``W``
  by ``exp(2 i s)``;
* an eigenvalue that moves counter-clockwise through 1 corresponds to a
  positive crossing form.

Perturbing the graph to ``exp(-eps Jt) Gr gamma`` therefore rotates every
eigenvalue by ``-2 eps``. The index of the perturbed path is the net number
of eigenvalues of ``W(t)`` that cross the ray at angle ``2 eps``
counter-clockwise. Eigen-angles are computed once on an adaptive grid and
reused for every ``eps``. Crossing instants are then located by bisection
and their crossing forms evaluated as a consistency check.

The grid is refined until the per-step movement bound
``(pi / 2) ||W(t_{i+1}) - W(t_i)||_F`` is small. On each step the count is
taken in a window ``(0, w)`` whose upper edge ``w`` is kept away from all
eigen-angles, so eigenvalues can only enter or leave the window through the
ray that is being counted.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DegenerateCrossingError, EpsilonExhaustedError, InvalidArgument
from .symplectic import GeneratorMatrix, standard_structure

__all__ = [
    "SymplecticPath",
    "Crossing",
    "CrossingScan",
    "IndexResult",
    "souriau_map",
    "fundamental_solution",
    "scan_crossings",
    "detect_crossings",
    "crossing_form",
    "clm_index",
    "iota1",
    "zhu_index",
]

log = logging.getLogger(__name__)

ZERO_BAND = 1e-9        # eigen-angles this close to 0 count as exact intersections
KERNEL_BAND = 1e-8      # band used to read off kernel dimensions at the endpoints
LOCATED_BAND = 1e-10    # tighter band for crossings located by bisection
MERGE_GAP = 1e-8        # located events closer than this (relative to max(1, T)) are one crossing
BISECTION_TOL = 1e-12   # final bracket width in t
MAX_GRID = 2_000_000
MIN_EPS = 5e-8          # perturbations stop here, unless that leaves fewer than MIN_HALVINGS
MIN_HALVINGS = 4


# --------------------------------------------------------------------------- #
# Souriau map and eigen-angles
# --------------------------------------------------------------------------- #

def souriau_map(frames: np.ndarray) -> np.ndarray:
    """Symmetric unitary matrix of Lagrangian subspaces of the doubled space.

    Parameters
    ----------
    frames : ndarray, shape (..., 4n, 2n)
        Orthonormal frames ``[Z1; Z2]``.

    Returns
    -------
    ndarray, shape (..., 2n, 2n), complex
    """
    frames = np.asarray(frames)
    n2 = frames.shape[-1]
    J = standard_structure(n2 // 2)
    Z1 = frames[..., :n2, :]
    Z2 = frames[..., n2:, :]
    U = ((Z1 + Z2) + 1j * (J @ (Z1 - Z2))) / math.sqrt(2.0)
    return U @ np.swapaxes(U, -1, -2)


def _angles(W: np.ndarray) -> np.ndarray:
    return np.angle(np.linalg.eigvals(W))


def _wrap(x):
    return (x + np.pi) % (2.0 * np.pi) - np.pi


# --------------------------------------------------------------------------- #
# Paths
# --------------------------------------------------------------------------- #

def _orthonormal(F: np.ndarray) -> np.ndarray:
    return np.linalg.qr(F)[0]


def _symplectic_inverse(M: np.ndarray) -> np.ndarray:
    n2 = M.shape[-1]
    J = standard_structure(n2 // 2)
    return -J @ np.swapaxes(M, -1, -2) @ J


def _geodesic_logs(values: np.ndarray) -> np.ndarray:
    logs = []
    for k in range(len(values) - 1):
        step = _symplectic_inverse(values[k]) @ values[k + 1]
        Lk = scipy.linalg.logm(step)
        if np.iscomplexobj(Lk):
            if np.max(np.abs(Lk.imag)) > 1e-8 * max(1.0, np.max(np.abs(Lk.real))):
                raise InvalidArgument(f"samples {k} and {k + 1} are too far apart to interpolate")
            Lk = Lk.real
        logs.append(Lk)
    return np.array(logs)


class SymplecticPath:
    """A continuous path ``t -> gamma(t)`` in ``Sp(2n)`` on ``[0, T]``.

    Use one of the constructors :meth:`from_generator`, :meth:`from_function`
    or :meth:`from_samples` rather than calling ``__init__`` directly.

    Attributes
    ----------
    n : int
        Half-dimension.
    T : float
        Length of the time interval.
    generator : ndarray or None
        Constant generator ``A`` for autonomous paths ``exp(A t)``.
    sample_times, sample_values : ndarray
        Stored samples (uniform for generator and function paths).
    """

    def __init__(self, n, T, *, generator=None, func=None, derivative=None,
                 sample_times=None, sample_values=None, steps=1024, sample_tol=1e-8):
        if not (T > 0) or not math.isfinite(T):
            raise InvalidArgument(f"T must be positive and finite, got {T!r}")
        self.n = int(n)
        self.T = float(T)
        self._J = standard_structure(self.n)
        self.generator = generator
        self._func = func
        self._derivative = derivative
        self._anchors = None
        self._logs = None
        if sample_times is None:
            if steps < 1:
                raise InvalidArgument("steps must be positive")
            sample_times = np.linspace(0.0, self.T, int(steps) + 1)
            sample_values = self.values(sample_times)
        self.sample_times = np.asarray(sample_times, dtype=float)
        self.sample_values = np.asarray(sample_values, dtype=float)
        self._validate(sample_tol)

    # ----- constructors --------------------------------------------------- #
    @classmethod
    def from_generator(cls, A, T: float, steps: int = 1024) -> "SymplecticPath":
        """Autonomous path ``exp(A t)`` for a Hamiltonian generator ``A``."""
        if isinstance(A, GeneratorMatrix):
            A = A.matrix
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2 or A.shape[0] == 0:
            raise InvalidArgument(f"generator must be square of even dimension, got {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InvalidArgument("generator has non-finite entries")
        J = standard_structure(A.shape[0] // 2)
        B = -J @ A
        if np.max(np.abs(B - B.T)) > 1e-10 * max(1.0, np.max(np.abs(A))):
            raise InvalidArgument("generator is not Hamiltonian (-J A is not symmetric)")
        return cls(A.shape[0] // 2, T, generator=A, steps=steps)

    @classmethod
    def from_function(cls, func: Callable[[float], np.ndarray], T: float,
                      derivative: Optional[Callable[[float], np.ndarray]] = None,
                      steps: int = 1024) -> "SymplecticPath":
        """Path given by a callable ``t -> gamma(t)``.

        ``derivative`` may supply ``t -> gamma'(t)``; otherwise fourth-order
        finite differences are used.
        """
        g0 = np.asarray(func(0.0), dtype=float)
        if g0.ndim != 2 or g0.shape[0] != g0.shape[1] or g0.shape[0] % 2:
            raise InvalidArgument(f"path values must be square of even dimension, got {g0.shape}")
        return cls(g0.shape[0] // 2, T, func=func, derivative=derivative, steps=steps)

    @classmethod
    def from_samples(cls, times: Sequence[float], values: Sequence[np.ndarray]) -> "SymplecticPath":
        """Path through a table of samples, interpolated along one-parameter subgroups.

        Between consecutive samples ``gamma(t) = g_k exp(s log(g_k^{-1} g_{k+1}))``,
        which stays symplectic and reproduces every sample exactly.
        """
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or len(times) < 2 or values.shape[0] != len(times):
            raise InvalidArgument("need at least two samples with matching times")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise InvalidArgument("sample times must start at 0 and increase strictly")
        if values.ndim != 3 or values.shape[1] != values.shape[2] or values.shape[1] % 2:
            raise InvalidArgument("sample values must be square matrices of even dimension")
        path = cls(values.shape[1] // 2, times[-1], sample_times=times, sample_values=values)
        path._logs = _geodesic_logs(values)
        return path

    # ----- validation ----------------------------------------------------- #
    def _validate(self, tol):
        t, V = self.sample_times, self.sample_values
        if V.shape[1:] != (2 * self.n, 2 * self.n):
            raise InvalidArgument("sample values have the wrong shape")
        if not np.all(np.isfinite(V)):
            raise InvalidArgument("path has non-finite samples")
        if t[0] != 0.0 or abs(t[-1] - self.T) > 1e-12 * self.T or np.any(np.diff(t) <= 0):
            raise InvalidArgument("sample times must run strictly from 0 to T")
        if np.max(np.abs(V[0] - np.eye(2 * self.n))) > 1e-12:
            raise InvalidArgument("a symplectic path must start at the identity")
        J = self._J
        defect = np.max(np.abs(np.swapaxes(V, 1, 2) @ J @ V - J), axis=(1, 2))
        scale = np.maximum(1.0, np.max(np.abs(V), axis=(1, 2)) ** 2)
        bad = np.nonzero(defect > tol * scale)[0]
        if bad.size:
            raise InvalidArgument(f"sample at t={t[bad[0]]:.6g} is not symplectic")

    @property
    def is_autonomous(self) -> bool:
        return self.generator is not None

    # ----- evaluation ----------------------------------------------------- #
    def values(self, t) -> np.ndarray:
        """``gamma(t)`` for an array of times, shape ``(m, 2n, 2n)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.generator is not None:
            return scipy.linalg.expm(self.generator[None, :, :] * t[:, None, None])
        if self._func is not None:
            return np.array([np.asarray(self._func(float(s)), dtype=float) for s in t])
        k = np.clip(np.searchsorted(self.sample_times, t, side="right") - 1, 0, len(self.sample_times) - 2)
        h = self.sample_times[k + 1] - self.sample_times[k]
        s = (t - self.sample_times[k]) / h
        return self.sample_values[k] @ scipy.linalg.expm(self._logs[k] * s[:, None, None])

    def log_derivatives(self, t) -> np.ndarray:
        """``gamma'(t) gamma(t)^{-1}`` for an array of times."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.generator is not None:
            return np.broadcast_to(self.generator, (len(t),) + self.generator.shape).copy()
        G = self.values(t)
        if self._func is not None:
            if self._derivative is not None:
                D = np.array([np.asarray(self._derivative(float(s)), dtype=float) for s in t])
            else:
                D = self._finite_difference(t)
            return D @ _symplectic_inverse(G)
        k = np.clip(np.searchsorted(self.sample_times, t, side="right") - 1, 0, len(self.sample_times) - 2)
        h = self.sample_times[k + 1] - self.sample_times[k]
        # gamma = g_k exp(s L_k)  =>  gamma' gamma^{-1} = g_k (L_k / h) g_k^{-1}
        gk = self.sample_values[k]
        return gk @ (self._logs[k] / h[:, None, None]) @ _symplectic_inverse(gk)

    def _finite_difference(self, t):
        h = 1e-3 * self.T / 64
        out = []
        for s in t:
            if s - 2 * h >= 0 and s + 2 * h <= self.T:
                pts, w = s + h * np.array([-2, -1, 1, 2]), np.array([1, -8, 8, -1]) / (12 * h)
            elif s - 2 * h < 0:
                pts, w = s + h * np.arange(5), np.array([-25, 48, -36, 16, -3]) / (12 * h)
            else:
                pts, w = s - h * np.arange(5), -np.array([-25, 48, -36, 16, -3]) / (12 * h)
            vals = np.array([np.asarray(self._func(float(p)), dtype=float) for p in pts])
            out.append(np.tensordot(w, vals, axes=1))
        return np.array(out)

    def generator_norm(self) -> float:
        """Spectral norm of ``A`` or the largest sampled ``|gamma' gamma^{-1}|``."""
        if self.generator is not None:
            return float(np.linalg.norm(self.generator, 2))
        L = self.log_derivatives(self.sample_times)
        return float(np.max(np.linalg.norm(L, 2, axis=(1, 2))))

    # ----- graph frames --------------------------------------------------- #
    def graph_frames(self, t) -> np.ndarray:
        """Orthonormal frames of ``Gr gamma(t) = {(x, gamma(t) x)}``, shape ``(m, 4n, 2n)``.

        Autonomous paths are propagated from re-orthonormalised anchor frames,
        which stays accurate even when ``gamma`` itself grows exponentially.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        n2 = 2 * self.n
        if self.generator is None:
            G = self.values(t)
            F = np.concatenate([np.broadcast_to(np.eye(n2), G.shape), G], axis=1)
            return _orthonormal(F)
        anchors, step = self._anchor_frames()
        j = np.clip(np.floor(t / step).astype(int), 0, len(anchors) - 1)
        tau = t - j * step
        E = scipy.linalg.expm(self.generator[None, :, :] * tau[:, None, None])
        base = anchors[j]
        F = np.concatenate([base[:, :n2, :], E @ base[:, n2:, :]], axis=1)
        return _orthonormal(F)

    def _anchor_frames(self):
        if self._anchors is None:
            norm = float(np.linalg.norm(self.generator, 2))
            pieces = max(1, int(math.ceil(self.T * norm / 2.0)))
            step = self.T / pieces
            E = scipy.linalg.expm(self.generator * step)
            n2 = 2 * self.n
            F = np.vstack([np.eye(n2), np.eye(n2)]) / math.sqrt(2.0)
            frames = [F]
            for _ in range(pieces):
                F = _orthonormal(np.vstack([F[:n2], E @ F[n2:]]))
                frames.append(F)
            self._anchors = (np.array(frames), step)
        return self._anchors


def fundamental_solution(gen, T: float, steps: int = 1024) -> SymplecticPath:
    """Fundamental solution ``t -> exp(A t)`` of ``z' = A z`` on ``[0, T]``.

    Parameters
    ----------
    gen : GeneratorMatrix or array_like
        Hamiltonian generator.
    T : float
        Positive end time.
    steps : int
        Number of uniform sample intervals, at least 64.
    """
    if int(steps) != steps or steps < 64:
        raise InvalidArgument(f"steps must be an integer >= 64, got {steps!r}")
    return SymplecticPath.from_generator(gen, T, steps=int(steps))


# --------------------------------------------------------------------------- #
# Records
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Crossing:
    """An instant where ``gamma(t) - I`` (or its perturbation) is singular.

    Attributes
    ----------
    t : float
    kernel_dim : int
    m_plus, m_minus : int
        Inertia of the crossing form on the kernel.
    location : str
        ``"start"``, ``"interior"`` or ``"end"``.
    """

    t: float
    kernel_dim: int
    m_plus: int
    m_minus: int
    location: str = "interior"

    @property
    def signature(self) -> int:
        return self.m_plus - self.m_minus

    @property
    def regular(self) -> bool:
        return self.m_plus + self.m_minus == self.kernel_dim


@dataclass(frozen=True)
class CrossingScan:
    """Crossings of an unperturbed path.

    ``persistent_kernel`` is the dimension of ``ker(gamma(t) - I)`` shared by
    every interior time; if it is positive the path has a continuous crossing
    and the Robbin-Salamon sum does not apply.
    """

    crossings: List[Crossing]
    persistent_kernel: int

    @property
    def regular(self) -> bool:
        return self.persistent_kernel == 0 and all(c.regular for c in self.crossings)


@dataclass(frozen=True)
class IndexResult:
    """Outcome of an index computation.

    Attributes
    ----------
    clm : int
        Intersection index with the diagonal.
    iota1 : int
        Generalized Conley-Zehnder index, always ``clm - n``.
    n : int
    crossings : list of Crossing
        Crossings of the path actually summed (the perturbed one when
        ``epsilon_used > 0``).
    epsilon_used : float
        Perturbation size; 0 when the raw crossings were all regular. For
        autonomous paths it refers to the reparametrisation on ``[0, 1]``.
    """

    clm: int
    iota1: int
    n: int
    crossings: List[Crossing] = field(default_factory=list)
    epsilon_used: float = 0.0

    def __post_init__(self):
        if self.iota1 != self.clm - self.n:
            raise AssertionError("iota1 must equal clm - n")


# --------------------------------------------------------------------------- #
# Adaptive scan
# --------------------------------------------------------------------------- #

class _Scan:
    """Eigen-angles of ``W(t)`` on a grid fine enough for window counting."""

    def __init__(self, path: SymplecticPath, base: int = 256):
        self.path = path
        n2 = 2 * path.n
        self.windows = np.linspace(0.2, 2.9, n2 + 1)
        spacing = self.windows[1] - self.windows[0]
        self.dmax = min(0.08, spacing / 5.5)
        t = np.linspace(0.0, path.T, base + 1)
        W = souriau_map(path.graph_frames(t))
        for _ in range(60):
            delta = 0.5 * np.pi * np.linalg.norm(W[1:] - W[:-1], axis=(1, 2))
            bad = np.nonzero(delta > self.dmax)[0]
            if bad.size == 0:
                break
            pieces = np.ceil(1.25 * delta[bad] / self.dmax).astype(int)
            h = t[bad + 1] - t[bad]
            if np.any(h < BISECTION_TOL):
                i = bad[np.argmin(h)]
                raise DegenerateCrossingError((t[i], t[i + 1]), "graph path is not continuous")
            new_t = np.concatenate([t[i] + (t[i + 1] - t[i]) * np.arange(1, m) / m
                                    for i, m in zip(bad, pieces)])
            if len(t) + len(new_t) > MAX_GRID:
                raise DegenerateCrossingError((0.0, path.T), "adaptive grid exceeded its size limit")
            W_new = souriau_map(path.graph_frames(new_t))
            t = np.concatenate([t, new_t])
            W = np.concatenate([W, W_new])
            order = np.argsort(t, kind="stable")
            t, W = t[order], W[order]
        else:
            raise DegenerateCrossingError((0.0, path.T), "adaptive grid did not converge")
        self.t = t
        self.phi = _angles(W)
        self.delta = 0.5 * np.pi * np.linalg.norm(W[1:] - W[:-1], axis=(1, 2))

    # ----- windows and counts -------------------------------------------- #
    def step_windows(self, theta: float) -> np.ndarray:
        psi = _wrap(self.phi - theta)
        margin = 2.0 * self.delta[:, None, None]
        cand = self.windows[None, None, :]
        ok = (np.all(np.abs(psi[:-1, :, None] - cand) > margin, axis=1)
              & np.all(np.abs(psi[1:, :, None] - cand) > margin, axis=1))
        if not np.all(ok.any(axis=1)):
            i = int(np.nonzero(~ok.any(axis=1))[0][0])
            raise DegenerateCrossingError((self.t[i], self.t[i + 1]), "no free counting window")
        return self.windows[np.argmax(ok, axis=1)]

    def flows(self, theta: float):
        """Per-step counter-clockwise crossings of the ray at angle ``theta``."""
        w = self.step_windows(theta)
        psi = _wrap(self.phi - theta)
        inside_l = ((psi[:-1] > 0) & (psi[:-1] < w[:, None])).sum(axis=1)
        inside_r = ((psi[1:] > 0) & (psi[1:] < w[:, None])).sum(axis=1)
        return inside_r - inside_l, w

    def raw_states(self, w):
        """Encoded (positive-window count, zero-band count) at both ends of each step."""
        base = 2 * self.path.n + 1
        phi = self.phi
        pos_l = ((phi[:-1] > ZERO_BAND) & (phi[:-1] < w[:, None])).sum(axis=1)
        pos_r = ((phi[1:] > ZERO_BAND) & (phi[1:] < w[:, None])).sum(axis=1)
        z_l = (np.abs(phi[:-1]) <= ZERO_BAND).sum(axis=1)
        z_r = (np.abs(phi[1:]) <= ZERO_BAND).sum(axis=1)
        return pos_l + base * z_l, pos_r + base * z_r

    # ----- evaluations at arbitrary times --------------------------------- #
    def angles_at(self, t):
        return _angles(souriau_map(self.path.graph_frames(t)))

    def state_at(self, t, w, theta, raw):
        psi = _wrap(self.angles_at(t) - theta)
        if raw:
            base = 2 * self.path.n + 1
            pos = ((psi > ZERO_BAND) & (psi < w[:, None])).sum(axis=1)
            return pos + base * (np.abs(psi) <= ZERO_BAND).sum(axis=1)
        return ((psi > 0) & (psi < w[:, None])).sum(axis=1)


def _bisect(scan: _Scan, lo, hi, s_lo, s_hi, w, theta, raw):
    """Shrink brackets until each holds one change of the counting state.

    Returns a list of ``(t_star, state_before, state_after)``.
    """
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    s_lo, s_hi, w = np.asarray(s_lo), np.asarray(s_hi), np.asarray(w, float)
    done = []
    tol = BISECTION_TOL * max(1.0, scan.path.T)
    for _ in range(200):
        if lo.size == 0:
            break
        finished = (hi - lo) <= tol
        for i in np.nonzero(finished)[0]:
            done.append((0.5 * (lo[i] + hi[i]), int(s_lo[i]), int(s_hi[i])))
        keep = ~finished
        lo, hi, s_lo, s_hi, w = lo[keep], hi[keep], s_lo[keep], s_hi[keep], w[keep]
        if lo.size == 0:
            break
        mid = 0.5 * (lo + hi)
        s_mid = scan.state_at(mid, w, theta, raw)
        left = s_mid == s_lo
        right = (s_mid == s_hi) & ~left
        split = ~left & ~right
        new_lo = np.where(left, mid, lo)
        new_hi = np.where(right, mid, np.where(split, mid, hi))
        new_slo = np.where(left, s_mid, s_lo)
        new_shi = np.where(right | split, s_mid, s_hi)
        # split brackets also continue on their upper half
        lo = np.concatenate([new_lo, mid[split]])
        hi = np.concatenate([new_hi, hi[split]])
        s_lo = np.concatenate([new_slo, s_mid[split]])
        s_hi = np.concatenate([new_shi, s_hi[split]])
        w = np.concatenate([w, w[split]])
        if lo.size > 4 * MAX_GRID:
            raise DegenerateCrossingError((float(lo.min()), float(hi.max())))
    else:
        raise DegenerateCrossingError((float(lo.min()), float(hi.max())), "bisection did not converge")
    done.sort()
    return done


# --------------------------------------------------------------------------- #
# Crossing forms
# --------------------------------------------------------------------------- #

def _forms(path: SymplecticPath, times, kernel_dims, eps: float = 0.0, with_gap: bool = False):
    """Inertia of the crossing forms at the given times.

    For the graph rotated by ``exp(-eps Jt)`` the kernel consists of vectors
    ``Z c`` of ``Gr gamma`` with ``exp(eps J) Z1 c = exp(-eps J) Z2 c``, and the
    form is ``<-J L x, x>`` with ``L = gamma' gamma^{-1}`` and
    ``x = exp(2 eps J) Z1 c``. With ``with_gap`` each entry also carries the
    smallest absolute eigenvalue of the restricted form.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        return []
    n2 = 2 * path.n
    J = path._J
    Z = path.graph_frames(times)
    L = path.log_derivatives(times)
    Rp = math.cos(eps) * np.eye(n2) + math.sin(eps) * J
    Rm = math.cos(eps) * np.eye(n2) - math.sin(eps) * J
    R2 = math.cos(2 * eps) * np.eye(n2) + math.sin(2 * eps) * J
    out = []
    for Zi, Li, kd in zip(Z, L, kernel_dims):
        kd = int(kd)
        if kd == 0:
            out.append((0, 0, math.inf) if with_gap else (0, 0))
            continue
        Z1, Z2 = Zi[:n2], Zi[n2:]
        _, _, Vh = np.linalg.svd(Rp @ Z1 - Rm @ Z2)
        C = Vh[n2 - kd:].T
        X = R2 @ Z1 @ C
        S = -J @ Li
        S = 0.5 * (S + S.T)
        X = X / np.linalg.norm(X, axis=0)
        F = X.T @ S @ X
        ev = np.linalg.eigvalsh(0.5 * (F + F.T))
        thr = 1e-8 * max(1.0, float(np.linalg.norm(S, 2)))
        inertia = (int(np.sum(ev > thr)), int(np.sum(ev < -thr)))
        out.append(inertia + (float(np.min(np.abs(ev))),) if with_gap else inertia)
    return out


def crossing_form(path: SymplecticPath, t0: float, tol: float = 1e-8):
    """Inertia ``(m_plus, m_minus)`` of the crossing form at ``t0``.

    The form is ``Q(u) = <-J gamma'(t0) gamma(t0)^{-1} u, u>`` restricted to
    ``ker(gamma(t0) - I)``.

    Raises
    ------
    InvalidArgument
        If ``gamma(t0) - I`` is non-singular at threshold ``tol``.
    """
    if not (0.0 <= t0 <= path.T):
        raise InvalidArgument(f"t0={t0!r} lies outside [0, T]")
    kd = _kernel_dim(path, t0, tol)
    if kd == 0:
        raise InvalidArgument(f"t0={t0!r} is not a crossing")
    return _forms(path, [t0], [kd])[0]


def _kernel_dim(path: SymplecticPath, t0: float, tol: float) -> int:
    n2 = 2 * path.n
    Z = path.graph_frames([t0])[0]
    s = np.linalg.svd(Z[:n2] - Z[n2:], compute_uv=False)
    return int(np.sum(s <= tol))


# --------------------------------------------------------------------------- #
# Raw crossings
# --------------------------------------------------------------------------- #

def _raw_crossings(scan: _Scan) -> CrossingScan:
    path = scan.path
    n2 = 2 * path.n
    phi = scan.phi
    interior_zero = (np.abs(phi[1:-1]) <= ZERO_BAND).sum(axis=1)
    persistent = int(interior_zero.min()) if interior_zero.size else 0

    t = scan.t
    end_dim = int(np.sum(np.abs(phi[-1]) <= KERNEL_BAND))
    mp0, mm0, gap0 = _forms(path, [0.0], [n2], with_gap=True)[0]
    mpT, mmT, gapT = _forms(path, [path.T], [end_dim], with_gap=True)[0]
    w = scan.step_windows(0.0)
    s_l, s_r = scan.raw_states(w)
    lo, hi = t[:-1].copy(), t[1:].copy()
    # The endpoints are crossings themselves, so compare against states just
    # inside them, late enough for the departing eigen-angles (speed ~ the
    # form's eigenvalues) to have left the zero band.
    lo[0] = min(0.5 * t[1], 1e3 * ZERO_BAND / max(gap0, 1e-300))
    s_l[0] = scan.state_at(lo[:1], w[:1], 0.0, True)[0]
    if end_dim:
        hi[-1] = t[-1] - min(0.5 * (t[-1] - t[-2]), 1e3 * ZERO_BAND / max(gapT, 1e-300))
        s_r[-1] = scan.state_at(hi[-1:], w[-1:], 0.0, True)[0]
    idx = np.nonzero(s_l != s_r)[0]
    located = _bisect(scan, lo[idx], hi[idx], s_l[idx], s_r[idx], w[idx], 0.0, True)

    times, _ = _merge_clusters(located, path.T)
    dims = [int(np.sum(np.abs(psi) <= KERNEL_BAND)) for psi in scan.angles_at(times)] if len(times) else []
    times = list(times)
    keep = [i for i, kd in enumerate(dims) if kd > persistent]
    times = [times[i] for i in keep]
    dims = [dims[i] for i in keep]

    crossings = [Crossing(0.0, n2, mp0, mm0, location="start")]
    for (mp, mm), ts, kd in zip(_forms(path, times, dims), times, dims):
        crossings.append(Crossing(float(ts), kd, mp, mm, "interior"))
    if end_dim:
        crossings.append(Crossing(path.T, end_dim, mpT, mmT, "end"))
    return CrossingScan(crossings, persistent)


def scan_crossings(path: SymplecticPath) -> CrossingScan:
    """Crossings of the unperturbed path together with its persistent kernel."""
    return _raw_crossings(_Scan(path))


def detect_crossings(path: SymplecticPath, tol: float = 1e-8) -> List[Crossing]:
    """All instants where ``gamma(t) - I`` is singular.

    Endpoints are always inspected. If the kernel is non-trivial on a whole
    interval (a continuous crossing), only the instants where it grows are
    reported as interior crossings; see :func:`scan_crossings`.

    Parameters
    ----------
    path : SymplecticPath
    tol : float
        Kernel threshold for the endpoints and located crossings.
    """
    scan = scan_crossings(path)
    if tol == KERNEL_BAND:
        return scan.crossings
    out = []
    for c in scan.crossings:
        kd = _kernel_dim(path, c.t, tol)
        if kd == c.kernel_dim or kd == 0:
            out.append(c)
        else:
            mp, mm = _forms(path, [c.t], [kd])[0]
            out.append(Crossing(c.t, kd, mp, mm, c.location))
    return out


# --------------------------------------------------------------------------- #
# Indices
# --------------------------------------------------------------------------- #

def _perturbed_crossings(scan: _Scan, eps: float):
    theta = 2.0 * eps
    flows, w = scan.flows(theta)
    idx = np.nonzero(flows)[0]
    t = scan.t
    psi = _wrap(scan.phi - theta)
    s_l = ((psi[:-1] > 0) & (psi[:-1] < w[:, None])).sum(axis=1)
    s_r = ((psi[1:] > 0) & (psi[1:] < w[:, None])).sum(axis=1)
    located = _bisect(scan, t[idx], t[idx + 1], s_l[idx], s_r[idx], w[idx], theta, False)
    if not located:
        return [], int(flows.sum())
    times, jumps, dims = _resolve_clusters(scan, located, theta)
    forms = _forms(scan.path, times, dims, eps)
    crossings = []
    for ts, kd, jump, (mp, mm) in zip(times, dims, jumps, forms):
        c = Crossing(float(ts), int(kd), mp, mm, "interior")
        if not c.regular:
            raise _NonRegular(ts)
        if c.signature != jump:
            raise DegenerateCrossingError((ts, ts), "crossing form disagrees with eigenvalue flow")
        crossings.append(c)
    return crossings, int(flows.sum())


def _merge_clusters(located, T):
    """Merge located state changes closer than the kernel resolution into one event."""
    gap = MERGE_GAP * max(1.0, T)
    groups = []
    for t_star, before, after in located:
        if groups and t_star - groups[-1][-1][0] <= gap:
            groups[-1].append((t_star, before, after))
        else:
            groups.append([(t_star, before, after)])
    # midpoint of the span: entry into and exit from the zero band are symmetric
    times = np.array([0.5 * (grp[0][0] + grp[-1][0]) for grp in groups])
    jumps = np.array([sum(g[2] - g[1] for g in grp) for grp in groups])
    return times, jumps


def _resolve_clusters(scan: _Scan, located, theta: float):
    """Event times, net jumps and kernel dimensions of located perturbed crossings.

    A merged cluster is kept only if its eigen-angles really meet the ray
    together at the merged time; otherwise its events are distinct crossings
    that happen to be close, and each is evaluated on its own.
    """
    times, jumps = _merge_clusters(located, scan.path.T)
    band = (np.abs(_wrap(scan.angles_at(times) - theta)) <= LOCATED_BAND).sum(axis=1)
    gap = MERGE_GAP * max(1.0, scan.path.T)
    out_t, out_j, out_d = [], [], []
    start = 0
    for ts, jump, nb in zip(times, jumps, band):
        # the located events that make up this cluster
        stop = start + 1
        while stop < len(located) and located[stop][0] - located[stop - 1][0] <= gap:
            stop += 1
        members = located[start:stop]
        start = stop
        if len(members) > 1 and nb < sum(abs(b - a) for _, a, b in members):
            single_t = np.array([m[0] for m in members])
            single_band = (np.abs(_wrap(scan.angles_at(single_t) - theta)) <= LOCATED_BAND).sum(axis=1)
            for (t1, a, b), nb1 in zip(members, single_band):
                out_t.append(t1)
                out_j.append(b - a)
                out_d.append(max(abs(b - a), int(nb1)))
        else:
            out_t.append(ts)
            out_j.append(jump)
            out_d.append(max(abs(int(jump)), int(nb)))
    return np.array(out_t), np.array(out_j), np.array(out_d)


class _NonRegular(Exception):
    def __init__(self, t):
        self.t = t


def _endpoint_ok(scan: _Scan, eps: float) -> bool:
    end = scan.phi[-1]
    return not np.any(np.abs(end - 2.0 * eps) <= 0.25 * eps)


def _perturbed_index(scan: _Scan, path: SymplecticPath):
    eps = 1e-4 / (1.0 + path.generator_norm() * path.T)
    # the shifted ray must stay well clear of the exact-intersection band
    floor = max(min(MIN_EPS, eps / 2 ** MIN_HALVINGS), 5.0 * ZERO_BAND)
    previous = None
    while eps >= floor:
        if not _endpoint_ok(scan, eps):
            previous = None
            eps *= 0.5
            continue
        value = int(scan.flows(2.0 * eps)[0].sum())
        if previous is not None and previous[1] == value:
            eps_star = previous[0]
            try:
                crossings, total = _perturbed_crossings(scan, eps_star)
            except _NonRegular:
                previous = (eps, value)
                eps *= 0.5
                continue
            if total != value or sum(c.signature for c in crossings) != value:
                raise DegenerateCrossingError((0.0, path.T), "crossing count is inconsistent")
            return value, crossings, eps_star
        previous = (eps, value)
        eps *= 0.5
    raise EpsilonExhaustedError("no perturbation size stabilised the index")


def _robbin_salamon(crossings: Sequence[Crossing]) -> int:
    total = 0
    for c in crossings:
        if c.location == "start":
            total += c.m_plus
        elif c.location == "end":
            total -= c.m_minus
        else:
            total += c.signature
    return total


def _balancing_exponents(A: np.ndarray) -> np.ndarray:
    """Exponents ``x`` of the symplectic scaling ``D = diag(e^x, e^-x)`` that balances ``A``.

    The logarithms of the non-zero off-diagonal magnitudes of ``D A D^-1``
    are made as equal as possible in the least-squares sense; the
    minimum-norm solution leaves directions the entries do not see at 0.
    """
    n = A.shape[0] // 2
    idx = np.argwhere(np.abs(A) > 0)
    idx = idx[idx[:, 0] != idx[:, 1]]
    if len(idx) < 2:
        return np.zeros(n)
    rows = np.zeros((len(idx), n))
    for r, (i, j) in enumerate(idx):
        rows[r, i % n] += 1.0 if i < n else -1.0
        rows[r, j % n] -= 1.0 if j < n else -1.0
    rhs = -np.log(np.abs(A[idx[:, 0], idx[:, 1]]))
    rows -= rows.mean(axis=0)
    rhs -= rhs.mean()
    return np.linalg.lstsq(rows, rhs, rcond=None)[0]


def _normalised(path: SymplecticPath):
    """Autonomous path rescaled to unit length and balanced; returns it with the time scale.

    ``exp(A t)`` on ``[0, T]`` is reparametrised as ``exp(A T s)`` on
    ``[0, 1]`` and then conjugated by a diagonal symplectic scaling when that
    shrinks the generator. Reparametrisation and conjugation by a constant
    symplectic matrix (which fixes the diagonal) leave the index unchanged,
    while badly scaled generators and very short or long intervals become
    far easier to scan.
    """
    if not path.is_autonomous:
        return path, 1.0
    A = path.generator * path.T
    x = _balancing_exponents(A)
    if np.any(x):
        d = np.exp(np.concatenate([x, -x]))
        B = d[:, None] * A / d[None, :]
        if np.linalg.norm(B, 2) * 2.0 <= np.linalg.norm(A, 2):
            A = B
    return SymplecticPath.from_generator(A, 1.0, steps=len(path.sample_times) - 1), path.T


def _rescaled(crossings, scale):
    if scale == 1.0:
        return list(crossings)
    return [replace(c, t=c.t * scale) for c in crossings]


def iota1(path: SymplecticPath) -> IndexResult:
    """Generalized Conley-Zehnder index of ``path`` (and the intersection index).

    If every raw crossing is regular and isolated, the index is the
    Robbin-Salamon sum ``m+(start) + sum sgn(interior) - m-(end)``, checked
    against the perturbed count. Otherwise it is the count for the graph
    rotated by ``exp(-eps Jt)``, where ``eps`` starts at
    ``1e-4 / (1 + |A| T)`` and is halved until two consecutive values agree.
    Autonomous paths are first rescaled to unit length and balanced by a
    diagonal symplectic scaling, neither of which changes the index.

    Raises
    ------
    EpsilonExhaustedError
        If no perturbation size gives a stable, regular count.
    DegenerateCrossingError
        If the crossings cannot be resolved numerically.
    """
    path, scale = _normalised(path)
    scan = _Scan(path)
    value, pert_crossings, eps = _perturbed_index(scan, path)
    interior_zero = (np.abs(scan.phi[1:-1]) <= ZERO_BAND).sum(axis=1)
    if interior_zero.size and interior_zero.min() == 0:
        raw = _raw_crossings(scan)
        if raw.regular:
            rs = _robbin_salamon(raw.crossings)
            if rs == value:
                return IndexResult(rs, rs - path.n, path.n, _rescaled(raw.crossings, scale), 0.0)
            log.warning("crossing-form sum %d disagrees with perturbed count %d; "
                        "keeping the perturbed value", rs, value)
    return IndexResult(value, value - path.n, path.n, _rescaled(pert_crossings, scale), eps)


def clm_index(path: SymplecticPath) -> int:
    """Intersection index ``mu(Delta, Gr gamma)`` of the graph with the diagonal."""
    return iota1(path).clm


def zhu_index(path: SymplecticPath, tol: float = 1e-10) -> int:
    """Index of a lower-block-triangular path from its endpoint values alone.

    For ``gamma = [[M11, 0], [M21, M22]]`` and ``S(t) = ker(M11(t) - I)``::

        m+(Q(T)|S(T)) - m+(Q(0)|S(0)) + dim S(0) - dim S(T),   Q = sym(M11^T M21)

    Raises
    ------
    InvalidArgument
        If some sample has a non-zero upper-right block.
    """
    n = path.n
    V = path.sample_values
    if np.max(np.abs(V[:, :n, n:])) > tol:
        raise InvalidArgument("path is not lower block triangular")

    def part(M):
        M11, M21 = M[:n, :n], M[n:, :n]
        thr = tol * max(1.0, float(np.linalg.norm(M11, 2)))
        _, s, Vh = np.linalg.svd(M11 - np.eye(n))
        K = Vh[np.sum(s > thr):].T
        if K.shape[1] == 0:
            return 0, 0
        Q = M11.T @ M21
        Q = 0.5 * (Q + Q.T)
        ev = np.linalg.eigvalsh(K.T @ Q @ K)
        qthr = 1e-8 * max(1.0, float(np.max(np.abs(Q))))
        return int(np.sum(ev > qthr)), K.shape[1]

    p0, d0 = part(V[0])
    pT, dT = part(V[-1])
    return pT - p0 + d0 - dT
