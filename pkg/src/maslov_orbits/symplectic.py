"""Dense linear algebra on small real symplectic matrices.

Conventions used throughout the package:

* ``J = [[0, -I], [I, 0]]`` is the standard complex structure.
* The symplectic form is ``omega(u, v) = <J u, v>``.
* A generator ``A`` is infinitesimally symplectic, i.e. ``A = J B`` with ``B``
  symmetric, so that ``-J A = B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import InvalidArgument

__all__ = [
    "standard_structure",
    "omega_product",
    "is_symplectic",
    "symplectic_defect",
    "diamond_product",
    "matrix_exponential",
    "GeneratorMatrix",
    "PairKind",
    "EigenStructure",
    "eigen_structure",
    "is_negligible",
]


def is_negligible(value: float, *scales: float, rtol: float = 1e-12) -> bool:
    """Return True if ``|value| <= rtol * max(1, |scales|...)``.

    This is the single relative-zero test used for every boundary decision
    (``d = 0``, ``cd + b^2 = 0``, ``b = 0``) in the package.
    """
    scale = max([1.0] + [abs(float(s)) for s in scales])
    return abs(float(value)) <= rtol * scale


def _as_square(M, name: str = "matrix", even: bool = True) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidArgument(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if even and M.shape[0] % 2:
        raise InvalidArgument(f"{name} must have even dimension, got {M.shape[0]}")
    if not np.all(np.isfinite(M)):
        raise InvalidArgument(f"{name} has non-finite entries")
    return M


def standard_structure(n: int) -> np.ndarray:
    """Return the ``2n x 2n`` matrix ``J = [[0, -I_n], [I_n, 0]]``.

    Parameters
    ----------
    n : int
        Half-dimension, at least 1.

    Returns
    -------
    ndarray
        ``J`` with ``J @ J = -I`` and ``J.T = -J``.
    """
    if int(n) != n or n < 1:
        raise InvalidArgument(f"half-dimension must be a positive integer, got {n!r}")
    n = int(n)
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def omega_product(u, v) -> float:
    """Evaluate the standard symplectic form ``omega(u, v) = <J u, v>``.

    Parameters
    ----------
    u, v : array_like
        Vectors of the same even length ``2n``.

    Returns
    -------
    float

    Examples
    --------
    >>> omega_product([1, 0, 0, 0], [1, 0, 1, 0])
    1.0
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim != 1 or v.ndim != 1 or u.shape != v.shape or u.size % 2 or u.size == 0:
        raise InvalidArgument(f"omega_product needs two vectors of equal even length, got {u.shape} and {v.shape}")
    J = standard_structure(u.size // 2)
    return float((J @ u) @ v)


def symplectic_defect(M) -> float:
    """Return ``max |M^T J M - J|`` (entrywise maximum)."""
    M = _as_square(M)
    J = standard_structure(M.shape[0] // 2)
    return float(np.max(np.abs(M.T @ J @ M - J)))


def is_symplectic(M, tol: float = 1e-12) -> bool:
    """Membership test for the symplectic group.

    Parameters
    ----------
    M : array_like
        Square matrix of even dimension.
    tol : float
        Bound on the entrywise maximum of ``M^T J M - J``.

    Returns
    -------
    bool

    Raises
    ------
    InvalidArgument
        If ``M`` is not square of even dimension.
    """
    return symplectic_defect(M) <= tol


def diamond_product(M1, M2) -> np.ndarray:
    """Symplectic direct sum of two matrices with interleaved blocks.

    With ``M1 = [[A1, B1], [C1, D1]]`` (blocks ``m1 x m1``) and
    ``M2 = [[A2, B2], [C2, D2]]`` (blocks ``m2 x m2``) the result is::

        [[A1,  0, B1,  0],
         [ 0, A2,  0, B2],
         [C1,  0, D1,  0],
         [ 0, C2,  0, D2]]

    so that the symplectic structure of the result is again the standard one.
    """
    M1 = _as_square(M1, "M1")
    M2 = _as_square(M2, "M2")
    m1, m2 = M1.shape[0] // 2, M2.shape[0] // 2
    m = m1 + m2
    out = np.zeros((2 * m, 2 * m))
    i1 = np.r_[0:m1, m:m + m1]
    i2 = np.r_[m1:m, m + m1:2 * m]
    out[np.ix_(i1, i1)] = M1
    out[np.ix_(i2, i2)] = M2
    return out


def matrix_exponential(A, t: float = 1.0) -> np.ndarray:
    """Return ``exp(A t)``.

    Evaluated with scaling and squaring plus Pade approximation
    (``scipy.linalg.expm``).

    Parameters
    ----------
    A : array_like
        Square matrix.
    t : float
        Finite time.
    """
    A = _as_square(A, "A", even=False)
    if not math.isfinite(float(t)):
        raise InvalidArgument(f"time must be finite, got {t!r}")
    return scipy.linalg.expm(A * float(t))


@dataclass(frozen=True)
class GeneratorMatrix:
    """The 4x4 linearised circular-orbit generator.

    ``A = [[0, b, d, 0], [0, 0, 0, 0], [a, 0, 0, 0], [0, c, -b, 0]]``.
    The matrix is built by placement, so ``-J A`` is exactly symmetric.

    Parameters
    ----------
    a : float
        Must be positive.
    b, c, d : float
        Any finite reals.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            value = getattr(self, name)
            if not math.isfinite(float(value)):
                raise InvalidArgument(f"coefficient {name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not self.a > 0:
            raise InvalidArgument(f"coefficient a must be positive, got {self.a!r}")

    @property
    def matrix(self) -> np.ndarray:
        a, b, c, d = self.a, self.b, self.c, self.d
        return np.array([
            [0.0, b, d, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [a, 0.0, 0.0, 0.0],
            [0.0, c, -b, 0.0],
        ])

    @property
    def hamiltonian(self) -> np.ndarray:
        """The symmetric matrix ``B = -J A``."""
        a, b, c, d = self.a, self.b, self.c, self.d
        return np.array([
            [a, 0.0, 0.0, 0.0],
            [0.0, c, -b, 0.0],
            [0.0, -b, -d, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ])

    @property
    def cdb2(self) -> float:
        """The scalar ``c d + b^2`` that decides the Jordan structure at zero."""
        return self.c * self.d + self.b * self.b

    def coefficients(self) -> tuple:
        return (self.a, self.b, self.c, self.d)


class PairKind(str, Enum):
    """Nature of the non-zero eigenvalue pair ``lambda^2 = a d``."""

    IMAGINARY = "imaginary"
    REAL = "real"
    NONE = "none"


@dataclass(frozen=True)
class EigenStructure:
    """Spectral summary of a generator.

    Attributes
    ----------
    zero_multiplicity : int
        Algebraic multiplicity of the eigenvalue 0 (2 or 4).
    zero_semisimple : bool
        Whether 0 is a semisimple eigenvalue.
    pair : PairKind
        Kind of the non-zero pair.
    pair_value : float
        ``sqrt(|a d|)``; the pair is ``+-i*value`` or ``+-value``, 0 for ``NONE``.
    """

    zero_multiplicity: int
    zero_semisimple: bool
    pair: PairKind
    pair_value: float


def eigen_structure(G: GeneratorMatrix, rtol: float = 1e-12) -> EigenStructure:
    """Read off the spectrum of ``A`` from its characteristic polynomial.

    ``det(A - x I) = x^2 (x^2 - a d)``. For ``d != 0`` the eigenvalue 0 is
    semisimple exactly when ``c d + b^2 = 0``. For ``d = 0`` the matrix is
    nilpotent and non-zero (``a > 0``), so 0 is never semisimple.

    Parameters
    ----------
    G : GeneratorMatrix
    rtol : float
        Relative tolerance of the scalar zero tests.
    """
    a, b, c, d = G.coefficients()
    d_zero = is_negligible(d, a, b * b, c, rtol=rtol)
    if d_zero:
        return EigenStructure(4, False, PairKind.NONE, 0.0)
    value = math.sqrt(abs(a * d))
    pair = PairKind.IMAGINARY if d < 0 else PairKind.REAL
    semisimple = is_negligible(G.cdb2, b * b, c * d, rtol=rtol)
    return EigenStructure(2, semisimple, pair, value)
