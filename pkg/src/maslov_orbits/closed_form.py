"""Closed-form generalized Conley-Zehnder index of the linearised orbit system.

The index of ``t -> exp(A t)`` on ``[0, T]`` for the generator
``A(a, b, c, d)`` depends only on the sign of ``d``, the sign of
``c d + b^2`` (or on ``b`` and ``c`` when ``d = 0``) and, for ``d < 0``, on
how many full turns the rotation factor ``exp(i sqrt(-a d) t)`` makes:

===========  =====================  ===========
``d``        condition              index
===========  =====================  ===========
``< 0``      ``cd + b^2 >= 0``      ``2k``
``< 0``      ``cd + b^2 < 0``       ``2k + 1``
``= 0``      ``b != 0``             ``0``
``= 0``      ``b = 0, c > 0``       ``0``
``= 0``      ``b = 0, c <= 0``      ``-1``
``> 0``      ``cd + b^2 > 0``       ``0``
``> 0``      ``cd + b^2 <= 0``      ``-1``
===========  =====================  ===========

where ``k >= 0`` is the integer with ``2 pi k < sqrt(-a d) T <= 2 pi (k + 1)``.
The ``-1`` rows require ``c <= 0``; for the orbit model ``c > 0`` always, so
they are flagged as outside the model in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .errors import InvalidArgument
from .symplectic import is_negligible

__all__ = ["Sign", "Subcase", "CaseTag", "compute_k", "classify_generator", "closed_form_iota1",
           "theorem1_iota1"]

TWO_PI = 2.0 * math.pi


class Sign(str, Enum):
    NEGATIVE = "negative"
    ZERO = "zero"
    POSITIVE = "positive"


class Subcase(str, Enum):
    CDB2_POS = "cdb2_pos"
    CDB2_ZERO = "cdb2_zero"
    CDB2_NEG = "cdb2_neg"
    B_ZERO_C_POS = "b_zero_c_pos"
    B_ZERO_C_NONPOS = "b_zero_c_nonpos"
    B_NONZERO = "b_nonzero"


@dataclass(frozen=True)
class CaseTag:
    """Row of the index table that a generator falls into.

    Attributes
    ----------
    d_sign : Sign
    subcase : Subcase
    k : int or None
        Number of completed turns of the rotation factor; only for ``d < 0``.
    """

    d_sign: Sign
    subcase: Subcase
    k: Optional[int] = None

    def __post_init__(self):
        if (self.k is not None) != (self.d_sign is Sign.NEGATIVE):
            raise InvalidArgument("k must be given exactly when d < 0")
        allowed = {
            Sign.NEGATIVE: {Subcase.CDB2_POS, Subcase.CDB2_ZERO, Subcase.CDB2_NEG},
            Sign.POSITIVE: {Subcase.CDB2_POS, Subcase.CDB2_ZERO, Subcase.CDB2_NEG},
            Sign.ZERO: {Subcase.B_NONZERO, Subcase.B_ZERO_C_POS, Subcase.B_ZERO_C_NONPOS},
        }
        if self.subcase not in allowed[self.d_sign]:
            raise InvalidArgument(f"subcase {self.subcase.value} impossible for d {self.d_sign.value}")

    @property
    def model_feasible(self) -> bool:
        """False for the rows that need ``c <= 0`` and so never occur for orbits."""
        if self.d_sign is Sign.ZERO:
            return self.subcase is not Subcase.B_ZERO_C_NONPOS
        if self.d_sign is Sign.POSITIVE:
            return self.subcase is Subcase.CDB2_POS
        return True


def _rotation_turns(x: float, rtol: float = 1e-12) -> int:
    """Integer ``k >= 0`` with ``2 pi k < x <= 2 pi (k + 1)`` for ``x > 0``.

    Values within ``rtol`` (relative) of a multiple of ``2 pi`` are snapped onto
    it so that the closed right end is honoured despite rounding.
    """
    r = x / TWO_PI
    m = round(r)
    if m >= 1 and abs(r - m) <= rtol * max(1.0, r):
        return int(m) - 1
    return max(int(math.ceil(r)) - 1, 0)


def compute_k(a: float, d: float, T: float) -> int:
    """Number of completed turns of the rotation factor on ``[0, T]``.

    Parameters
    ----------
    a : float
        Positive coefficient.
    d : float
        Negative coefficient.
    T : float
        Positive period.

    Returns
    -------
    int
        The ``k >= 0`` with ``2 pi k < sqrt(-a d) T <= 2 pi (k + 1)``.

    Examples
    --------
    >>> compute_k(1.0, -1.0, 2 * math.pi)
    0
    >>> compute_k(1.0, -1.0, 4 * math.pi)
    1
    """
    if not (a > 0):
        raise InvalidArgument(f"a must be positive, got {a!r}")
    if not (d < 0):
        raise InvalidArgument(f"k is only defined for d < 0, got d={d!r}")
    if not (T > 0) or not math.isfinite(T):
        raise InvalidArgument(f"T must be positive and finite, got {T!r}")
    return _rotation_turns(math.sqrt(-a * d) * T)


def classify_generator(a: float, b: float, c: float, d: float, rtol: float = 1e-12) -> CaseTag:
    """Locate ``(a, b, c, d)`` in the index table, ignoring ``k``.

    The returned tag for ``d < 0`` carries ``k = 0`` as a placeholder; use
    :func:`closed_form_iota1` to get the tag with the true ``k``.
    """
    for name, value in zip("abcd", (a, b, c, d)):
        if not math.isfinite(value):
            raise InvalidArgument(f"coefficient {name} must be finite, got {value!r}")
    if not (a > 0):
        raise InvalidArgument(f"a must be positive, got {a!r}")
    if is_negligible(d, a, b * b, c, rtol=rtol):
        if not is_negligible(b, a, c, rtol=rtol):
            return CaseTag(Sign.ZERO, Subcase.B_NONZERO)
        return CaseTag(Sign.ZERO, Subcase.B_ZERO_C_POS if c > 0 else Subcase.B_ZERO_C_NONPOS)
    s = c * d + b * b
    if is_negligible(s, b * b, c * d, rtol=rtol):
        sub = Subcase.CDB2_ZERO
    else:
        sub = Subcase.CDB2_POS if s > 0 else Subcase.CDB2_NEG
    if d < 0:
        return CaseTag(Sign.NEGATIVE, sub, 0)
    return CaseTag(Sign.POSITIVE, sub)


def closed_form_iota1(a: float, b: float, c: float, d: float, T: float, rtol: float = 1e-12):
    """Closed-form index of ``exp(A t)``, ``t in [0, T]``.

    Parameters
    ----------
    a, b, c, d : float
        Generator coefficients, ``a > 0``.
    T : float
        Positive length of the time interval.

    Returns
    -------
    iota1 : int
    tag : CaseTag
        Row of the table, with ``k`` filled in when ``d < 0``.

    Examples
    --------
    >>> closed_form_iota1(1, 2, 1, -1, 2 * math.pi)[0]
    0
    >>> closed_form_iota1(1, 0, 1, 0, 3.0)[0]
    0
    """
    if not (T > 0) or not math.isfinite(T):
        raise InvalidArgument(f"T must be positive and finite, got {T!r}")
    tag = classify_generator(a, b, c, d, rtol=rtol)
    if tag.d_sign is Sign.NEGATIVE:
        k = compute_k(a, d, T)
        tag = replace(tag, k=k)
        return (2 * k if tag.subcase is not Subcase.CDB2_NEG else 2 * k + 1), tag
    if tag.d_sign is Sign.ZERO:
        return (-1 if tag.subcase is Subcase.B_ZERO_C_NONPOS else 0), tag
    return (0 if tag.subcase is Subcase.CDB2_POS else -1), tag


# Name under which the published interface exposes the closed-form index.
theorem1_iota1 = closed_form_iota1
