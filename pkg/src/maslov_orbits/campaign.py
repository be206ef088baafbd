"""Seeded randomized comparison of the closed-form index against the crossing count."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .closed_form import closed_form_iota1
from .errors import InvalidArgument
from .maslov import fundamental_solution, iota1
from .symplectic import GeneratorMatrix

__all__ = ["Sample", "Outcome", "CampaignReport", "draw_samples", "in_guard_band",
           "evaluate_sample", "run_campaign", "parallel_map"]

#: Sampling box ``a in (0.1, 5]``, ``b, c, d in [-5, 5]``, ``T in (0.5, 20]``.
A_RANGE = (0.1, 5.0)
BCD_RANGE = (-5.0, 5.0)
T_RANGE = (0.5, 20.0)


@dataclass(frozen=True)
class Sample:
    a: float
    b: float
    c: float
    d: float
    T: float


@dataclass(frozen=True)
class Outcome:
    sample: Sample
    closed_form: int
    numeric: Optional[int]
    error: Optional[str] = None

    @property
    def agrees(self) -> bool:
        return self.error is None and self.numeric == self.closed_form


@dataclass
class CampaignReport:
    """Result of a verification run.

    ``drawn`` counts all generated samples; ``total`` those outside the guard
    band, which are the ones compared.
    """

    seed: int
    guard: float
    drawn: int
    total: int
    agreements: int
    disagreements: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.disagreements and self.agreements == self.total

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "guard": self.guard,
            "drawn": self.drawn,
            "total": self.total,
            "agreements": self.agreements,
            "disagreements": self.disagreements,
        }


def draw_samples(n: int, seed: int) -> List[Sample]:
    """Draw ``n`` generator samples from the sampling box with a seeded PCG64 stream."""
    if int(n) != n or n < 0:
        raise InvalidArgument(f"number of samples must be a non-negative integer, got {n!r}")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(int(n)):
        a = rng.uniform(*A_RANGE)
        # uniform() draws from [low, high); reflect to get the half-open (0.1, 5].
        a = A_RANGE[0] + A_RANGE[1] - a
        b, c, d = rng.uniform(*BCD_RANGE, size=3)
        T = T_RANGE[0] + T_RANGE[1] - rng.uniform(*T_RANGE)
        out.append(Sample(float(a), float(b), float(c), float(d), float(T)))
    return out


def in_guard_band(s: Sample, guard: float) -> bool:
    """True if ``s`` lies within ``guard`` of a discontinuity of the closed form.

    The discontinuities are ``d = 0``, ``c d + b^2 = 0`` (relative to
    ``max(1, b^2, |c d|)``) and, for ``d < 0``, ``sqrt(-a d) T`` in ``2 pi Z``.
    """
    if guard <= 0:
        return False
    if abs(s.d) < guard:
        return True
    if abs(s.c * s.d + s.b * s.b) < guard * max(1.0, s.b * s.b, abs(s.c * s.d)):
        return True
    if s.d < 0:
        x = math.sqrt(-s.a * s.d) * s.T
        if abs(x - 2 * math.pi * round(x / (2 * math.pi))) < guard:
            return True
    return False


def evaluate_sample(s: Sample) -> Outcome:
    """Closed-form index and crossing-count index of ``exp(A t)`` on ``[0, T]``."""
    cf, _ = closed_form_iota1(s.a, s.b, s.c, s.d, s.T)
    try:
        numeric = iota1(fundamental_solution(GeneratorMatrix(s.a, s.b, s.c, s.d), s.T)).iota1
    except (RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        return Outcome(s, cf, None, f"{type(exc).__name__}: {exc}")
    return Outcome(s, cf, int(numeric))


def default_jobs() -> int:
    return os.cpu_count() or 1


def parallel_map(func, items: Sequence, jobs: Optional[int] = None, chunksize: int = 16) -> list:
    """Map ``func`` over ``items`` in input order, on a process pool when ``jobs > 1``."""
    jobs = default_jobs() if jobs is None else int(jobs)
    if jobs < 1:
        raise InvalidArgument(f"jobs must be at least 1, got {jobs!r}")
    if jobs == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=chunksize))


def run_campaign(samples: int, seed: int, guard: float = 1e-6, jobs: Optional[int] = None) -> CampaignReport:
    """Compare closed form and numerical oracle on ``samples`` seeded draws.

    Examples
    --------
    >>> run_campaign(0, 1).passed
    True
    """
    if not (guard >= 0) or not math.isfinite(guard):
        raise InvalidArgument(f"guard must be a non-negative real, got {guard!r}")
    drawn = draw_samples(samples, seed)
    kept = [s for s in drawn if not in_guard_band(s, guard)]
    outcomes = parallel_map(evaluate_sample, kept, jobs)
    bad = []
    for o in outcomes:
        if not o.agrees:
            entry = asdict(o.sample)
            entry.update(closed_form=o.closed_form, numeric=o.numeric, error=o.error)
            bad.append(entry)
    return CampaignReport(int(seed), float(guard), len(drawn), len(kept),
                          sum(o.agrees for o in outcomes), bad)
