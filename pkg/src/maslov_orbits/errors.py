"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class InvalidArgument(ValueError):
    """Raised when an argument has the wrong shape, sign or is not finite."""


class DomainError(ValueError):
    """Raised when a model point violates one of its admissibility constraints.

    Parameters
    ----------
    constraint : str
        Human-readable name of the violated constraint, e.g. ``"xi > 1"``.
    message : str, optional
        Extra detail appended to the message.
    """

    def __init__(self, constraint: str, message: str = ""):
        self.constraint = constraint
        text = f"constraint violated: {constraint}"
        if message:
            text += f" ({message})"
        super().__init__(text)


class DegenerateCrossingError(RuntimeError):
    """Raised when crossings cannot be resolved into isolated regular events.

    Parameters
    ----------
    interval : tuple of float
        Time interval in which the unresolved cluster was observed.
    """

    def __init__(self, interval, message: str = "unresolvable crossing cluster"):
        self.interval = tuple(float(x) for x in interval)
        super().__init__(f"{message} in [{self.interval[0]:.6g}, {self.interval[1]:.6g}]")


class EpsilonExhaustedError(RuntimeError):
    """Raised when the perturbation schedule never stabilises the index."""


class EscapedDomainError(RuntimeError):
    """Raised when an integrated trajectory leaves the admissible domain.

    The partial trajectory and the last state inside the domain are kept
    so callers can inspect what happened.
    """

    def __init__(self, message: str, last_state=None, trajectory=None):
        self.last_state = last_state
        self.trajectory = trajectory
        super().__init__(message)
