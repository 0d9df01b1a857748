"""
Exceptions raised by the numerical core.

Domain, validation and capacity problems are plain ``ValueError``s; the two
classes here mark failures of the kernels themselves.
"""
from typing import Optional


class SingularSystemError(RuntimeError):
    """A dense solve met a zero pivot (coalesced nodes)."""


class NoConvergenceError(RuntimeError):
    """Adaptive integration ran out of budget before reaching its tolerance."""

    def __init__(self, message: str, estimate: float, abserr: Optional[float] = None):
        super().__init__(f"{message} (best estimate {estimate!r}, abserr {abserr!r})")
        self.estimate = estimate
        self.abserr = abserr
