"""Outage estimates shared by the analytic and simulation paths."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class OutageEstimate:
    """Outage probability with provenance.

    ``stderr`` is the binomial standard error for Monte Carlo estimates and
    zero for analytic ones; ``n`` is the sample count (0 for analytic).
    """

    p: float
    method: Method
    stderr: float = 0.0
    n: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"outage probability {self.p!r} outside [0, 1]")
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")

    @classmethod
    def from_counts(cls, hits: int, n: int) -> "OutageEstimate":
        p = hits / n
        return cls(p=p, method=Method.MONTE_CARLO, stderr=math.sqrt(p * (1.0 - p) / n), n=n)

    def __float__(self):
        return self.p
