"""System configuration, node geometry and mean channel gains.

All noise variances are normalised to one, so source powers are SNRs in
linear units. The block duration is normalised to one as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class GeometryError(ValueError):
    """Node distances that do not form a valid placement."""


class UnsupportedGeometryError(GeometryError):
    """Placement outside the isosceles relay-on-altitude layout."""


@dataclass(frozen=True)
class SystemConfig:
    """Powers, efficiency, path loss, target rate and combining weight.

    ``p1``/``p2`` are the source powers used for the messages of user 1 and
    user 2. ``theta1`` is the relay combining weight of user 1; user 2 gets
    ``1 - theta1``.
    """

    p1: float = 1.0
    p2: float = 1.0
    eta: float = 1.0
    m: float = 4.0
    rt: float = 1.0
    theta1: float = 0.5

    def __post_init__(self):
        if not (self.p1 >= 0 and self.p2 >= 0):
            raise ValueError("source powers must satisfy p1 >= 0 and p2 >= 0")
        if self.p1 == 0 and self.p2 == 0:
            raise ValueError("p1 and p2 must not both be zero")
        if not 0 < self.eta <= 1:
            raise ValueError(f"0 < η ≤ 1 violated: eta={self.eta!r}")
        if not self.m >= 2:
            raise ValueError(f"m ≥ 2 violated: m={self.m!r}")
        if not self.rt > 0:
            raise ValueError(f"Rt > 0 violated: rt={self.rt!r}")
        if not 0 < self.theta1 < 1:
            raise ValueError(f"0 < θ1 < 1 violated: theta1={self.theta1!r}")

    @property
    def theta2(self) -> float:
        return 1.0 - self.theta1

    @classmethod
    def from_db(cls, ps_db: float, **kwargs) -> "SystemConfig":
        """Equal source powers ``P1 = P2 = 10^(ps_db/10)``."""
        ps = 10.0 ** (ps_db / 10.0)
        return cls(p1=ps, p2=ps, **kwargs)


@dataclass(frozen=True)
class Topology:
    d_s1: float
    d_s2: float
    d_12: float
    d_sr: float
    d_r1: float
    d_r2: float

    def __post_init__(self):
        for name in ("d_s1", "d_s2", "d_12", "d_sr", "d_r1", "d_r2"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise GeometryError(f"{name} must be a finite positive distance, got {value!r}")


@dataclass(frozen=True)
class ChannelGains:
    omega_sr: float
    omega_s1: float
    omega_s2: float
    omega_r1: float
    omega_r2: float

    def __post_init__(self):
        for name in ("omega_sr", "omega_s1", "omega_s2", "omega_r1", "omega_r2"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")


def altitude(d_s1: float, d_12: float) -> float:
    """Height of the isosceles triangle S-D1-D2 measured from S."""
    return math.sqrt(d_s1 * d_s1 - 0.25 * d_12 * d_12)


def place_relay_on_height(d_sr: float, d_s1: float = 1.0, d_s2: float = 1.0, d_12: float = 1.0) -> Topology:
    """Put the relay on the altitude from S, ``d_sr`` away from the source.

    Both destinations sit at equal distance from S, so the relay ends up
    equidistant from them.

    Raises
    ------
    UnsupportedGeometryError
        If ``d_s1 != d_s2``.
    GeometryError
        For a degenerate triangle or a relay outside ``(0, d_s1 + height)``.
    """
    if d_s1 != d_s2:
        raise UnsupportedGeometryError(
            f"relay placement needs d_s1 == d_s2, got {d_s1!r} and {d_s2!r}"
        )
    if not (d_s1 > 0 and d_12 > 0):
        raise GeometryError("distances must be positive")
    if d_12 >= 2.0 * d_s1:
        raise GeometryError(f"degenerate triangle: d_12={d_12!r} >= 2*d_s1={2.0 * d_s1!r}")
    h = altitude(d_s1, d_12)
    if not 0 < d_sr < d_s1 + h:
        raise GeometryError(f"d_sr={d_sr!r} outside (0, {d_s1 + h!r})")
    d_r = math.hypot(h - d_sr, 0.5 * d_12)
    return Topology(d_s1=d_s1, d_s2=d_s2, d_12=d_12, d_sr=d_sr, d_r1=d_r, d_r2=d_r)


def mean_channel_gains(topology: Topology, m: float) -> ChannelGains:
    """Mean-square channel gains ``d^(-m)`` for every link."""
    if not m >= 2:
        raise ValueError(f"m ≥ 2 violated: m={m!r}")
    return ChannelGains(
        omega_sr=topology.d_sr ** -m,
        omega_s1=topology.d_s1 ** -m,
        omega_s2=topology.d_s2 ** -m,
        omega_r1=topology.d_r1 ** -m,
        omega_r2=topology.d_r2 ** -m,
    )
