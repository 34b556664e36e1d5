"""Time-switching (TS) and power-splitting (PS) relaying models.

Both protocols reduce the relayed-path SNR to ``Z = a X Y / (b X + c)`` with
``X = |h_r1|^2`` and ``Y = |h_sr|^2``. The coefficient builders below produce
``a, b, c`` together with the SNR threshold ``R0`` equivalent to the target
rate, so the outage event is always ``gamma0 + Z < R0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .network import SystemConfig


@dataclass(frozen=True)
class TsParams:
    """Time-switching: fraction ``rho`` of the block is spent harvesting."""

    rho: float

    def __post_init__(self):
        if not 0 <= self.rho < 1:
            raise ValueError(f"0 ≤ ρ < 1 violated: rho={self.rho!r}")


@dataclass(frozen=True)
class PsParams:
    """Power-splitting: fraction ``alpha_i`` of the received power is harvested."""

    alpha1: float
    alpha2: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            value = getattr(self, name)
            if not 0 <= value < 1:
                raise ValueError(f"0 ≤ α < 1 violated: {name}={value!r}")

    @classmethod
    def equal(cls, alpha: float) -> "PsParams":
        return cls(alpha, alpha)


ProtocolParams = Union[TsParams, PsParams]


@dataclass(frozen=True)
class OutageCoefficients:
    a: float
    b: float
    c: float
    r0: float
    rate_prefactor: float

    def __post_init__(self):
        if not self.a >= 0:
            raise ValueError("a must be >= 0")
        if not self.b >= 0:
            raise ValueError("b must be >= 0")
        if not self.c > 0:
            raise ValueError("c must be > 0")
        if not self.r0 > 0:
            raise ValueError("r0 must be > 0")
        if not 0 < self.rate_prefactor < 1:
            raise ValueError("rate_prefactor must lie in (0, 1)")


def _snr_threshold(rt: float, prefactor: float) -> float:
    # 2^(Rt/prefactor) - 1, saturating to inf instead of raising
    exponent = rt / prefactor
    if exponent > 1023:
        return math.inf
    return math.expm1(exponent * math.log(2.0))


def _indexed(cfg: SystemConfig, user: int):
    if user == 1:
        return cfg.p1, cfg.p2, cfg.theta1, cfg.theta2
    if user == 2:
        return cfg.p2, cfg.p1, cfg.theta2, cfg.theta1
    raise ValueError(f"user must be 1 or 2, got {user!r}")


def ts_coefficients(cfg: SystemConfig, params: TsParams, user: int = 1) -> OutageCoefficients:
    """Coefficients of the TS protocol for ``user`` (indices swap for user 2)."""
    rho = params.rho
    p_own, p_other, th_own, th_other = _indexed(cfg, user)
    prefactor = 2.0 * (1.0 - rho) / 3.0
    a = 1.5 * rho / (1.0 - rho) * cfg.eta * (cfg.p1 + cfg.p2) * th_own
    b = a / p_other + a * th_own / (p_own * th_other) if a > 0 else 0.0
    return OutageCoefficients(a=a, b=b, c=1.0, r0=_snr_threshold(cfg.rt, prefactor), rate_prefactor=prefactor)


def ps_coefficients(cfg: SystemConfig, params: PsParams, user: int = 1) -> OutageCoefficients:
    """Coefficients of the PS protocol for ``user`` (indices swap for user 2)."""
    p_own, p_other, th_own, th_other = _indexed(cfg, user)
    al_own, al_other = (params.alpha1, params.alpha2) if user == 1 else (params.alpha2, params.alpha1)
    prefactor = 2.0 / 3.0
    a = cfg.eta * (params.alpha1 * cfg.p1 + params.alpha2 * cfg.p2) * th_own
    if a > 0:
        b = a / (p_other * (1.0 - al_other)) + a * th_own / (th_other * p_own * (1.0 - al_own))
    else:
        b = 0.0
    return OutageCoefficients(a=a, b=b, c=1.0, r0=_snr_threshold(cfg.rt, prefactor), rate_prefactor=prefactor)


def coefficients(cfg: SystemConfig, params: ProtocolParams, user: int = 1) -> OutageCoefficients:
    if isinstance(params, TsParams):
        return ts_coefficients(cfg, params, user)
    if isinstance(params, PsParams):
        return ps_coefficients(cfg, params, user)
    raise TypeError(f"unknown protocol parameters {params!r}")


def instantaneous_relay_snr(coeffs: OutageCoefficients, x_sr, x_r1):
    """Relayed SNR ``a x_sr x_r1 / (b x_r1 + c)``; zero when nothing is harvested."""
    x_sr = np.asarray(x_sr, dtype=float)
    x_r1 = np.asarray(x_r1, dtype=float)
    if coeffs.a == 0:
        out = np.zeros(np.broadcast(x_sr, x_r1).shape)
    else:
        out = coeffs.a * x_sr * x_r1 / (coeffs.b * x_r1 + coeffs.c)
    return float(out) if out.ndim == 0 else out


def mutual_information(coeffs: OutageCoefficients, gamma0, gamma1):
    """MRC mutual information in bit/s/Hz after the protocol's time penalty."""
    out = coeffs.rate_prefactor * np.log2(1.0 + np.asarray(gamma0, dtype=float) + np.asarray(gamma1, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def relay_transmit_power(cfg: SystemConfig, params: ProtocolParams, x_sr: float) -> float:
    """Relay power spent in the broadcast phase, given ``|h_sr|^2 = x_sr``."""
    if isinstance(params, TsParams):
        rho = params.rho
        return 3.0 * rho / (2.0 * (1.0 - rho)) * cfg.eta * (cfg.p1 + cfg.p2) * x_sr
    if isinstance(params, PsParams):
        return cfg.eta * (params.alpha1 * cfg.p1 + params.alpha2 * cfg.p2) * x_sr
    raise TypeError(f"unknown protocol parameters {params!r}")


def combining_weight(theta_i: float, p_i: float, x_sr: float, exact: bool = True) -> float:
    """Relay combining weight for message ``i``.

    The exact weight normalises the received power including noise; the
    approximate one drops the noise term, as the outage formulas assume.
    """
    if not 0 < theta_i < 1:
        raise ValueError("theta_i must lie in (0, 1)")
    if not p_i > 0:
        raise ValueError("p_i must be > 0")
    if exact:
        return math.sqrt(theta_i / (p_i * x_sr + 1.0))
    if not x_sr > 0:
        raise ValueError("approximate combining weight needs x_sr > 0")
    return math.sqrt(theta_i / (p_i * x_sr))


def relay_snr_exact_combining(cfg: SystemConfig, params: ProtocolParams, x_sr, x_r1):
    """Relayed SNR of user 1 with the exact (noise-aware) combining weights.

    Diagnostic only: the outage formulas are stated for the approximate
    weights, and this lets the approximation error be measured.
    """
    x_sr = np.asarray(x_sr, dtype=float)
    x_r1 = np.asarray(x_r1, dtype=float)
    if isinstance(params, TsParams):
        info1, info2 = cfg.p1, cfg.p2
    elif isinstance(params, PsParams):
        info1, info2 = (1.0 - params.alpha1) * cfg.p1, (1.0 - params.alpha2) * cfg.p2
    else:
        raise TypeError(f"unknown protocol parameters {params!r}")
    relay_power = relay_transmit_power(cfg, params, x_sr)
    xi1_sq = cfg.theta1 / (info1 * x_sr + 1.0)
    xi2_sq = cfg.theta2 / (info2 * x_sr + 1.0)
    signal = relay_power * x_r1 * xi1_sq * info1 * x_sr
    noise = relay_power * x_r1 * (xi1_sq + xi2_sq) + 1.0
    out = signal / noise
    return float(out) if np.ndim(out) == 0 else out
