"""Analytic outage probability of the relayed link.

The relayed SNR ``Z = a X Y / (b X + c)`` has the CDF

    F_Z(z) = 1 - exp(-b z / (a W_sr)) * u K1(u),   u = sqrt(4 c z / (a W_sr W_r1))

and the direct SNR ``gamma0`` is exponential with mean ``P1 W_s1``. The
outage probability ``Pr[gamma0 + Z < R0]`` is evaluated two ways:

* ``outage_quadrature`` integrates ``F_Z(R0 - t)`` against the density of
  ``gamma0``; this is the reference value.
* ``outage_closed_form`` expands ``u K1(u)`` in its ascending series and
  integrates term by term. Writing ``lam = 1/(P1 W_s1)``,
  ``beta = b/(a W_sr)``, ``delta = lam - beta`` and ``kappa = c/(a W_sr W_r1)``::

      P = 1 - e^{-lam R0}
          + lam/delta * (e^{-lam R0} - e^{-beta R0})
          - lam e^{-lam R0} sum_{l>=0} kappa^(l+1)/(l!(l+1)!)
                * [(ln kappa + 2C - H_l - H_{l+1}) J_l + G_l]

  with ``J_l = int_0^R0 e^{delta s} s^(l+1) ds`` (an incomplete gamma
  function) and ``G_l`` the same integral with an extra ``ln s`` factor.
  ``H_l`` is the l-th harmonic number (``H_0 = 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .network import ChannelGains, SystemConfig
from .protocols import OutageCoefficients, ProtocolParams, coefficients
from .results import Method, OutageEstimate
from .specfun import DEFAULT_QUADRATURE, EULER_GAMMA, QuadratureSpec

DEGENERATE_DECAY = 1e-9
# exp(-60) ~ 1e-26: density mass of gamma0 beyond this many means is dropped
_EXP_TAIL_MEANS = 60.0


class SeriesConvergenceError(ArithmeticError):
    """The closed-form series did not reach tolerance within ``max_terms``."""

    def __init__(self, message: str, partial_sum: float, tail_bound: float):
        super().__init__(f"{message} (partial_sum={partial_sum!r}, tail_bound={tail_bound!r})")
        self.partial_sum = partial_sum
        self.tail_bound = tail_bound


@dataclass(frozen=True)
class SeriesPolicy:
    max_terms: int = 60
    term_rel_tol: float = 1e-12

    def __post_init__(self):
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError("max_terms must be a positive integer")
        if not self.term_rel_tol > 0:
            raise ValueError("term_rel_tol must be > 0")


DEFAULT_SERIES = SeriesPolicy()


def _require_harvesting(coeffs: OutageCoefficients):
    if not coeffs.a > 0:
        raise specfun.DomainError("F_Z needs a > 0; with a = 0 the relayed SNR is identically zero")


def cdf_z(z, coeffs: OutageCoefficients, omega_sr: float, omega_r1: float):
    """CDF of the relayed-path SNR at ``z >= 0`` (scalar or array)."""
    _require_harvesting(coeffs)
    z = np.asarray(z, dtype=float)
    if np.any(~(z >= 0)):
        raise ValueError("z must be >= 0")
    beta = coeffs.b / (coeffs.a * omega_sr)
    kappa = coeffs.c / (coeffs.a * omega_sr * omega_r1)
    u = 2.0 * np.sqrt(kappa * z)
    with np.errstate(over="ignore", under="ignore"):
        decay = np.exp(-beta * z)
        out = -np.expm1(-beta * z) + decay * specfun.one_minus_xk1(u)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _no_relay_outage(r0: float, lam: float) -> float:
    if math.isinf(r0):
        return 1.0
    return -math.expm1(-lam * r0)


def _direct_rate(p1: float, omega_s1: float) -> float:
    mean = p1 * omega_s1
    if not mean > 0:
        raise ValueError("need p1 * omega_s1 > 0")
    return 1.0 / mean


def outage_quadrature(
    coeffs: OutageCoefficients,
    omega_sr: float,
    omega_r1: float,
    omega_s1: float,
    p1: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> OutageEstimate:
    """Outage probability by direct quadrature of ``F_Z`` against the direct-link density."""
    lam = _direct_rate(p1, omega_s1)
    r0 = coeffs.r0
    if coeffs.a == 0 or math.isinf(r0):
        return OutageEstimate(p=_no_relay_outage(r0, lam), method=Method.QUADRATURE)
    beta = coeffs.b / (coeffs.a * omega_sr)
    kappa = coeffs.c / (coeffs.a * omega_sr * omega_r1)

    # integrate over v = z - lo, z = R0 - t the relayed SNR; offsets keep the
    # weight exp(-lam t) exact when R0 is huge
    width = min(r0, _EXP_TAIL_MEANS / lam)
    lo = r0 - width if width < r0 else 0.0

    def integrand(v):
        z = lo + v
        u = 2.0 * np.sqrt(kappa * z)
        with np.errstate(over="ignore", under="ignore"):
            f = -np.expm1(-beta * z) + np.exp(-beta * z) * specfun.one_minus_xk1(u)
            return lam * np.exp(-lam * (width - v)) * f

    p = specfun.quad_log_endpoint(integrand, 0.0, width, spec)
    return OutageEstimate(p=_clip_probability(p), method=Method.QUADRATURE)


def _clip_probability(p: float, slack: float = 1e-9) -> float:
    if not (-slack <= p <= 1.0 + slack):
        raise ArithmeticError(f"outage evaluation left [0, 1]: {p!r}")
    return min(max(p, 0.0), 1.0)


@dataclass
class ClosedFormBreakdown:
    """Pieces of the closed-form outage sum.

    ``direct`` is ``1 - exp(-lam R0)``, ``exponential`` the ``lam/delta``
    correction, ``terms[l]`` the l-th series term, and ``tail_bound`` a bound
    on the discarded terms at the point the series was cut.
    """

    direct: float
    exponential: float
    terms: list = field(default_factory=list)
    tail_bound: float = 0.0
    degenerate_decay: bool = False

    @property
    def total(self) -> float:
        return math.fsum([self.direct, self.exponential, *self.terms])


def closed_form_breakdown(
    coeffs: OutageCoefficients,
    omega_sr: float,
    omega_r1: float,
    omega_s1: float,
    p1: float,
    policy: SeriesPolicy = DEFAULT_SERIES,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> ClosedFormBreakdown:
    lam = _direct_rate(p1, omega_s1)
    r0 = coeffs.r0
    if coeffs.a == 0 or math.isinf(r0):
        return ClosedFormBreakdown(direct=_no_relay_outage(r0, lam), exponential=0.0)

    a, b, c = coeffs.a, coeffs.b, coeffs.c
    beta = b / (a * omega_sr)
    kappa = c / (a * omega_sr * omega_r1)
    delta = lam - beta
    degenerate = abs(delta) < DEGENERATE_DECAY
    if degenerate:
        delta = 0.0
    y = delta * r0
    shift = max(y, 0.0)
    log_base = -lam * r0 + shift  # = -min(lam, beta) * R0
    log_r0 = math.log(r0)
    log_kappa = math.log(kappa)
    log_kr0 = log_kappa + log_r0

    out = ClosedFormBreakdown(
        direct=-math.expm1(-lam * r0),
        exponential=-lam * r0 * math.exp(log_base) * specfun.scaled_gamma_moment(1, y),
        degenerate_decay=degenerate,
    )
    # whole-series bound: with H_{l+1} <= l + 2 every term is at most
    # lam R0 e^{log_base} (|ln kappa| + |ln R0| + 2C + 3) (kappa R0)^(l+1)/(l!(l+1)!),
    # and that sum is sqrt(kappa R0) I1(2 sqrt(kappa R0)) <= sqrt(kappa R0) e^{2 sqrt(kappa R0)}
    root = math.sqrt(kappa * r0)
    log_global = (
        math.log(lam) + log_r0 + log_base + math.log(root) + 2.0 * root
        + math.log(abs(log_kappa) + abs(log_r0) + 2.0 * EULER_GAMMA + 3.0)
    )
    h_l, h_next = 0.0, 1.0
    for l in range(policy.max_terms):
        log_mag = (l + 1) * log_kr0 + log_r0 - math.lgamma(l + 1) - math.lgamma(l + 2) + log_base
        bracket_const = log_kappa + 2.0 * EULER_GAMMA - h_l - h_next
        # |J-part| <= 1/(l+2), |G-part| <= (|ln R0| + 1/(l+2))/(l+2) after scaling
        bound = lam * math.exp(log_mag) * (abs(bracket_const) + abs(log_r0) + 1.0) / (l + 2)
        ratio = 1.5 * math.exp(log_kr0) / ((l + 1) * (l + 2))
        running = abs(out.total)
        tail = bound / (1.0 - ratio) if ratio < 1.0 else math.inf
        tail = min(tail, math.exp(min(log_global, 700.0)))
        if tail <= policy.term_rel_tol * running:
            out.tail_bound = tail
            return out
        moment = specfun.scaled_gamma_moment(l + 2, y)
        log_part = specfun.h_l_integral(l, -delta, r0, spec, scale_exponent=(l + 2) * log_r0 + shift)
        out.terms.append(-lam * math.exp(log_mag) * (bracket_const * moment + log_part))
        h_l = h_next
        h_next += 1.0 / (l + 2)
    raise SeriesConvergenceError(
        f"closed-form series not converged after {policy.max_terms} terms",
        out.total,
        tail,
    )


def outage_closed_form(
    coeffs: OutageCoefficients,
    omega_sr: float,
    omega_r1: float,
    omega_s1: float,
    p1: float,
    policy: SeriesPolicy = DEFAULT_SERIES,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> OutageEstimate:
    """Outage probability from the term-by-term integrated Bessel series.

    Raises
    ------
    SeriesConvergenceError
        If the series tail is still above ``policy.term_rel_tol`` after
        ``policy.max_terms`` terms.
    """
    parts = closed_form_breakdown(coeffs, omega_sr, omega_r1, omega_s1, p1, policy, spec)
    return OutageEstimate(p=_clip_probability(parts.total), method=Method.CLOSED_FORM)


def outage_noncooperative(p1: float, omega_s1: float, rt: float) -> OutageEstimate:
    """Direct transmission only, two equal slots: ``I = log2(1 + P1 |h_s1|^2) / 2``."""
    lam = _direct_rate(p1, omega_s1)
    threshold = math.expm1(2.0 * rt * math.log(2.0))
    return OutageEstimate(p=-math.expm1(-lam * threshold), method=Method.CLOSED_FORM)


def system_outage(
    cfg: SystemConfig,
    gains: ChannelGains,
    params: ProtocolParams,
    method: Method | str = Method.QUADRATURE,
    policy: SeriesPolicy = DEFAULT_SERIES,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> OutageEstimate:
    """Outage of user 1 for a configured protocol, by quadrature or closed form."""
    method = Method(method)
    coeffs = coefficients(cfg, params)
    args = (coeffs, gains.omega_sr, gains.omega_r1, gains.omega_s1, cfg.p1)
    if method is Method.QUADRATURE:
        return outage_quadrature(*args, spec=spec)
    if method is Method.CLOSED_FORM:
        return outage_closed_form(*args, policy=policy, spec=spec)
    raise ValueError(f"system_outage handles analytic methods only, got {method.value}")
