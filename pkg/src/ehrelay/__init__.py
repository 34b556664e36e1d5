"""Outage analysis of a two-user network helped by an energy-harvesting AF relay.

The relay harvests energy from the source either by time switching (TS) or
power splitting (PS) and forwards a weighted combination of both users'
messages. Outage probability is available in closed form, by quadrature
and by Monte Carlo, and the protocol parameters can be optimised numerically.
"""

from .analytics import (
    SeriesConvergenceError,
    SeriesPolicy,
    cdf_z,
    outage_closed_form,
    outage_noncooperative,
    outage_quadrature,
    system_outage,
)
from .montecarlo import McRunSpec, estimate_outage
from .network import (
    ChannelGains,
    GeometryError,
    SystemConfig,
    Topology,
    UnsupportedGeometryError,
    mean_channel_gains,
    place_relay_on_height,
)
from .optimizer import SweepResult, optimize_ps, optimize_ts, sweep_distance, sweep_power
from .protocols import OutageCoefficients, PsParams, TsParams, coefficients
from .results import Method, OutageEstimate
from .specfun import DomainError, QuadratureError, QuadratureSpec, bessel_k1, lower_incomplete_gamma

__version__ = "0.1.0"

__all__ = [
    "ChannelGains", "DomainError", "GeometryError", "McRunSpec", "Method", "OutageCoefficients",
    "OutageEstimate", "PsParams", "QuadratureError", "QuadratureSpec", "SeriesConvergenceError",
    "SeriesPolicy", "SweepResult", "SystemConfig", "Topology", "TsParams", "UnsupportedGeometryError",
    "bessel_k1", "cdf_z", "coefficients", "estimate_outage", "lower_incomplete_gamma",
    "mean_channel_gains", "optimize_ps", "optimize_ts", "outage_closed_form", "outage_noncooperative",
    "outage_quadrature", "place_relay_on_height", "sweep_distance", "sweep_power", "system_outage",
]
