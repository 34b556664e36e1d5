"""Numerical choice of the time-switching factor and power-splitting factor.

There is no closed-form optimum, so the outage probability (quadrature path)
is minimised over the parameter interval by grid search, or optionally by a
golden-section refinement of a coarse grid bracket. The closed form is
re-evaluated at the returned optimum as a guard against drift between the
two analytic paths.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import analytics
from .analytics import DEFAULT_SERIES, SeriesPolicy
from .network import GeometryError, SystemConfig, Topology, mean_channel_gains, place_relay_on_height
from .protocols import PsParams, TsParams
from .results import Method
from .specfun import DEFAULT_QUADRATURE, QuadratureSpec

log = logging.getLogger(__name__)

PARAM_LO = 0.001
PARAM_HI = 0.999
DEFAULT_RESOLUTION = 256
GOLDEN_TOL = 1e-4
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_GOLDEN_BRACKET_POINTS = 33
_DRIFT_TOL = 1e-5


class Optimum(NamedTuple):
    param: float
    outage: float


def _ts(x):
    return TsParams(x)


def _ps(x):
    return PsParams.equal(x)


_BUILDERS = {"ts": _ts, "ps": _ps}


def _objective(cfg, gains, protocol, spec) -> Callable[[float], float]:
    build = _BUILDERS[protocol]

    def f(x):
        return analytics.system_outage(cfg, gains, build(x), Method.QUADRATURE, spec=spec).p

    return f


def grid_minimize(f, lo: float, hi: float, resolution: int):
    """Evaluate ``f`` on an even grid; ties go to the smallest parameter."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    xs = np.linspace(lo, hi, resolution)
    values = np.array([f(x) for x in xs])
    i = int(np.argmin(values))
    return float(xs[i]), float(values[i]), list(zip(xs.tolist(), values.tolist()))


def golden_minimize(f, lo: float, hi: float, tol: float = GOLDEN_TOL, bracket_points: int = _GOLDEN_BRACKET_POINTS):
    """Golden-section search inside the best cell of a coarse grid.

    The coarse grid protects against the objective not being unimodal over
    the whole interval. Returns the best point actually evaluated.
    """
    _, _, samples = grid_minimize(f, lo, hi, bracket_points)
    xs = [x for x, _ in samples]
    i = min(range(len(samples)), key=lambda j: (samples[j][1], samples[j][0]))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, len(xs) - 1)]
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    samples += [(x1, f1), (x2, f2)]
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
            samples.append((x1, f1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
            samples.append((x2, f2))
    best = min(samples, key=lambda s: (s[1], s[0]))
    return best[0], best[1], samples


def _optimize(cfg, gains, protocol, method, resolution, spec, policy) -> Optimum:
    f = _objective(cfg, gains, protocol, spec)
    if method == "grid":
        x, p, _ = grid_minimize(f, PARAM_LO, PARAM_HI, resolution)
    elif method == "golden":
        x, p, _ = golden_minimize(f, PARAM_LO, PARAM_HI, tol=resolution if resolution < 1 else GOLDEN_TOL)
    else:
        raise ValueError(f"method must be 'grid' or 'golden', got {method!r}")
    params = _BUILDERS[protocol](x)
    try:
        check = analytics.system_outage(cfg, gains, params, Method.CLOSED_FORM, policy=policy, spec=spec).p
    except ArithmeticError as exc:
        log.warning("closed-form check failed at %s=%.6g: %s", protocol, x, exc)
    else:
        if abs(check - p) > _DRIFT_TOL * max(p, 1e-300):
            log.warning("closed form %.12g disagrees with quadrature %.12g at %s=%.6g", check, p, protocol, x)
    return Optimum(x, p)


def optimize_ts(
    cfg: SystemConfig,
    gains,
    method: str = "grid",
    resolution: float = DEFAULT_RESOLUTION,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    policy: SeriesPolicy = DEFAULT_SERIES,
) -> Optimum:
    """Best time-switching factor on ``[0.001, 0.999]``.

    ``resolution`` is the number of grid points for ``method='grid'``; for
    ``method='golden'`` a value below 1 is taken as the search tolerance.
    """
    return _optimize(cfg, gains, "ts", method, resolution, spec, policy)


def optimize_ps(
    cfg: SystemConfig,
    gains,
    method: str = "grid",
    resolution: float = DEFAULT_RESOLUTION,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    policy: SeriesPolicy = DEFAULT_SERIES,
) -> Optimum:
    """Best common power-splitting factor ``alpha1 = alpha2`` on ``[0.001, 0.999]``."""
    return _optimize(cfg, gains, "ps", method, resolution, spec, policy)


@dataclass
class SweepResult:
    """Optimal outage and optimisers per axis value; failed cells hold ``None``."""

    axis_name: str
    axis_values: list = field(default_factory=list)
    outage_ts_opt: list = field(default_factory=list)
    outage_ps_opt: list = field(default_factory=list)
    outage_baseline: list = field(default_factory=list)
    rho_opt: list = field(default_factory=list)
    alpha_opt: list = field(default_factory=list)

    def rows(self):
        return list(zip(self.axis_values, self.outage_ts_opt, self.outage_ps_opt,
                        self.outage_baseline, self.rho_opt, self.alpha_opt))

    def _append(self, axis_value, ts: Optional[Optimum], ps: Optional[Optimum], baseline: Optional[float]):
        self.axis_values.append(axis_value)
        self.outage_ts_opt.append(ts.outage if ts else None)
        self.outage_ps_opt.append(ps.outage if ps else None)
        self.outage_baseline.append(baseline)
        self.rho_opt.append(ts.param if ts else None)
        self.alpha_opt.append(ps.param if ps else None)


def _cell(cfg, topology, method, resolution, spec, policy):
    gains = mean_channel_gains(topology, cfg.m)
    ts = optimize_ts(cfg, gains, method, resolution, spec, policy)
    ps = optimize_ps(cfg, gains, method, resolution, spec, policy)
    baseline = analytics.outage_noncooperative(cfg.p1, gains.omega_s1, cfg.rt).p
    return ts, ps, baseline


def sweep_power(
    cfg_template: SystemConfig,
    topology: Topology,
    ps_grid_db,
    method: str = "grid",
    resolution: float = DEFAULT_RESOLUTION,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    policy: SeriesPolicy = DEFAULT_SERIES,
) -> SweepResult:
    """Optimal outage against the common source power ``P1 = P2 = 10^(dB/10)``."""
    result = SweepResult("ps_db")
    for db in ps_grid_db:
        ps = 10.0 ** (db / 10.0)
        cfg = replace(cfg_template, p1=ps, p2=ps)
        result._append(float(db), *_cell(cfg, topology, method, resolution, spec, policy))
    return result


def sweep_distance(
    cfg: SystemConfig,
    d_sr_grid,
    d_s1: float = 1.0,
    d_12: float = 1.0,
    method: str = "grid",
    resolution: float = DEFAULT_RESOLUTION,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    policy: SeriesPolicy = DEFAULT_SERIES,
) -> SweepResult:
    """Optimal outage against the source-relay distance along the altitude.

    A point whose geometry is invalid is kept as a row of ``None`` values.
    """
    result = SweepResult("d_sr")
    for d_sr in d_sr_grid:
        try:
            topology = place_relay_on_height(d_sr, d_s1, d_s1, d_12)
        except GeometryError as exc:
            log.warning("skipping d_sr=%g: %s", d_sr, exc)
            result._append(float(d_sr), None, None, None)
            continue
        result._append(float(d_sr), *_cell(cfg, topology, method, resolution, spec, policy))
    return result
