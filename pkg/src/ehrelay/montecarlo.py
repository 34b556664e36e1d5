"""Monte Carlo outage estimation over Rayleigh fading.

Channel power gains ``|h|^2`` of ``CN(0, W)`` links are exponential with mean
``W`` and are drawn by inverse transform, ``-W ln U``. Samples are produced in
fixed-size chunks; chunk ``k`` always comes from its own Philox stream keyed
by ``(seed, k)``, so results depend only on ``(seed, n_samples)`` and not on
how many worker streams share the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analytics
from .network import ChannelGains, SystemConfig
from .protocols import (
    OutageCoefficients,
    ProtocolParams,
    instantaneous_relay_snr,
    relay_snr_exact_combining,
)
from .results import Method, OutageEstimate  # noqa: F401  (re-exported)
from .specfun import DomainError

CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class McRunSpec:
    n_samples: int = 1_000_000
    seed: int = 20150101
    n_streams: int = 1

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValueError("n_samples must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if int(self.n_streams) != self.n_streams or self.n_streams < 1:
            raise ValueError("n_streams must be a positive integer")


def _chunks(n_samples: int):
    return [(k, min(CHUNK_SIZE, n_samples - start)) for k, start in enumerate(range(0, n_samples, CHUNK_SIZE))]


def _chunk_powers(gains: ChannelGains, seed: int, index: int, size: int):
    """Draws for one chunk: rows are ``|h_sr|^2, |h_r1|^2, |h_s1|^2``."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))
    u = rng.random((3, size))
    means = np.array([gains.omega_sr, gains.omega_r1, gains.omega_s1])[:, None]
    # 1 - u lies in (0, 1], so the log is finite
    return -means * np.log1p(-u)


def _map_chunks(func, run: McRunSpec):
    """Apply ``func(index, size)`` to every chunk, fanning out over ``run.n_streams``."""
    chunks = _chunks(run.n_samples)
    if run.n_streams == 1:
        return [func(k, size) for k, size in chunks]
    groups = [chunks[s::run.n_streams] for s in range(run.n_streams)]
    with ThreadPoolExecutor(max_workers=run.n_streams) as pool:
        partial = list(pool.map(lambda group: [(k, func(k, size)) for k, size in group], groups))
    return [value for _, value in sorted(pair for group in partial for pair in group)]


def sample_channel_powers(gains: ChannelGains, run: McRunSpec):
    """All draws as three arrays ``(x_sr, x_r1, x_s1)`` of length ``n_samples``."""
    blocks = _map_chunks(lambda k, size: _chunk_powers(gains, run.seed, k, size), run)
    x = np.concatenate(blocks, axis=1)
    return x[0], x[1], x[2]


def estimate_outage(
    cfg: SystemConfig,
    gains: ChannelGains,
    coeffs: OutageCoefficients,
    run: McRunSpec = McRunSpec(),
) -> OutageEstimate:
    """Fraction of fading draws with ``gamma0 + gamma1 < R0``."""

    def count(k, size):
        x_sr, x_r1, x_s1 = _chunk_powers(gains, run.seed, k, size)
        total = cfg.p1 * x_s1 + instantaneous_relay_snr(coeffs, x_sr, x_r1)
        return int(np.count_nonzero(total < coeffs.r0))

    hits = sum(_map_chunks(count, run))
    return OutageEstimate.from_counts(hits, run.n_samples)


def estimate_outage_exact_combining(
    cfg: SystemConfig,
    gains: ChannelGains,
    params: ProtocolParams,
    coeffs: OutageCoefficients,
    run: McRunSpec = McRunSpec(),
) -> OutageEstimate:
    """Same draws as ``estimate_outage`` but with noise-aware combining weights."""

    def count(k, size):
        x_sr, x_r1, x_s1 = _chunk_powers(gains, run.seed, k, size)
        total = cfg.p1 * x_s1 + relay_snr_exact_combining(cfg, params, x_sr, x_r1)
        return int(np.count_nonzero(total < coeffs.r0))

    hits = sum(_map_chunks(count, run))
    return OutageEstimate.from_counts(hits, run.n_samples)


def sample_relay_snr(coeffs: OutageCoefficients, gains: ChannelGains, run: McRunSpec) -> np.ndarray:
    x_sr, x_r1, _ = sample_channel_powers(gains, run)
    return instantaneous_relay_snr(coeffs, x_sr, x_r1)


def empirical_cdf_check(
    coeffs: OutageCoefficients,
    gains: ChannelGains,
    run: McRunSpec,
    z_grid,
) -> float:
    """Largest gap between the empirical CDF of ``Z`` and ``analytics.cdf_z`` on ``z_grid``."""
    if not coeffs.a > 0:
        raise DomainError("empirical_cdf_check needs a > 0")
    z_grid = np.asarray(z_grid, dtype=float)

    def count(k, size):
        x_sr, x_r1, _ = _chunk_powers(gains, run.seed, k, size)
        z = np.sort(instantaneous_relay_snr(coeffs, x_sr, x_r1))
        return np.searchsorted(z, z_grid, side="right")

    counts = np.sum(_map_chunks(count, run), axis=0)
    empirical = counts / run.n_samples
    analytic = analytics.cdf_z(z_grid, coeffs, gains.omega_sr, gains.omega_r1)
    return float(np.max(np.abs(empirical - analytic)))


def agrees(mc: OutageEstimate, reference: float, k: float = 4.0) -> bool:
    """Whether a Monte Carlo estimate lies within ``k`` standard errors of ``reference``.

    The plug-in standard error vanishes when every (or no) sample is an
    outage; in that case the spread expected under ``reference`` itself,
    ``sqrt(q (1 - q) / n)``, is used instead.
    """
    sigma = mc.stderr
    if sigma == 0.0:
        sigma = math.sqrt(reference * (1.0 - reference) / mc.n)
    return abs(mc.p - reference) <= k * sigma
