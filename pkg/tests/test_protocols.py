import math
from dataclasses import astuple

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ehrelay.network import SystemConfig
from ehrelay.protocols import (
    OutageCoefficients,
    PsParams,
    TsParams,
    coefficients,
    combining_weight,
    instantaneous_relay_snr,
    mutual_information,
    ps_coefficients,
    relay_snr_exact_combining,
    relay_transmit_power,
    ts_coefficients,
)

R0_TWO_THIRDS = 2 ** 1.5 - 1


def relay_snr_from_weights(cfg, params, x_sr, x_r1):
    """End-to-end relayed SNR rebuilt from the relay power and approximate weights."""
    if isinstance(params, TsParams):
        info1, info2 = cfg.p1, cfg.p2
    else:
        info1, info2 = (1 - params.alpha1) * cfg.p1, (1 - params.alpha2) * cfg.p2
    pr = relay_transmit_power(cfg, params, x_sr)
    xi1 = cfg.theta1 / (info1 * x_sr)
    xi2 = cfg.theta2 / (info2 * x_sr)
    return pr * x_r1 * xi1 * info1 * x_sr / (pr * x_r1 * (xi1 + xi2) + 1)


class TestTsCoefficients:
    def test_default(self):
        c = ts_coefficients(SystemConfig(), TsParams(0.5))
        assert (c.a, c.b, c.c) == pytest.approx((1.5, 3.0, 1.0))
        assert c.r0 == pytest.approx(7.0)
        assert c.rate_prefactor == pytest.approx(1 / 3)

    def test_no_harvesting(self):
        c = ts_coefficients(SystemConfig(), TsParams(0.0))
        assert c.a == 0 and c.b == 0
        assert c.r0 == pytest.approx(R0_TWO_THIRDS)

    def test_high_power(self):
        c = ts_coefficients(SystemConfig(p1=10, p2=10), TsParams(0.25))
        assert (c.a, c.b, c.r0) == pytest.approx((5.0, 1.0, 3.0))

    def test_rho_domain(self):
        with pytest.raises(ValueError):
            TsParams(1.0)
        with pytest.raises(ValueError):
            TsParams(-0.1)

    def test_threshold_saturates(self):
        c = ts_coefficients(SystemConfig(rt=5.0), TsParams(0.995))
        assert math.isinf(c.r0)

    @given(st.floats(0.01, 0.98), st.floats(1e-3, 0.01))
    def test_increasing_in_rho(self, rho, step):
        cfg = SystemConfig()
        lo, hi = ts_coefficients(cfg, TsParams(rho)), ts_coefficients(cfg, TsParams(min(rho + step, 0.999)))
        assert hi.a > lo.a
        assert hi.r0 > lo.r0


class TestPsCoefficients:
    def test_default(self):
        c = ps_coefficients(SystemConfig(), PsParams.equal(0.5))
        assert (c.a, c.b, c.c) == pytest.approx((0.5, 2.0, 1.0))
        assert c.r0 == pytest.approx(R0_TWO_THIRDS)

    def test_no_harvesting(self):
        assert ps_coefficients(SystemConfig(), PsParams.equal(0.0)).a == 0

    def test_high_power(self):
        c = ps_coefficients(SystemConfig(p1=10, p2=10), PsParams.equal(0.3))
        assert c.a == pytest.approx(3.0)
        assert c.b == pytest.approx(6.0 / 7.0)

    @given(st.floats(0.01, 0.9))
    def test_linear_in_alpha(self, alpha):
        cfg = SystemConfig(p1=3.0, p2=3.0)
        a1 = ps_coefficients(cfg, PsParams.equal(alpha)).a
        a2 = ps_coefficients(cfg, PsParams.equal(alpha / 2)).a
        assert a1 == pytest.approx(2 * a2, rel=1e-14)

    def test_b_diverges(self):
        bs = [ps_coefficients(SystemConfig(), PsParams.equal(1 - 10.0 ** -k)).b for k in range(1, 7)]
        assert all(np.diff(bs) > 0)
        assert bs[-1] > 1e5

    def test_alpha_domain(self):
        with pytest.raises(ValueError):
            PsParams(0.5, 1.0)


class TestCoefficientsVsRelayModel:
    """The (a, b, c) form should reproduce the relay SNR built from relay power and weights."""

    @pytest.mark.parametrize("params", [TsParams(0.3), TsParams(0.7), PsParams.equal(0.4), PsParams(0.2, 0.6)])
    @pytest.mark.parametrize("powers", [(1.0, 1.0), (2.0, 7.0), (30.0, 0.5)])
    def test_matches_at_equal_weights(self, params, powers):
        cfg = SystemConfig(p1=powers[0], p2=powers[1])
        coeffs = coefficients(cfg, params)
        x_sr = np.array([0.2, 1.0, 4.0])
        x_r1 = np.array([3.0, 0.5, 1.7])
        assert np.allclose(instantaneous_relay_snr(coeffs, x_sr, x_r1),
                           relay_snr_from_weights(cfg, params, x_sr, x_r1), rtol=1e-13)


class TestSymmetry:
    @pytest.mark.parametrize("params", [TsParams(0.4), PsParams.equal(0.35)])
    def test_users_identical_when_symmetric(self, params):
        cfg = SystemConfig(p1=5.0, p2=5.0)
        assert coefficients(cfg, params, user=1) == coefficients(cfg, params, user=2)

    def test_unequal_powers_swap(self):
        cfg = SystemConfig(p1=2.0, p2=8.0, theta1=0.3)
        swapped = SystemConfig(p1=8.0, p2=2.0, theta1=0.7)
        for params, swap in [(TsParams(0.4), TsParams(0.4)), (PsParams(0.2, 0.6), PsParams(0.6, 0.2))]:
            u2, u1 = coefficients(cfg, params, user=2), coefficients(swapped, swap, user=1)
            assert astuple(u2) == pytest.approx(astuple(u1), rel=1e-14)

    def test_bad_user(self):
        with pytest.raises(ValueError):
            coefficients(SystemConfig(), TsParams(0.5), user=3)


class TestRelaySnr:
    def test_zero_harvest(self):
        c = ts_coefficients(SystemConfig(), TsParams(0.0))
        assert instantaneous_relay_snr(c, 3.0, 2.0) == 0.0

    def test_value(self):
        c = OutageCoefficients(a=1.5, b=3.0, c=1.0, r0=7.0, rate_prefactor=1 / 3)
        assert instantaneous_relay_snr(c, 1.0, 1.0) == pytest.approx(0.375)

    def test_saturation(self):
        c = OutageCoefficients(a=1.5, b=3.0, c=1.0, r0=7.0, rate_prefactor=1 / 3)
        assert instantaneous_relay_snr(c, 2.0, 1e12) == pytest.approx(1.5 * 2.0 / 3.0, rel=1e-9)

    @given(st.floats(0.01, 50), st.floats(0.01, 50), st.floats(1.01, 4))
    def test_monotone_and_homogeneous(self, x_sr, x_r1, k):
        c = ts_coefficients(SystemConfig(), TsParams(0.5))
        base = instantaneous_relay_snr(c, x_sr, x_r1)
        assert instantaneous_relay_snr(c, k * x_sr, x_r1) == pytest.approx(k * base, rel=1e-12)
        assert instantaneous_relay_snr(c, x_sr, k * x_r1) >= base

    def test_exact_combining_is_lower(self):
        cfg = SystemConfig()
        params = TsParams(0.5)
        c = coefficients(cfg, params)
        x = np.geomspace(0.01, 100, 9)
        assert np.all(relay_snr_exact_combining(cfg, params, x, x) <= instantaneous_relay_snr(c, x, x))


class TestRateAndPower:
    def test_mutual_information(self):
        c = ps_coefficients(SystemConfig(), PsParams.equal(0.5))
        assert mutual_information(c, 0.0, 0.0) == 0.0
        assert mutual_information(c, 3.0, 4.0) == pytest.approx(2.0)

    def test_relay_power(self):
        cfg = SystemConfig()
        assert relay_transmit_power(cfg, TsParams(0.0), 1.0) == 0.0
        assert relay_transmit_power(cfg, TsParams(0.5), 1.0) == pytest.approx(3.0)
        assert relay_transmit_power(cfg, PsParams.equal(0.5), 2.0) == pytest.approx(2.0)

    def test_combining_weight(self):
        assert combining_weight(0.5, 1.0, 0.0) == pytest.approx(math.sqrt(0.5))
        assert combining_weight(0.5, 1.0, 1.0, exact=False) == pytest.approx(math.sqrt(0.5))
        assert combining_weight(0.5, 1.0, 1.0) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            combining_weight(0.5, 1.0, 0.0, exact=False)

    def test_combining_gap_vanishes(self):
        exact = combining_weight(0.5, 1.0, 100.0)
        approx = combining_weight(0.5, 1.0, 100.0, exact=False)
        assert abs(approx - exact) / exact < 0.01
