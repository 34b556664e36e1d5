import math

import pytest

from ehrelay.network import SystemConfig, mean_channel_gains, place_relay_on_height


def simpson_with_head(func, lo_power, decay, r0, n=10 ** 6, h0=1e-6):
    """Fixed-grid Simpson for ``int_0^r0 exp(-decay t) t^p ln t dt``.

    The first ``h0`` of the range is integrated from a three-term Taylor
    expansion of the exponential, so the log endpoint never meets the grid.
    """
    import numpy as np
    from scipy import integrate

    p = lo_power

    def moment(q):
        return h0 ** (q + 1) * (math.log(h0) / (q + 1) - 1.0 / (q + 1) ** 2)

    head = moment(p) - decay * moment(p + 1) + 0.5 * decay * decay * moment(p + 2)
    t = np.linspace(h0, r0, n + 1)
    return head + integrate.simpson(func(t), x=t)


@pytest.fixture
def default_cfg():
    return SystemConfig()


@pytest.fixture
def default_gains():
    return mean_channel_gains(place_relay_on_height(0.5), 4.0)


_CRITERIA: dict = {}


@pytest.fixture(scope="session")
def criteria():
    """Collects one verdict line per acceptance criterion for the run summary."""
    return _CRITERIA


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[key])
