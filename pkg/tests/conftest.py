import numpy as np
import pytest

from dichannel import ChannelParams, build_context, make_cir, synthesize_covariance


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def colored_ctx():
    """Non-vacuous type-II configuration: zeta0 + zeta1 < 1 at n = 128."""
    params = ChannelParams(n=128, mu=0.4, b=1.0, a=0.25, p_max=14.93, c_sigma_min=15.78, c_sigma_max=0.95)
    cov = synthesize_covariance(params, seed=7)
    return build_context(params, make_cir([1.0]), cov, m_cap=16)


@pytest.fixture(scope="session")
def white_ctx():
    params = ChannelParams(n=64, p_max=4.0)
    cov = synthesize_covariance(params, seed=0)
    return build_context(params, make_cir([1.0]), cov, m_cap=16)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
