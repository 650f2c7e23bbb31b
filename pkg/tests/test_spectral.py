import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from dichannel import ChannelParams, identity_covariance, synthesize_covariance
from dichannel.exceptions import NonPositiveSpectrum, ZeroVector
from dichannel.spectral import (
    chi2_cdf,
    decompose,
    ks_critical_value,
    ks_statistic,
    mahalanobis_sq,
    matrix_power,
    rayleigh_quotient,
    regularized_lower_gamma,
    singular_values,
    whiten,
)


@pytest.fixture(scope="module")
def cov():
    return synthesize_covariance(ChannelParams(n=24, mu=0.35, c_sigma_min=0.5, c_sigma_max=2.0), seed=21)


def test_decompose_sorted_and_reconstructs(cov):
    d = decompose(cov.sigma)
    assert np.all(np.diff(d.spectrum) <= 0)
    np.testing.assert_allclose(d.reconstruct(), cov.sigma, atol=1e-12)


def test_decompose_rejects_singular():
    with pytest.raises(NonPositiveSpectrum):
        decompose(np.diag([1.0, 0.0]))


def test_power_zero_and_one(cov):
    np.testing.assert_allclose(matrix_power(cov, 0.0), np.eye(cov.dim), atol=1e-12)
    np.testing.assert_allclose(matrix_power(cov, 1.0), cov.sigma, atol=1e-10)


def test_power_minus_one_against_solve(cov):
    inv = matrix_power(cov, -1.0)
    np.testing.assert_allclose(inv, np.linalg.solve(cov.sigma, np.eye(cov.dim)), atol=1e-8)
    np.testing.assert_allclose(cov.sigma @ inv, np.eye(cov.dim), atol=1e-8)
    s, s_inv = singular_values(cov.sigma), singular_values(inv)
    np.testing.assert_allclose(s_inv, 1 / s[::-1], rtol=1e-8)


def test_whiten_identity_and_zero(rng):
    v = rng.standard_normal(6)
    np.testing.assert_allclose(whiten(identity_covariance(6), v), v, atol=1e-14)
    np.testing.assert_array_equal(whiten(identity_covariance(6), np.zeros(6)), np.zeros(6))


def test_whiten_matches_inverse_sqrt(cov, rng):
    v = rng.standard_normal((3, cov.dim))
    np.testing.assert_allclose(whiten(cov, v), v @ matrix_power(cov, -0.5), atol=1e-10)


def test_mahalanobis(cov, rng):
    y, c = rng.standard_normal((2, cov.dim))
    assert mahalanobis_sq(c, c, cov) == 0.0
    oracle = (y - c) @ np.linalg.solve(cov.sigma, y - c)
    assert mahalanobis_sq(y, c, cov) == pytest.approx(oracle, rel=1e-9)
    assert mahalanobis_sq(y, c, identity_covariance(cov.dim)) == pytest.approx(np.sum((y - c) ** 2))


def test_rayleigh(cov, rng):
    top = cov.basis[:, 0]
    assert rayleigh_quotient(cov.sigma, top) == pytest.approx(cov.spectrum[0], rel=1e-8)
    assert rayleigh_quotient(np.eye(4), rng.standard_normal(4)) == pytest.approx(1.0)
    with pytest.raises(ZeroVector):
        rayleigh_quotient(np.eye(3), np.zeros(3))


def test_rayleigh_random_spd(rng):
    for _ in range(10):
        d = int(rng.integers(2, 33))
        g = rng.standard_normal((d, d))
        a = g @ g.T + 0.1 * np.eye(d)
        lam = np.linalg.eigvalsh(a)[-1]
        xs = rng.standard_normal((1000, d))
        assert max(rayleigh_quotient(a, x) for x in xs) <= lam + 1e-9


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0.5, 300), x=st.floats(0, 600))
def test_incomplete_gamma_vs_scipy(a, x):
    assert regularized_lower_gamma(a, x) == pytest.approx(special.gammainc(a, x), abs=1e-10)


@pytest.mark.parametrize("dof", [1, 2, 16, 64, 256])
def test_chi2_cdf_vs_scipy(dof):
    xs = np.linspace(0, 3 * dof + 20, 50)
    np.testing.assert_allclose(chi2_cdf(xs, dof), stats.chi2.cdf(xs, dof), atol=1e-10)


def test_ks_matches_scipy(rng):
    s = rng.standard_normal(500)
    ours = ks_statistic(s, lambda x: special.ndtr(x))
    assert ours == pytest.approx(stats.kstest(s, "norm").statistic, abs=1e-12)


def test_ks_critical_value():
    # asymptotic two-sided critical value at alpha = 0.01 is 1.6276 / sqrt(m)
    assert ks_critical_value(10_000, 0.01) == pytest.approx(1.6276 / 100, rel=1e-3)
