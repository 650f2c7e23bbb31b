"""Spectral kernels on symmetric positive-definite matrices.

All functions here take any object exposing ``spectrum`` (descending
eigenvalues) and ``basis`` (orthonormal eigenvectors as columns), which
covers both :class:`SpectralDecomposition` and
:class:`dichannel.channel.CovarianceModel`. Every power of a covariance is
built from the same cached decomposition so that whitening, decoding and
verification see a consistent Sigma^p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, NonPositiveSpectrum, ZeroVector

__all__ = [
    "SpectralDecomposition",
    "decompose",
    "matrix_power",
    "whiten",
    "mahalanobis_sq",
    "rayleigh_quotient",
    "singular_values",
    "chi2_cdf",
    "regularized_lower_gamma",
    "ks_statistic",
    "ks_critical_value",
]


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigen-decomposition ``A = Q diag(lam) Q^T`` with ``lam`` descending."""

    spectrum: np.ndarray
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.spectrum.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.spectrum) @ self.basis.T


def decompose(matrix, *, require_positive: bool = True) -> SpectralDecomposition:
    """Decompose a symmetric matrix, eigenvalues sorted in descending order."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    a = 0.5 * (a + a.T)
    lam, q = np.linalg.eigh(a)
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    q = q[:, order]
    if require_positive and lam[-1] <= 0:
        raise NonPositiveSpectrum(f"smallest eigenvalue {lam[-1]:.3e} is not positive")
    lam.setflags(write=False)
    q.setflags(write=False)
    return SpectralDecomposition(spectrum=lam, basis=q)


def matrix_power(cov, p: float) -> np.ndarray:
    """Return ``Q diag(sigma**p) Q^T`` from the cached decomposition."""
    if not math.isfinite(p):
        raise ValueError(f"power must be finite, got {p}")
    lam = np.asarray(cov.spectrum, dtype=float)
    if np.any(lam <= 0):
        raise NonPositiveSpectrum("matrix powers need a strictly positive spectrum")
    q = cov.basis
    out = (q * lam**p) @ q.T
    return 0.5 * (out + out.T)


def _check_length(cov, v):
    if v.shape[-1] != cov.spectrum.shape[0]:
        raise DimensionMismatch(
            f"vector length {v.shape[-1]} does not match dimension {cov.spectrum.shape[0]}"
        )


def whiten(cov, v) -> np.ndarray:
    """Apply ``Sigma^{-1/2}`` to a vector or to each row of a 2-D array."""
    v = np.asarray(v, dtype=float)
    _check_length(cov, v)
    q = cov.basis
    scale = 1.0 / np.sqrt(cov.spectrum)
    # rows: x -> Q diag(s) Q^T x, written for row-stacked input
    return ((v @ q) * scale) @ q.T


def mahalanobis_sq(y, center, cov) -> np.ndarray | float:
    """Squared Mahalanobis distance ``(y-c)^T Sigma^{-1} (y-c)``, unnormalized.

    ``y`` may be a single vector or a stack of row vectors.
    """
    y = np.asarray(y, dtype=float)
    center = np.asarray(center, dtype=float)
    _check_length(cov, y)
    _check_length(cov, center)
    # ||Lambda^{-1/2} Q^T r||^2, no need to rotate back
    proj = (y - center) @ cov.basis
    d2 = np.sum(proj * proj / cov.spectrum, axis=-1)
    return float(d2) if np.ndim(d2) == 0 else d2


def rayleigh_quotient(matrix, x) -> float:
    a = np.asarray(matrix, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"vector length {x.shape[0]} vs matrix {a.shape}")
    xx = float(x @ x)
    if xx == 0.0:
        raise ZeroVector("Rayleigh quotient undefined at the zero vector")
    return float(x @ a @ x) / xx


def singular_values(matrix) -> np.ndarray:
    """Singular values in descending order (LAPACK SVD, independent of eigh)."""
    return np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)


# --- chi-squared distribution function ------------------------------------

_GAMMA_EPS = 1e-15
_GAMMA_MAX_ITER = 10_000
_TINY = 1e-300


def _gamma_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    else:
        raise RuntimeError("incomplete gamma series did not converge")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_continued_fraction(a: float, x: float) -> float:
    # modified Lentz for the upper tail Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    else:
        raise RuntimeError("incomplete gamma continued fraction did not converge")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_lower_gamma(a: float, x: float) -> float:
    """P(a, x) with the series below ``x = a + 1`` and a continued fraction above."""
    if a <= 0:
        raise ValueError("shape parameter must be positive")
    if x <= 0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_continued_fraction(a, x)


def chi2_cdf(x, dof: int):
    """Chi-squared distribution function, scalar or elementwise."""
    if np.ndim(x) == 0:
        return regularized_lower_gamma(0.5 * dof, 0.5 * float(x))
    flat = [regularized_lower_gamma(0.5 * dof, 0.5 * float(v)) for v in np.ravel(x)]
    return np.reshape(flat, np.shape(x))


def ks_statistic(samples, cdf) -> float:
    """Max deviation between the empirical CDF of ``samples`` and ``cdf``."""
    s = np.sort(np.asarray(samples, dtype=float))
    m = s.shape[0]
    f = np.asarray(cdf(s), dtype=float)
    upper = np.arange(1, m + 1) / m - f
    lower = f - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))


def ks_critical_value(m: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample Kolmogorov-Smirnov threshold ``sqrt(-ln(alpha/2)/2m)``."""
    return math.sqrt(-math.log(alpha / 2.0) / (2.0 * m))
