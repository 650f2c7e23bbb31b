"""scikit-learn compatible wrappers around the whitening and decoding kernels."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .channel import CovarianceModel, make_cir
from .codebook import Codebook, convolve_codebook
from .codec import decoding_measure
from .exceptions import DimensionMismatch, IndexOutOfRange
from .spectral import whiten

__all__ = ["Whitener", "IdentificationDecoder"]


def _as_covariance(cov) -> CovarianceModel:
    if isinstance(cov, CovarianceModel):
        return cov
    return CovarianceModel.from_matrix(check_array(cov, ensure_2d=True))


class Whitener(TransformerMixin, BaseEstimator):
    """Map samples to ``Sigma^{-1/2} x``.

    Parameters
    ----------
    covariance : array-like of shape (n_features, n_features) or CovarianceModel, default=None
        Known noise covariance. When None, ``fit`` estimates it from the rows
        of ``X`` (assumed zero-mean unless ``assume_centered=False``).
    assume_centered : bool, default=True
        Skip mean removal when estimating the covariance.

    Attributes
    ----------
    covariance_ : CovarianceModel
    mean_ : ndarray of shape (n_features,)
    n_features_in_ : int
    """

    def __init__(self, covariance=None, assume_centered=True):
        self.covariance = covariance
        self.assume_centered = assume_centered

    def fit(self, X, y=None):
        X = check_array(X)
        if self.covariance is not None:
            self.covariance_ = _as_covariance(self.covariance)
            if self.covariance_.dim != X.shape[1]:
                raise DimensionMismatch(f"covariance dim {self.covariance_.dim} vs {X.shape[1]} features")
            self.mean_ = np.zeros(X.shape[1])
        else:
            self.mean_ = np.zeros(X.shape[1]) if self.assume_centered else X.mean(axis=0)
            r = X - self.mean_
            dof = X.shape[0] - (0 if self.assume_centered else 1)
            self.covariance_ = CovarianceModel.from_matrix(r.T @ r / dof)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "covariance_")
        X = check_array(X)
        return whiten(self.covariance_, X - self.mean_)

    def inverse_transform(self, X):
        check_is_fitted(self, "covariance_")
        X = check_array(X)
        return X @ self.covariance_.sqrt + self.mean_


class IdentificationDecoder(TransformerMixin, BaseEstimator):
    """Threshold identification decoder for an ISI channel with colored noise.

    ``fit`` takes the original codebook (one codeword per row), convolves it
    with the channel taps and stores the images. ``transform`` returns the
    decoding measure of every output row against every codeword, and
    ``predict`` thresholds it.

    Parameters
    ----------
    taps : array-like of shape (K,)
        Channel impulse response.
    covariance : array-like of shape (n_bar, n_bar) or CovarianceModel
        Noise covariance, ``n_bar = n + K - 1``.
    threshold : float
        Acceptance threshold on ``|T|``.
    """

    def __init__(self, taps=(1.0,), covariance=None, threshold=0.5):
        self.taps = taps
        self.covariance = covariance
        self.threshold = threshold

    def fit(self, X, y=None):
        X = check_array(X)
        self.cir_ = make_cir(self.taps)
        n_bar = X.shape[1] + self.cir_.K - 1
        if self.covariance is None:
            self.covariance_ = CovarianceModel.from_decomposition(np.ones(n_bar), np.eye(n_bar))
        else:
            self.covariance_ = _as_covariance(self.covariance)
        if self.covariance_.dim != n_bar:
            raise DimensionMismatch(f"covariance dim {self.covariance_.dim} != n + K - 1 = {n_bar}")
        p_max = float(np.abs(X).max()) if X.size else 1.0
        self.codebook_ = Codebook(codewords=X, p_max=p_max, r0=float("nan"))
        self.conv_codebook_ = convolve_codebook(self.codebook_, self.cir_)
        self.n_features_in_ = X.shape[1]
        return self

    def _outputs(self, Y):
        check_is_fitted(self, "conv_codebook_")
        Y = check_array(Y)
        if Y.shape[1] != self.covariance_.dim:
            raise DimensionMismatch(f"outputs have {Y.shape[1]} samples, expected {self.covariance_.dim}")
        return Y

    def decision_function(self, Y, candidate):
        """Decoding measure ``T`` of each row of ``Y`` against one codeword (1-based)."""
        Y = self._outputs(Y)
        m = self.conv_codebook_.M
        if not 1 <= candidate <= m:
            raise IndexOutOfRange(f"candidate {candidate} outside 1..{m}")
        return decoding_measure(Y, self.conv_codebook_.codewords[candidate - 1], self.covariance_)

    def transform(self, Y):
        """Decoding measures, shape (n_outputs, M)."""
        Y = self._outputs(Y)
        cw = self.conv_codebook_.codewords
        return np.stack([decoding_measure(Y, c, self.covariance_) for c in cw], axis=1)

    def predict(self, Y, candidate=None):
        """Acceptance decisions, for one candidate or for all of them."""
        if candidate is None:
            return np.abs(self.transform(Y)) <= self.threshold
        return np.abs(self.decision_function(Y, candidate)) <= self.threshold
