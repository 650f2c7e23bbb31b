"""Deterministic encoder and Mahalanobis-threshold identification decoder.

The receiver interested in message ``j`` computes the decoding measure::

    T(y, c_j^h) = (y - c_j^h)^T Sigma^{-1} (y - c_j^h) / n_bar - 1

and declares "j was sent" iff ``|T| <= delta_n``. Messages are 1-based
throughout the public API.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import Codebook, ConvolvedCodebook
from .exceptions import DimensionMismatch, IndexOutOfRange
from .spectral import mahalanobis_sq, whiten

__all__ = [
    "DecodingOutcome",
    "EventDecomposition",
    "encode",
    "decoding_measure",
    "identify",
    "event_decomposition",
]


@dataclass(frozen=True)
class DecodingOutcome:
    measure: float
    accepted: bool
    threshold: float


@dataclass(frozen=True)
class EventDecomposition:
    """Split of ``n_bar^{-1} ||Sigma^{-1/2}(z + c_i^h - c_j^h)||^2`` into U + V.

    ``u`` collects the two squared norms, ``v`` the cross term.
    """

    u: float
    v: float
    w: float

    def e0(self, delta_n: float) -> bool:
        return abs(self.v) > delta_n

    def e1(self, delta_n: float) -> bool:
        return self.u - 1.0 <= 2.0 * delta_n

    def e2(self, delta_n: float) -> bool:
        return self.w - 1.0 <= delta_n


def _check_index(index: int, m: int) -> int:
    if not 1 <= index <= m:
        raise IndexOutOfRange(f"message index {index} outside 1..{m}")
    return index - 1


def encode(message_index: int, cb: Codebook) -> np.ndarray:
    return cb.codewords[_check_index(message_index, cb.M)]


def decoding_measure(y, c_h, cov):
    """Normalized Mahalanobis distance minus one; vectorized over rows of ``y``."""
    y = np.asarray(y, dtype=float)
    c_h = np.asarray(c_h, dtype=float)
    if c_h.shape[-1] != y.shape[-1]:
        raise DimensionMismatch(f"output length {y.shape[-1]} vs codeword length {c_h.shape[-1]}")
    return mahalanobis_sq(y, c_h, cov) / cov.spectrum.shape[0] - 1.0


def identify(y, candidate: int, conv_cb: ConvolvedCodebook, cov, delta_n: float) -> DecodingOutcome:
    """Answer "was ``candidate`` sent?"; the acceptance boundary is inclusive."""
    c_h = conv_cb.codewords[_check_index(candidate, conv_cb.M)]
    t = float(decoding_measure(y, c_h, cov))
    return DecodingOutcome(measure=t, accepted=abs(t) <= delta_n, threshold=delta_n)


def event_decomposition(z, c_i_h, c_j_h, cov) -> EventDecomposition:
    """U/V/W split of the decoding statistic when ``i`` is sent and ``j`` is tested.

    ``z_w = Sigma^{-1/2} z`` and ``d = Sigma^{-1/2}(c_i^h - c_j^h)``;
    ``u = (|z_w|^2 + |d|^2)/n_bar``, ``v = 2 z_w^T d / n_bar = 2 z^T Sigma^{-1}(c_i^h - c_j^h)/n_bar``.
    """
    z = np.asarray(z, dtype=float)
    diff = np.asarray(c_i_h, dtype=float) - np.asarray(c_j_h, dtype=float)
    nb = cov.spectrum.shape[0]
    if z.shape != (nb,) or diff.shape != (nb,):
        raise DimensionMismatch(f"expected vectors of length {nb}")
    z_w = whiten(cov, z)
    d = whiten(cov, diff)
    u = (z_w @ z_w + d @ d) / nb
    v = 2.0 * (z_w @ d) / nb
    return EventDecomposition(u=float(u), v=float(v), w=float(u + v))
