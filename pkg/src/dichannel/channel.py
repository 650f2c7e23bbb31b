"""ISI channel with colored Gaussian noise.

The channel maps a length-``n`` input through a finite impulse response of
``K`` taps, producing ``n_bar = n + K - 1`` outputs, then adds zero-mean
Gaussian noise with covariance ``Sigma``::

    y = H x + z,    z ~ N(0, Sigma)

``H`` is the ``n_bar x n`` lower-banded Toeplitz matrix ``H[i, j] = h[i - j]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .exceptions import (
    DimensionMismatch,
    NonPositiveSpectrum,
    PeakPowerViolation,
    SpectralNull,
    ZeroEndpointTap,
)
from .spectral import SpectralDecomposition, decompose, matrix_power

__all__ = [
    "ChannelParams",
    "Cir",
    "CovarianceModel",
    "ToeplitzOperator",
    "make_cir",
    "min_grid_points",
    "convolve",
    "synthesize_covariance",
    "identity_covariance",
    "sample_noise",
    "transmit",
    "white_noise_params",
    "cir_to_dict",
    "cir_from_dict",
    "covariance_to_dict",
    "covariance_from_dict",
    "save_json",
    "load_json",
]

SPECTRAL_NULL_TOL = 1e-12


@dataclass(frozen=True)
class ChannelParams:
    """Scalar knobs of the channel and of the coding scheme."""

    n: int
    kappa: float = 0.0
    mu: float = 0.0
    p_max: float = 1.0
    a: float = 1.0
    b: float = 0.01
    c_sigma_min: float = 1.0
    c_sigma_max: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not 0.0 <= self.kappa < 0.5:
            raise ValueError(f"kappa must lie in [0, 1/2), got {self.kappa}")
        if not 0.0 <= self.mu < 0.5:
            raise ValueError(f"mu must lie in [0, 1/2), got {self.mu}")
        if not self.kappa + self.mu < 0.5:
            raise ValueError(f"kappa + mu must be < 1/2, got {self.kappa + self.mu}")
        for name in ("p_max", "a", "b", "c_sigma_min", "c_sigma_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value}")

    @property
    def K(self) -> int:
        """Number of ISI taps, ``ceil(n**kappa)``."""
        # guard against n**kappa landing a hair above an integer
        return max(1, math.ceil(self.n**self.kappa - 1e-12))

    @property
    def n_bar(self) -> int:
        return self.n + self.K - 1

    def spectrum_window(self) -> tuple[float, float]:
        """Admissible eigenvalue range ``[C_min n_bar^-mu, C_max n_bar^(mu/2)]``."""
        nb = self.n_bar
        return self.c_sigma_min * nb ** (-self.mu), self.c_sigma_max * nb ** (self.mu / 2)

    def replace(self, **changes) -> "ChannelParams":
        fields = {**self.__dict__, **changes}
        return ChannelParams(**fields)


def white_noise_params(n: int, **overrides) -> ChannelParams:
    """Memoryless white-noise preset: ``mu = 0`` and unit spectrum constants."""
    base = dict(n=n, kappa=0.0, mu=0.0, c_sigma_min=1.0, c_sigma_max=1.0)
    base.update(overrides)
    return ChannelParams(**base)


def min_grid_points(K: int) -> int:
    return max(4096, 64 * K)


@dataclass(frozen=True, eq=False)
class Cir:
    """Channel impulse response with its certified frequency-response floor."""

    taps: np.ndarray
    l_bound: float
    h_min: float
    grid_points: int

    @property
    def K(self) -> int:
        return self.taps.shape[0]

    def frequency_response(self, grid_points: int | None = None) -> np.ndarray:
        """``H(w) = sum_k h_k exp(-i w k)`` on ``grid_points`` uniform points of [0, 2pi)."""
        return np.fft.fft(self.taps, grid_points or self.grid_points)

    def toeplitz(self, n: int) -> "ToeplitzOperator":
        return ToeplitzOperator(n=n, cir=self)


def make_cir(taps, grid_points: int | None = None) -> Cir:
    """Validate taps and certify ``H_min = min |H(w)|`` on a uniform grid.

    ``H_min`` carries no ``1/(2 pi)`` factor; with that normalization the
    convolution satisfies ``||h * x|| >= H_min ||x||`` for zero-padded input.
    """
    h = np.array(taps, dtype=float).ravel()
    if h.size == 0:
        raise ValueError("impulse response needs at least one tap")
    if not np.all(np.isfinite(h)):
        raise ValueError("taps must be finite")
    if h[0] == 0.0 or h[-1] == 0.0:
        raise ZeroEndpointTap("first and last taps must be nonzero")
    K = h.size
    if grid_points is None:
        grid_points = min_grid_points(K)
    if grid_points < min_grid_points(K):
        raise ValueError(f"grid_points must be at least {min_grid_points(K)} for K={K}")
    mag = np.abs(np.fft.fft(h, grid_points))
    h_min = float(mag.min())
    if h_min <= SPECTRAL_NULL_TOL:
        w = 2 * np.pi * int(mag.argmin()) / grid_points
        raise SpectralNull(f"|H(w)| = {h_min:.3e} at w = {w:.6f}")
    h.setflags(write=False)
    return Cir(taps=h, l_bound=float(np.abs(h).max()), h_min=h_min, grid_points=int(grid_points))


@dataclass(frozen=True, eq=False)
class ToeplitzOperator:
    """The ``n_bar x n`` convolution matrix of a CIR."""

    n: int
    cir: Cir

    @property
    def rows(self) -> int:
        return self.n + self.cir.K - 1

    @property
    def cols(self) -> int:
        return self.n

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def toarray(self) -> np.ndarray:
        m = np.zeros(self.shape)
        for k, hk in enumerate(self.cir.taps):
            idx = np.arange(self.n)
            m[idx + k, idx] = hk
        return m

    def __matmul__(self, x):
        return self.toarray() @ x


def convolve(codeword, cir: Cir) -> np.ndarray:
    """Full linear convolution; accepts one codeword or a stack of rows."""
    c = np.asarray(codeword, dtype=float)
    if c.shape[-1] < 1:
        raise ValueError("codeword length must be at least 1")
    if c.ndim == 1:
        return np.convolve(c, cir.taps)
    n = c.shape[-1]
    out = np.zeros(c.shape[:-1] + (n + cir.K - 1,))
    for k, hk in enumerate(cir.taps):
        out[..., k : k + n] += hk * c
    return out


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Symmetric positive-definite noise covariance with its decomposition."""

    sigma: np.ndarray
    spectrum: np.ndarray
    basis: np.ndarray
    seed: int | None = field(default=None)

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    @classmethod
    def from_decomposition(cls, spectrum, basis, seed=None) -> "CovarianceModel":
        lam = np.asarray(spectrum, dtype=float)
        q = np.asarray(basis, dtype=float)
        if q.shape != (lam.size, lam.size):
            raise DimensionMismatch(f"basis shape {q.shape} vs spectrum length {lam.size}")
        if np.any(lam <= 0):
            raise NonPositiveSpectrum("covariance spectrum must be strictly positive")
        order = np.argsort(lam)[::-1]
        lam, q = lam[order].copy(), q[:, order].copy()
        sigma = (q * lam) @ q.T
        sigma = 0.5 * (sigma + sigma.T)
        for arr in (lam, q, sigma):
            arr.setflags(write=False)
        return cls(sigma=sigma, spectrum=lam, basis=q, seed=seed)

    @classmethod
    def from_matrix(cls, sigma, seed=None) -> "CovarianceModel":
        dec = decompose(sigma)
        return cls.from_decomposition(dec.spectrum, dec.basis, seed=seed)

    @property
    def decomposition(self) -> SpectralDecomposition:
        return SpectralDecomposition(spectrum=self.spectrum, basis=self.basis)

    @cached_property
    def sqrt(self) -> np.ndarray:
        return matrix_power(self, 0.5)

    @cached_property
    def inv_sqrt(self) -> np.ndarray:
        return matrix_power(self, -0.5)

    @cached_property
    def inv(self) -> np.ndarray:
        return matrix_power(self, -1.0)

    @property
    def sigma_max(self) -> float:
        return float(self.spectrum[0])

    @property
    def sigma_min(self) -> float:
        return float(self.spectrum[-1])

    def satisfies_window(self, params: ChannelParams, rtol: float = 0.0) -> bool:
        lo, hi = params.spectrum_window()
        return bool(self.sigma_min >= lo * (1 - rtol) and self.sigma_max <= hi * (1 + rtol))


def _haar_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    # sign fix makes the distribution Haar, not just orthonormal
    return q * np.sign(np.diag(r))


def synthesize_covariance(params: ChannelParams, seed: int) -> CovarianceModel:
    """Random covariance whose spectrum lies inside the admissible window.

    Eigenvalues are log-uniform on ``params.spectrum_window()``, the basis is
    Haar-distributed. Deterministic in ``seed``.
    """
    lo, hi = params.spectrum_window()
    if lo > hi:
        raise ValueError(f"empty spectrum window [{lo:.4g}, {hi:.4g}]; check c_sigma_min/c_sigma_max")
    rng = np.random.default_rng(seed)
    dim = params.n_bar
    q = _haar_orthogonal(dim, rng)
    lam = np.exp(rng.uniform(math.log(lo), math.log(hi), size=dim))
    lam = np.clip(lam, lo, hi)
    return CovarianceModel.from_decomposition(lam, q, seed=seed)


def identity_covariance(dim: int, scale: float = 1.0) -> CovarianceModel:
    return CovarianceModel.from_decomposition(np.full(dim, float(scale)), np.eye(dim))


def sample_noise(cov: CovarianceModel, seed, size: int | None = None) -> np.ndarray:
    """Draw ``z = Sigma^{1/2} w`` with ``w`` standard normal.

    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``. With
    ``size`` the result is a ``(size, dim)`` array of independent draws.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    shape = (cov.dim,) if size is None else (size, cov.dim)
    w = rng.standard_normal(shape)
    # Sigma^{1/2} is symmetric, so row-stacked draws are w @ Sigma^{1/2}
    return w @ cov.sqrt


def transmit(codeword, cir: Cir, cov: CovarianceModel, seed, *, p_max: float) -> np.ndarray:
    """One channel use: ``convolve(codeword) + noise``."""
    c = np.asarray(codeword, dtype=float)
    if np.any(np.abs(c) > p_max):
        raise PeakPowerViolation(f"max |c_t| = {np.abs(c).max():.4g} exceeds p_max = {p_max:.4g}")
    x = convolve(c, cir)
    if x.shape[-1] != cov.dim:
        raise DimensionMismatch(f"convolved length {x.shape[-1]} vs covariance dim {cov.dim}")
    return x + sample_noise(cov, seed)


# --- JSON persistence ------------------------------------------------------


def cir_to_dict(cir: Cir) -> dict:
    return {
        "kind": "cir",
        "taps": cir.taps.tolist(),
        "grid_points": cir.grid_points,
        "l_bound": cir.l_bound,
        "h_min": cir.h_min,
    }


def cir_from_dict(d: dict) -> Cir:
    return make_cir(d["taps"], d.get("grid_points"))


def covariance_to_dict(cov: CovarianceModel) -> dict:
    return {
        "kind": "covariance",
        "dim": cov.dim,
        "spectrum": cov.spectrum.tolist(),
        "basis": cov.basis.ravel(order="C").tolist(),
        "seed": cov.seed,
    }


def covariance_from_dict(d: dict) -> CovarianceModel:
    dim = int(d["dim"])
    basis = np.asarray(d["basis"], dtype=float).reshape(dim, dim)
    return CovarianceModel.from_decomposition(d["spectrum"], basis, seed=d.get("seed"))


def save_json(obj, path) -> None:
    if isinstance(obj, Cir):
        payload = cir_to_dict(obj)
    elif isinstance(obj, CovarianceModel):
        payload = covariance_to_dict(obj)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    Path(path).write_text(json.dumps(payload, indent=1))


def load_json(path):
    d = json.loads(Path(path).read_text())
    kind = d.get("kind")
    if kind == "cir":
        return cir_from_dict(d)
    if kind == "covariance":
        return covariance_from_dict(d)
    raise ValueError(f"unknown object kind {kind!r} in {path}")
