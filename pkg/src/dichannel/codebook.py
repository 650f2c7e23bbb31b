"""Grid sphere-packing codebooks and the finite-n codebook-size bounds.

Codewords are points of an axis-aligned grid with spacing ``2 r0`` inside the
hypercube ``[-p_max, p_max]^n``; balls of radius ``r0`` around them are
disjoint, so the minimum distance is ``2 r0`` by construction.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelParams, Cir, convolve
from .exceptions import RadiusTooLarge, TooManyCodewords

__all__ = [
    "PackingParams",
    "Codebook",
    "ConvolvedCodebook",
    "packing_params",
    "grid_axis",
    "build_grid_codebook",
    "certify_min_distance",
    "convolve_codebook",
    "log_m_lower",
    "log_m_upper",
    "save_codebook",
    "load_codebook",
    "MAX_CERTIFY",
]

MAX_CERTIFY = 5000
LOG2E = math.log2(math.e)


@dataclass(frozen=True)
class PackingParams:
    epsilon_n: float
    r0: float
    delta_n: float


def packing_params(params: ChannelParams, h_min: float) -> PackingParams:
    """Packing parameter, packing radius and decoding threshold.

    ``epsilon_n = a / (H_min^2 n^((1 - (2 kappa + 2 mu + b)) / 2))``,
    ``r0 = sqrt(n_bar epsilon_n)`` and
    ``delta_n = 4 a C_max / (3 n^((1 - (2 kappa + mu + b)) / 2))``.
    """
    if not h_min > 0:
        raise ValueError(f"h_min must be positive, got {h_min}")
    n, k, mu, b, a = params.n, params.kappa, params.mu, params.b, params.a
    eps = a / (h_min**2 * n ** ((1 - (2 * k + 2 * mu + b)) / 2))
    r0 = math.sqrt(params.n_bar * eps)
    delta = 4 * a * params.c_sigma_max / (3 * n ** ((1 - (2 * k + mu + b)) / 2))
    return PackingParams(epsilon_n=eps, r0=r0, delta_n=delta)


@dataclass(frozen=True, eq=False)
class Codebook:
    codewords: np.ndarray
    p_max: float
    r0: float

    @property
    def M(self) -> int:
        return self.codewords.shape[0]

    @property
    def n(self) -> int:
        return self.codewords.shape[1]

    def __len__(self):
        return self.M

    def __getitem__(self, i):
        return self.codewords[i]

    @property
    def min_distance(self) -> float:
        return certify_min_distance(self)


@dataclass(frozen=True, eq=False)
class ConvolvedCodebook:
    codewords: np.ndarray
    cir: Cir

    @property
    def M(self) -> int:
        return self.codewords.shape[0]

    def __len__(self):
        return self.M

    def __getitem__(self, i):
        return self.codewords[i]


def grid_axis(p_max: float, r0: float) -> np.ndarray:
    """Per-axis grid ``-p_max, -p_max + 2 r0, ...`` with ``floor(p_max/r0) + 1`` points."""
    if not r0 > 0:
        raise ValueError(f"r0 must be positive, got {r0}")
    if 2 * r0 > 2 * p_max * (1 + 1e-12):
        raise RadiusTooLarge(f"2 r0 = {2 * r0:.4g} exceeds the cube edge 2 p_max = {2 * p_max:.4g}")
    q = int(math.floor(p_max / r0 * (1 + 1e-12))) + 1
    return np.minimum(-p_max + 2 * r0 * np.arange(q), p_max)


def build_grid_codebook(params: ChannelParams, packing: PackingParams | float, m_cap: int) -> Codebook:
    """First ``m_cap`` grid points in lexicographic order (first axis slowest)."""
    if m_cap < 1:
        raise ValueError("m_cap must be at least 1")
    r0 = packing.r0 if isinstance(packing, PackingParams) else float(packing)
    axis = grid_axis(params.p_max, r0)
    q, n = axis.size, params.n
    total = q**n  # python int, no overflow
    m = int(min(m_cap, total))
    idx = np.empty((m, n), dtype=np.int64)
    rem = np.arange(m, dtype=object) if total > np.iinfo(np.int64).max else np.arange(m, dtype=np.int64)
    for t in range(n - 1, -1, -1):
        idx[:, t] = (rem % q).astype(np.int64)
        rem = rem // q
    cw = axis[idx]
    cw.setflags(write=False)
    return Codebook(codewords=cw, p_max=params.p_max, r0=r0)


def certify_min_distance(cb: Codebook | np.ndarray, block: int = 256) -> float:
    """Exact minimum pairwise Euclidean distance by a blocked full scan."""
    x = np.asarray(cb.codewords if isinstance(cb, (Codebook, ConvolvedCodebook)) else cb, dtype=float)
    m = x.shape[0]
    if m < 2:
        raise ValueError("minimum distance needs at least two codewords")
    if m > MAX_CERTIFY:
        raise TooManyCodewords(f"{m} codewords exceed the exact-scan cap of {MAX_CERTIFY}; subsample first")
    sq = np.einsum("ij,ij->i", x, x)
    scale = float(sq.max()) if sq.size else 0.0
    best = np.inf
    for s in range(0, m - 1, block):
        xs = x[s : s + block]
        rest = x[s:]
        d2 = sq[s : s + block, None] + sq[None, s:] - 2.0 * xs @ rest.T
        # keep the strict upper triangle only (j > i)
        d2[np.tril_indices(xs.shape[0], k=0, m=rest.shape[0])] = np.inf
        flat = d2.ravel()
        lo = flat.min()
        # the Gram form loses digits; re-evaluate the near-minimal pairs directly
        near = np.flatnonzero(flat <= lo + 1e-9 * max(scale, 1.0))
        if near.size > 1024:
            near = near[np.argpartition(flat[near], 1023)[:1024]]
        ii, jj = np.unravel_index(near, d2.shape)
        diff = xs[ii] - rest[jj]
        best = min(best, float(np.sqrt(np.einsum("ij,ij->i", diff, diff).min())))
    return best


def convolve_codebook(cb: Codebook, cir: Cir) -> ConvolvedCodebook:
    cw = convolve(cb.codewords, cir)
    cw.setflags(write=False)
    return ConvolvedCodebook(codewords=cw, cir=cir)


def log_m_lower(params: ChannelParams, packing: PackingParams) -> float:
    """Displayed terms of the lower bound on ``log2 M`` for the packing.

    ``n log P - n log r0 + m log m - m log e - n`` with ``m = floor(n/2)``;
    the ``o(m)`` remainder is dropped.
    """
    n = params.n
    m = n // 2
    mlogm = m * math.log2(m) if m > 0 else 0.0
    return n * math.log2(params.p_max) - n * math.log2(packing.r0) + mlogm - m * LOG2E - n


def log_m_upper(params: ChannelParams, cir: Cir | None, alpha_n: float) -> float:
    """Displayed terms of the converse upper bound on ``log2 M``.

    ``n_bar log(A_max + 2 alpha) - n_bar log alpha - n_bar log sqrt(pi) + (n_bar/2) log n_bar``
    with ``A_max = K L p_max``; the ``O(n_bar)`` remainder is dropped. Without
    a CIR, ``K = params.K`` and ``L = 1``.
    """
    if not alpha_n > 0:
        raise ValueError("alpha_n must be positive")
    if cir is None:
        K, L = params.K, 1.0
    else:
        K, L = cir.K, cir.l_bound
    nb = params.n + K - 1
    a_max = K * L * params.p_max
    return (
        nb * math.log2(a_max + 2 * alpha_n)
        - nb * math.log2(alpha_n)
        - nb * math.log2(math.sqrt(math.pi))
        + 0.5 * nb * math.log2(nb)
    )


# --- persistence -------------------------------------------------------------
#
# Binary layout, little endian:
#   magic   4 bytes  b"DICB"
#   version uint32   1
#   n       uint64
#   M       uint64
#   p_max   float64
#   r0      float64
#   data    M*n float64, row-major
# CSV layout: first row "n,M,p_max,r0", second row the values (floats as repr),
# then M rows of n codeword coordinates.

_MAGIC = b"DICB"
_HEADER = struct.Struct("<4sIQQdd")


def save_codebook(cb: Codebook, path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix == ".csv" else "bin")
    if fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, 1, cb.n, cb.M, cb.p_max, cb.r0))
            fh.write(np.ascontiguousarray(cb.codewords, dtype="<f8").tobytes())
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "M", "p_max", "r0"])
            w.writerow([cb.n, cb.M, repr(float(cb.p_max)), repr(float(cb.r0))])
            for row in cb.codewords:
                w.writerow([repr(float(v)) for v in row])
    else:
        raise ValueError(f"unknown codebook format {fmt!r}")


def load_codebook(path) -> Codebook:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if head[:4] == _MAGIC:
            _, version, n, m, p_max, r0 = _HEADER.unpack(head)
            if version != 1:
                raise ValueError(f"unsupported codebook version {version}")
            data = np.frombuffer(fh.read(), dtype="<f8")
            if data.size != n * m:
                raise ValueError(f"truncated codebook: expected {n * m} values, got {data.size}")
            cw = data.reshape(m, n).astype(float)
            return Codebook(codewords=cw, p_max=p_max, r0=r0)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    n, m = int(rows[1][0]), int(rows[1][1])
    cw = np.array([[float(v) for v in r] for r in rows[2 : 2 + m]], dtype=float).reshape(m, n)
    return Codebook(codewords=cw, p_max=float(rows[1][2]), r0=float(rows[1][3]))
