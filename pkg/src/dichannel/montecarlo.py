"""Monte-Carlo estimation of identification error rates.

Noise is generated in fixed-size chunks; each chunk owns an independent
stream derived from ``(master seed, kind, i, j, chunk index)``. Results are
therefore identical whether chunks run sequentially or on ``n_jobs`` workers,
and a run with more trials extends (never reshuffles) a shorter one.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from .channel import ChannelParams, Cir, CovarianceModel, sample_noise
from .codebook import Codebook, ConvolvedCodebook, PackingParams, convolve_codebook, packing_params
from .codec import decoding_measure
from .exceptions import IndexOutOfRange, SameIndex

__all__ = [
    "ErrorEstimate",
    "BoundSet",
    "ExperimentContext",
    "build_context",
    "wilson_interval",
    "chebyshev_bounds",
    "estimate_type1",
    "estimate_type1_detailed",
    "estimate_type2",
    "Type1Result",
    "PairEventReport",
    "error_row",
    "verify_event_bounds",
    "select_pairs",
    "ERROR_CSV_FIELDS",
    "write_error_csv",
    "CHUNK",
]

CHUNK = 1024
Z95 = 1.959963984540054
_TYPE1, _TYPE2 = 1, 2


def wilson_interval(failures: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    p = failures / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half))


@dataclass(frozen=True)
class ErrorEstimate:
    trials: int
    failures: int

    def __post_init__(self):
        if self.trials < 1 or not 0 <= self.failures <= self.trials:
            raise ValueError(f"invalid counts {self.failures}/{self.trials}")

    @property
    def rate(self) -> float:
        return self.failures / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials)

    @property
    def ci_low(self) -> float:
        return self.ci[0]

    @property
    def ci_high(self) -> float:
        return self.ci[1]

    @property
    def half_width(self) -> float:
        lo, hi = self.ci
        return 0.5 * (hi - lo)

    def __add__(self, other: "ErrorEstimate") -> "ErrorEstimate":
        return ErrorEstimate(self.trials + other.trials, self.failures + other.failures)


@dataclass(frozen=True)
class BoundSet:
    eta0: float
    zeta0: float
    zeta1: float

    @property
    def type2(self) -> float:
        return self.zeta0 + self.zeta1

    @property
    def type1_vacuous(self) -> bool:
        return self.eta0 > 1

    @property
    def type2_vacuous(self) -> bool:
        return self.type2 > 1


def chebyshev_bounds(params: ChannelParams, l_bound: float) -> BoundSet:
    """Chebyshev-type bounds on the type-I and the two type-II event probabilities."""
    n, a = params.n, params.a
    cmin, cmax = params.c_sigma_min, params.c_sigma_max
    expo = 2 * params.kappa + params.mu + params.b
    eta0 = 9.0 / (8.0 * a * a * cmax * cmax * n**expo)
    zeta0 = 9.0 * a * l_bound**2 * params.p_max**2 / (cmin * cmax * n**params.b)
    zeta1 = 9.0 / (8.0 * a * a * cmax * cmax * n**expo)
    return BoundSet(eta0=eta0, zeta0=zeta0, zeta1=zeta1)


@dataclass(frozen=True, eq=False)
class ExperimentContext:
    """Everything a trial needs: channel, covariance, codebooks and threshold."""

    params: ChannelParams
    cir: Cir
    cov: CovarianceModel
    codebook: Codebook
    conv_codebook: ConvolvedCodebook
    packing: PackingParams
    delta_n: float = field(default=float("nan"))

    def __post_init__(self):
        if math.isnan(self.delta_n):
            object.__setattr__(self, "delta_n", self.packing.delta_n)

    @property
    def M(self) -> int:
        return self.codebook.M

    def with_threshold(self, delta_n: float) -> "ExperimentContext":
        return replace(self, delta_n=delta_n)

    def with_conv_codebook(self, codewords) -> "ExperimentContext":
        cw = np.asarray(codewords, dtype=float)
        return replace(self, conv_codebook=ConvolvedCodebook(codewords=cw, cir=self.cir))

    @property
    def bounds(self) -> BoundSet:
        return chebyshev_bounds(self.params, self.cir.l_bound)


def build_context(
    params: ChannelParams,
    cir: Cir,
    cov: CovarianceModel,
    m_cap: int,
    codebook: Codebook | None = None,
) -> ExperimentContext:
    from .codebook import build_grid_codebook

    if cir.K != params.K:
        raise ValueError(f"CIR has {cir.K} taps but the parameters imply K = {params.K}")
    if cov.dim != params.n_bar:
        raise ValueError(f"covariance dim {cov.dim} != n_bar {params.n_bar}")
    packing = packing_params(params, cir.h_min)
    cb = codebook if codebook is not None else build_grid_codebook(params, packing, m_cap)
    return ExperimentContext(
        params=params,
        cir=cir,
        cov=cov,
        codebook=cb,
        conv_codebook=convolve_codebook(cb, cir),
        packing=packing,
    )


def _chunk_rng(seed: int, kind: int, i: int, j: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(kind, i, j, chunk))
    return np.random.default_rng(ss)


def _chunks(trials: int):
    for k, start in enumerate(range(0, trials, CHUNK)):
        yield k, min(CHUNK, trials - start)


def _check(i: int, m: int):
    if not 1 <= i <= m:
        raise IndexOutOfRange(f"message index {i} outside 1..{m}")


def _run(fn, jobs, n_jobs):
    if n_jobs == 1:
        return [fn(*a) for a in jobs]
    return Parallel(n_jobs=n_jobs)(delayed(fn)(*a) for a in jobs)


def _type1_chunk(ctx, i, seed, k, size):
    z = sample_noise(ctx.cov, _chunk_rng(seed, _TYPE1, i, 0, k), size=size)
    c = ctx.conv_codebook.codewords[i - 1]
    t = decoding_measure(c + z, c, ctx.cov)
    return int(np.count_nonzero(np.abs(t) > ctx.delta_n)), int(np.count_nonzero(t > ctx.delta_n))


@dataclass(frozen=True)
class Type1Result:
    two_sided: ErrorEstimate
    one_sided: ErrorEstimate


def estimate_type1(i: int, trials: int, ctx: ExperimentContext, seed: int, n_jobs: int = 1) -> ErrorEstimate:
    """Fraction of trials where message ``i`` is sent and rejected (|T| > delta_n)."""
    return estimate_type1_detailed(i, trials, ctx, seed, n_jobs).two_sided


def estimate_type1_detailed(i, trials, ctx, seed, n_jobs=1) -> Type1Result:
    _check(i, ctx.M)
    if trials < 100:
        raise ValueError("at least 100 trials are required")
    counts = _run(_type1_chunk, [(ctx, i, seed, k, s) for k, s in _chunks(trials)], n_jobs)
    two = sum(c[0] for c in counts)
    one = sum(c[1] for c in counts)
    return Type1Result(ErrorEstimate(trials, two), ErrorEstimate(trials, one))


def _type2_chunk(ctx, i, j, seed, k, size):
    cov = ctx.cov
    nb = cov.dim
    z = sample_noise(cov, _chunk_rng(seed, _TYPE2, i, j, k), size=size)
    ci = ctx.conv_codebook.codewords[i - 1]
    cj = ctx.conv_codebook.codewords[j - 1]
    t = decoding_measure(ci + z, cj, cov)
    # whitened coordinates: z_w = Sigma^{-1/2} z, d = Sigma^{-1/2}(c_i - c_j)
    scale = 1.0 / np.sqrt(cov.spectrum)
    zq = (z @ cov.basis) * scale
    dq = ((ci - cj) @ cov.basis) * scale
    u = (np.einsum("ij,ij->i", zq, zq) + dq @ dq) / nb
    v = 2.0 * (zq @ dq) / nb
    w = u + v
    dl = ctx.delta_n
    return (
        int(np.count_nonzero(np.abs(t) <= dl)),
        int(np.count_nonzero(np.abs(v) > dl)),
        int(np.count_nonzero(u - 1.0 <= 2.0 * dl)),
        int(np.count_nonzero(w - 1.0 <= dl)),
    )


def _type2_counts(i, j, trials, ctx, seed, n_jobs):
    if i == j:
        raise SameIndex("type-II estimation needs i != j")
    _check(i, ctx.M)
    _check(j, ctx.M)
    if trials < 100:
        raise ValueError("at least 100 trials are required")
    counts = _run(_type2_chunk, [(ctx, i, j, seed, k, s) for k, s in _chunks(trials)], n_jobs)
    return [sum(c[q] for c in counts) for q in range(4)]


def estimate_type2(i: int, j: int, trials: int, ctx: ExperimentContext, seed: int, n_jobs: int = 1) -> ErrorEstimate:
    """Fraction of trials where ``i`` is sent and the test for ``j`` accepts."""
    return ErrorEstimate(trials, _type2_counts(i, j, trials, ctx, seed, n_jobs)[0])


@dataclass(frozen=True)
class PairEventReport:
    i: int
    j: int
    type2: ErrorEstimate
    e0: ErrorEstimate
    e1: ErrorEstimate
    e2: ErrorEstimate
    zeta0: float
    zeta1: float

    @property
    def e0_ok(self) -> bool:
        return self.zeta0 > 1 or self.e0.rate <= self.zeta0 + 3 * self.e0.half_width

    @property
    def e1_ok(self) -> bool:
        return self.zeta1 > 1 or self.e1.rate <= self.zeta1 + 3 * self.e1.half_width

    @property
    def chain_ok(self) -> bool:
        slack = 2 * (self.e0.half_width + self.e1.half_width)
        return self.e2.rate <= self.e0.rate + self.e1.rate + slack

    @property
    def type2_ok(self) -> bool:
        bound = self.zeta0 + self.zeta1
        return bound > 1 or self.type2.rate <= bound + 3 * self.type2.half_width

    @property
    def ok(self) -> bool:
        return self.e0_ok and self.e1_ok and self.chain_ok and self.type2_ok


def verify_event_bounds(pairs, trials: int, ctx: ExperimentContext, seed: int, n_jobs: int = 1) -> list[PairEventReport]:
    """Measure the events E0, E1, E2 and the type-II rate for each pair."""
    bounds = ctx.bounds
    out = []
    for i, j in pairs:
        acc, e0, e1, e2 = _type2_counts(i, j, trials, ctx, seed, n_jobs)
        out.append(
            PairEventReport(
                i=i,
                j=j,
                type2=ErrorEstimate(trials, acc),
                e0=ErrorEstimate(trials, e0),
                e1=ErrorEstimate(trials, e1),
                e2=ErrorEstimate(trials, e2),
                zeta0=bounds.zeta0,
                zeta1=bounds.zeta1,
            )
        )
    return out


def select_pairs(ctx: ExperimentContext, policy: str = "min-distance", seed: int = 0, limit: int = 4) -> list[tuple[int, int]]:
    """Pick ordered message pairs (1-based) for type-II experiments.

    ``"min-distance"`` returns up to ``limit`` pairs at the smallest convolved
    distance; ``"random:N"`` draws ``N`` distinct ordered pairs.
    """
    m = ctx.M
    if m < 2:
        raise ValueError("type-II experiments need at least two codewords")
    if policy.startswith("min-distance"):
        if ":" in policy:
            limit = int(policy.split(":", 1)[1])
        x = ctx.conv_codebook.codewords
        sq = np.einsum("ij,ij->i", x, x)
        d2 = sq[:, None] + sq[None, :] - 2 * x @ x.T
        d2[np.tril_indices(m)] = np.inf
        lo = d2.min()
        ii, jj = np.nonzero(d2 <= lo + 1e-9 * max(1.0, float(sq.max())))
        order = np.lexsort((jj, ii))
        return [(int(ii[k]) + 1, int(jj[k]) + 1) for k in order[:limit]]
    if policy.startswith("random:"):
        count = int(policy.split(":", 1)[1])
        rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(99,)))
        pairs = []
        while len(pairs) < count:
            i, j = rng.choice(m, size=2, replace=False)
            pairs.append((int(i) + 1, int(j) + 1))
        return pairs
    raise ValueError(f"unknown pair-selection policy {policy!r}")


ERROR_CSV_FIELDS = [
    "n", "kappa", "mu", "K", "trials",
    "p1_hat", "p1_ci_low", "p1_ci_high", "eta0",
    "p2_hat", "p2_ci_low", "p2_ci_high", "zeta0", "zeta1",
    "seed",
]


def error_row(ctx: ExperimentContext, p1: ErrorEstimate, report: PairEventReport, seed: int) -> dict:
    p = ctx.params
    b = ctx.bounds
    return {
        "n": p.n, "kappa": p.kappa, "mu": p.mu, "K": p.K, "trials": p1.trials,
        "p1_hat": p1.rate, "p1_ci_low": p1.ci_low, "p1_ci_high": p1.ci_high, "eta0": b.eta0,
        "p2_hat": report.type2.rate, "p2_ci_low": report.type2.ci_low, "p2_ci_high": report.type2.ci_high,
        "zeta0": b.zeta0, "zeta1": b.zeta1,
        "seed": seed,
    }


def write_error_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=ERROR_CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in r.items()})
