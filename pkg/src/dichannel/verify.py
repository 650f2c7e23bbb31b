"""Numerical verification suites for the structural lemmas behind the scheme.

Each suite returns a :class:`SuiteResult` made of named checks. Suites are
deterministic for a given seed and are exposed through ``dichannel verify``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import ChannelParams, convolve, make_cir, sample_noise, synthesize_covariance
from .codec import event_decomposition
from .exceptions import SpectralNull, UnknownSuite, ZeroEndpointTap
from .spectral import (
    chi2_cdf,
    ks_critical_value,
    ks_statistic,
    mahalanobis_sq,
    matrix_power,
    rayleigh_quotient,
    singular_values,
    whiten,
)

__all__ = ["Check", "SuiteResult", "SUITES", "run_suite", "run_all", "random_cir", "random_spd_family"]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteResult:
    suite: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "checks": [asdict(c) for c in self.checks]}


def random_cir(rng: np.random.Generator, k_max: int = 8):
    """Random CIR with 1..k_max taps that passes the spectral-null check."""
    while True:
        K = int(rng.integers(1, k_max + 1))
        taps = rng.standard_normal(K)
        try:
            return make_cir(taps)
        except (SpectralNull, ZeroEndpointTap):
            continue


def random_spd_family(rng: np.random.Generator, count: int, max_dim: int = 64):
    """Covariances drawn across admissible (n, mu) with random window constants."""
    out = []
    for _ in range(count):
        n = int(rng.integers(2, max_dim + 1))
        mu = float(rng.uniform(0.0, 0.49))
        cmin = float(rng.uniform(0.2, 2.0))
        params = ChannelParams(n=n, mu=mu, c_sigma_min=cmin, c_sigma_max=cmin * float(rng.uniform(1.0, 4.0)))
        out.append((params, synthesize_covariance(params, seed=int(rng.integers(2**32)))))
    return out


def suite_lemma1(seed: int = 0, n_cirs: int = 50, n_pairs: int = 500) -> SuiteResult:
    """Convolution never shrinks a difference by more than the spectral floor."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("lemma1")
    violations = 0
    worst = np.inf
    for _ in range(n_cirs):
        cir = random_cir(rng)
        n = int(rng.integers(1, 129))
        p_max = 1.0
        a = rng.uniform(-p_max, p_max, size=(n_pairs, n))
        b = rng.uniform(-p_max, p_max, size=(n_pairs, n))
        lhs = np.linalg.norm(convolve(a, cir) - convolve(b, cir), axis=1)
        rhs = cir.h_min * np.linalg.norm(a - b, axis=1)
        violations += int(np.count_nonzero(lhs < rhs - 1e-9))
        worst = min(worst, float(np.min(lhs - rhs)))
    res.add("convolved distance >= H_min * distance", violations == 0,
            f"{violations} violations over {n_cirs * n_pairs} pairs; min margin {worst:.3e}")
    return res


def suite_lemma2(seed: int = 0, dims=(16, 64, 256), draws: int = 10_000) -> SuiteResult:
    """Mahalanobis distance of Sigma-colored noise is chi-squared with n_bar dof."""
    res = SuiteResult("lemma2")
    for nb in dims:
        params = ChannelParams(n=nb, mu=0.3, c_sigma_min=0.5, c_sigma_max=2.0)
        cov = synthesize_covariance(params, seed=seed + nb)
        z = sample_noise(cov, np.random.default_rng([seed, nb]), size=draws)
        d2 = mahalanobis_sq(z, np.zeros(nb), cov)
        mean, var = float(d2.mean()), float(d2.var(ddof=1))
        res.add(f"mean n_bar={nb}", abs(mean - nb) <= 0.01 * nb, f"{mean:.3f} vs {nb}")
        res.add(f"variance n_bar={nb}", abs(var - 2 * nb) <= 0.05 * 2 * nb, f"{var:.3f} vs {2 * nb}")
        ks = ks_statistic(d2, lambda x: chi2_cdf(x, nb))
        crit = ks_critical_value(draws, 0.01)
        res.add(f"KS n_bar={nb}", ks < crit, f"D={ks:.5f} < {crit:.5f}")
    return res


def suite_lemma3(seed: int = 0, n_matrices: int = 100, n_vectors: int = 1000) -> SuiteResult:
    """Rayleigh quotient never exceeds the top eigenvalue; equality at its eigenvector."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("lemma3")
    worst = -np.inf
    eq_err = 0.0
    for params, cov in random_spd_family(rng, n_matrices, max_dim=32):
        a = cov.sigma
        lam_max = float(np.linalg.eigvalsh(a)[-1])
        xs = rng.standard_normal((n_vectors, cov.dim))
        r = np.einsum("ij,jk,ik->i", xs, a, xs) / np.einsum("ij,ij->i", xs, xs)
        worst = max(worst, float(np.max(r - lam_max)))
        top = cov.basis[:, 0]
        eq_err = max(eq_err, abs(rayleigh_quotient(a, top) - lam_max) / lam_max)
    res.add("R(x) <= lambda_max + 1e-9", worst <= 1e-9, f"max R - lambda_max = {worst:.3e}")
    res.add("R(top eigenvector) = lambda_max", eq_err <= 1e-8, f"rel err {eq_err:.3e}")
    return res


def suite_lemma4(seed: int = 0, n_matrices: int = 100) -> SuiteResult:
    """Singular values of Sigma^{-1} are the reversed reciprocals of those of Sigma."""
    rng = np.random.default_rng(seed + 4)
    res = SuiteResult("lemma4")
    worst = 0.0
    sandwich = True
    for _, cov in random_spd_family(rng, n_matrices, max_dim=64):
        s = singular_values(cov.sigma)
        s_inv = singular_values(matrix_power(cov, -1.0))
        expect = 1.0 / s[::-1]
        worst = max(worst, float(np.max(np.abs(s_inv - expect) / expect)))
        tol = 1e-8 * s_inv.max()
        sandwich &= bool(np.all(s_inv >= 1 / s[0] - tol) and np.all(s_inv <= 1 / s[-1] + tol))
    res.add("sigma_t(inv) = 1/sigma_(n-t+1)", worst <= 1e-8, f"max rel err {worst:.3e}")
    res.add("1/sigma_1 <= sigma_t(inv) <= 1/sigma_n", sandwich)
    return res


def lemma6_window(params: ChannelParams, p: float) -> tuple[float, float]:
    nb, mu = params.n_bar, params.mu
    cmin, cmax = params.c_sigma_min, params.c_sigma_max
    if p > 0:
        return cmin**p * nb ** (-p * mu), cmax**p * nb ** (p * mu / 2)
    q = abs(p)
    return cmax ** (-q) * nb ** (-q * mu / 2), cmin ** (-q) * nb ** (q * mu)


def suite_lemma6(seed: int = 0, n_matrices: int = 60) -> SuiteResult:
    """Powers of an admissible covariance keep their spectrum in the power windows."""
    rng = np.random.default_rng(seed + 6)
    res = SuiteResult("lemma6")
    family = random_spd_family(rng, n_matrices, max_dim=64)
    for p in (0.5, -0.5, -1.0):
        ok = True
        worst = 0.0
        for params, cov in family:
            lo, hi = lemma6_window(params, p)
            s = singular_values(matrix_power(cov, p))
            ok &= bool(s.min() >= lo * (1 - 1e-8) and s.max() <= hi * (1 + 1e-8))
            worst = max(worst, float(np.max(np.abs(np.sort(s) - np.sort(cov.spectrum**p)) / np.sort(cov.spectrum**p))))
        res.add(f"window p={p}", ok)
        res.add(f"spectrum of Sigma^{p} = sigma^{p}", worst <= 1e-8, f"max rel err {worst:.3e}")
    return res


def suite_whitening(seed: int = 0, dim: int = 64, draws: int = 100_000) -> SuiteResult:
    """Whitened colored noise has identity covariance."""
    res = SuiteResult("whitening")
    params = ChannelParams(n=dim, mu=0.4, c_sigma_min=0.5, c_sigma_max=2.0)
    cov = synthesize_covariance(params, seed=seed + 17)
    z = sample_noise(cov, np.random.default_rng([seed, 17]), size=draws)
    zw = whiten(cov, z)
    emp = zw.T @ zw / draws
    dev = float(np.max(np.abs(emp - np.eye(dim))))
    res.add("whitened covariance within 0.05 of I", dev <= 0.05, f"max |C - I| = {dev:.4f}")
    return res


def suite_decomposition(seed: int = 0) -> SuiteResult:
    """Spectral reconstruction, power inverses, and the U/V/W split of the decoding statistic."""
    rng = np.random.default_rng(seed + 9)
    res = SuiteResult("decomposition")
    recon = orth = inv_pair = 0.0
    for _, cov in random_spd_family(rng, 20, max_dim=64):
        s = cov.sigma
        recon = max(recon, float(np.linalg.norm((cov.basis * cov.spectrum) @ cov.basis.T - s) / np.linalg.norm(s)))
        orth = max(orth, float(np.max(np.abs(cov.basis.T @ cov.basis - np.eye(cov.dim)))))
        for p in (0.5, 1.0):
            prod = matrix_power(cov, p) @ matrix_power(cov, -p)
            inv_pair = max(inv_pair, float(np.max(np.abs(prod - np.eye(cov.dim)))))
    res.add("reconstruction <= 1e-10", recon <= 1e-10, f"{recon:.3e}")
    res.add("orthonormal basis <= 1e-10", orth <= 1e-10, f"{orth:.3e}")
    res.add("Sigma^p Sigma^-p = I <= 1e-8", inv_pair <= 1e-8, f"{inv_pair:.3e}")

    params = ChannelParams(n=48, mu=0.3, c_sigma_min=0.5, c_sigma_max=2.0)
    cov = synthesize_covariance(params, seed=seed + 10)
    nb = cov.dim
    worst = 0.0
    for _ in range(200):
        z = sample_noise(cov, rng)
        ci, cj = rng.uniform(-2, 2, size=(2, nb))
        ev = event_decomposition(z, ci, cj, cov)
        direct = float(np.sum(whiten(cov, z + ci - cj) ** 2)) / nb
        worst = max(worst, abs(ev.w - direct) / direct)
    res.add("W = U + V matches direct norm", worst <= 1e-9, f"max rel err {worst:.3e}")

    diff = rng.uniform(-1, 1, size=nb)
    z = sample_noise(cov, np.random.default_rng([seed, 11]), size=100_000)
    cross = z @ (cov.inv @ diff)
    target = float(diff @ cov.inv @ diff)
    rel = abs(float(cross.var(ddof=1)) - target) / target
    res.add("cross-term variance = d^T Sigma^-1 d (5%)", rel <= 0.05, f"rel err {rel:.4f}")
    return res


SUITES = {
    "lemma1": suite_lemma1,
    "lemma2": suite_lemma2,
    "lemma3": suite_lemma3,
    "lemma4": suite_lemma4,
    "lemma6": suite_lemma6,
    "whitening": suite_whitening,
    "decomposition": suite_decomposition,
}


def run_suite(name: str, seed: int = 0) -> list[SuiteResult]:
    if name == "all":
        return run_all(seed)
    try:
        fn = SUITES[name]
    except KeyError:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'") from None
    return [fn(seed=seed)]


def run_all(seed: int = 0) -> list[SuiteResult]:
    return [fn(seed=seed) for fn in SUITES.values()]
