"""Acceptance criteria 1-11.

Each test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary and when the module is run as a script.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from dichannel import (
    ChannelParams,
    build_context,
    capacity_bounds,
    decoding_measure,
    estimate_type1,
    make_cir,
    mahalanobis_sq,
    sample_noise,
    synthesize_covariance,
    sweep,
    verify_event_bounds,
)
from dichannel.cli import load_config, main
from dichannel.cli import _build_experiment
from dichannel.montecarlo import select_pairs
from dichannel.spectral import chi2_cdf, ks_critical_value, ks_statistic
from dichannel.verify import suite_lemma1, suite_lemma3, suite_lemma4, suite_lemma6, suite_whitening

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
RESULTS: list[str] = []


def record(number, title, ok, detail):
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_c01_chi_squared_law():
    details, ok = [], True
    for nb in (16, 64, 256):
        t0 = time.perf_counter()
        params = ChannelParams(n=nb, mu=0.3, c_sigma_min=0.5, c_sigma_max=2.0)
        cov = synthesize_covariance(params, seed=100 + nb)
        z = sample_noise(cov, seed=nb, size=10_000)
        d2 = mahalanobis_sq(z, np.zeros(nb), cov)
        mean, var = d2.mean(), d2.var(ddof=1)
        ks = ks_statistic(d2, lambda x: chi2_cdf(x, nb))
        crit = ks_critical_value(10_000, 0.01)
        elapsed = time.perf_counter() - t0
        good = abs(mean - nb) <= 0.01 * nb and abs(var - 2 * nb) <= 0.05 * 2 * nb and ks < crit and elapsed < 30
        ok &= good
        details.append(f"n_bar={nb} mean={mean:.2f} var={var:.1f} KS={ks:.4f}<{crit:.4f} {elapsed:.1f}s")
    record(1, "chi-squared law", ok, "; ".join(details))


def test_c02_decoding_measure_moments():
    nb = 128
    cov = synthesize_covariance(ChannelParams(n=nb, mu=0.3, c_sigma_min=0.5, c_sigma_max=2.0), seed=2)
    c = np.random.default_rng(3).uniform(-1, 1, nb)
    z = sample_noise(cov, seed=4, size=100_000)
    t = decoding_measure(c + z, c, cov)
    mean, var = t.mean(), t.var(ddof=1)
    ok = abs(mean) <= 0.01 and abs(var - 2 / nb) <= 0.05 * 2 / nb
    record(2, "decoding-measure moments", ok, f"mean={mean:+.5f} var={var:.6f} target {2 / nb:.6f}")


def test_c03_type1_bound():
    t0 = time.perf_counter()
    ctx = _build_experiment(load_config(CONFIGS / "colored_isi.cfg"))
    eta0 = ctx.bounds.eta0
    assert eta0 <= 0.2
    est = estimate_type1(1, 20_000, ctx, seed=31)
    elapsed = time.perf_counter() - t0
    ok = est.rate <= eta0 + 3 * est.half_width and elapsed < 120
    record(3, "type-I bound", ok,
           f"K={ctx.params.K} p1={est.rate:.5f} eta0={eta0:.4f} hw={est.half_width:.5f} trials={est.trials} {elapsed:.1f}s")


def test_c04_type2_chain():
    ctx = _build_experiment(load_config(CONFIGS / "colored_nonvacuous.cfg"))
    bound = ctx.bounds.type2
    pairs = select_pairs(ctx, "min-distance")
    reports = verify_event_bounds(pairs, 20_000, ctx, seed=41)
    ok = bool(reports) and all(r.chain_ok for r in reports)
    if bound <= 1:
        ok &= all(r.type2.rate <= bound + 3 * r.type2.half_width for r in reports)
    worst = max(reports, key=lambda r: r.e2.rate - r.e0.rate - r.e1.rate)
    record(4, "type-II chain", ok,
           f"{len(reports)} min-distance pairs; zeta0+zeta1={bound:.4f}; max p2={max(r.type2.rate for r in reports):.5f}; "
           f"worst pair ({worst.i},{worst.j}) E2={worst.e2.rate:.4f} E0={worst.e0.rate:.4f} E1={worst.e1.rate:.4f}")


def test_c05_convolved_min_distance():
    res = suite_lemma1(seed=5)
    record(5, "convolved distance floor", res.passed, res.checks[0].detail)


def test_c06_rayleigh_and_inverse_spectrum():
    r3, r4 = suite_lemma3(seed=6), suite_lemma4(seed=6)
    detail = "; ".join(f"{c.name} {c.detail}".strip() for c in r3.checks + r4.checks)
    record(6, "Rayleigh and inverse spectrum", r3.passed and r4.passed, detail)


def test_c07_power_windows():
    res = suite_lemma6(seed=7)
    detail = ", ".join(f"{c.name}:{'ok' if c.passed else 'bad'}" for c in res.checks)
    record(7, "power spectrum windows", res.passed, detail)


def test_c08_capacity_values():
    cb = capacity_bounds(0.0, 0.0)
    ok = (cb.lower, cb.upper) == (0.25, 1.0)
    ordered = 0
    for k in np.linspace(0, 0.5, 100, endpoint=False):
        for m in np.linspace(0, 0.5 - k, 100, endpoint=False):
            b = capacity_bounds(float(k), float(m))
            ok &= b.lower <= b.upper
            ordered += 1
    for k in np.linspace(0, 0.499, 50):
        b = capacity_bounds(float(k), 0.0)
        ok &= abs(b.lower - (1 - 2 * k) / 4) < 1e-15 and abs(b.upper - (1 + k)) < 1e-15
    record(8, "capacity bound values", ok, f"(0,0)->({cb.lower}, {cb.upper}); {ordered} grid points ordered")


def test_c09_finite_n_trend():
    t0 = time.perf_counter()
    rows = sweep([(0.0, 0.0)], [2**k for k in range(8, 15)])
    elapsed = time.perf_counter() - t0
    lo = np.array([r["lb_finite_norm"] for r in rows])
    hi = np.array([r["ub_finite_norm"] for r in rows])
    gap = np.abs(0.25 - lo)
    lower_ok = bool(np.all(np.diff(gap) <= 0.02) and gap[-1] < gap[0])
    upper_ok = bool(np.all(np.abs(hi - 1.0) <= 0.1))
    ok = lower_ok and upper_ok and elapsed < 1
    record(9, "finite-n trend", ok,
           f"lower {lo[0]:+.4f}->{lo[-1]:+.4f} (limit 0.25), upper {hi[0]:.4f}->{hi[-1]:.4f} (limit 1), {elapsed * 1e3:.0f} ms")


def test_c10_whitening():
    res = suite_whitening(seed=10)
    record(10, "whitening", res.passed, res.checks[0].detail)


def test_c11_determinism(tmp_path):
    cfg = CONFIGS / "colored_isi.cfg"
    codes = [main(["simulate", "--config", str(cfg), "--trials", "2000", "--out", str(tmp_path / d)]) for d in "ab"]
    a, b = ((tmp_path / d / "errors.csv").read_bytes() for d in "ab")
    ok = a == b and len(a) > 0
    record(11, "determinism", ok, f"exit codes {codes}, errors.csv {len(a)} bytes, identical={a == b}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
