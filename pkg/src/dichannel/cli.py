"""Command-line front end.

Subcommands::

    dichannel simulate --config run.cfg [--seed S] [--trials N] [--out DIR]
    dichannel verify   --suite NAME|all [--format json] [--out DIR]
    dichannel bounds   [--config grid.cfg] [--format csv|json] [--out DIR]
    dichannel codebook build --config run.cfg [--out DIR] [--format csv|bin]
    dichannel codebook inspect PATH

Exit codes: 0 success, 1 a checked criterion failed, 2 usage or configuration
error, 3 I/O failure. ``DICHANNEL_OUT`` sets the default output directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import sweep, write_sweep_csv
from .channel import (
    ChannelParams,
    identity_covariance,
    make_cir,
    save_json,
    synthesize_covariance,
)
from .codebook import (
    MAX_CERTIFY,
    certify_min_distance,
    load_codebook,
    save_codebook,
)
from .exceptions import ConfigParse, DIChannelError, InadmissibleRegion, IoFailure, UnknownSuite
from .montecarlo import (
    build_context,
    error_row,
    estimate_type1_detailed,
    select_pairs,
    verify_event_bounds,
    write_error_csv,
)
from .verify import run_suite

log = logging.getLogger("dichannel")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
OUT_ENV = "DICHANNEL_OUT"


# --- configuration -------------------------------------------------------------
#
# One "key = value" per line, '#' starts a comment. Unknown keys are errors.

@dataclass
class ExperimentConfig:
    n: int = 64
    kappa: float = 0.0
    mu: float = 0.0
    p_max: float = 1.0
    a: float = 1.0
    b: float = 0.01
    c_sigma_min: float = 1.0
    c_sigma_max: float = 1.0
    taps: str = "identity"
    covariance: str = "identity"
    covariance_seed: int = 1
    m_cap: int = 16
    trials: int = 10_000
    pairs: str = "min-distance"
    message: int = 1
    n_jobs: int = 1
    output: str = ""
    seed: int = 0

    def channel_params(self) -> ChannelParams:
        return ChannelParams(
            n=self.n, kappa=self.kappa, mu=self.mu, p_max=self.p_max, a=self.a, b=self.b,
            c_sigma_min=self.c_sigma_min, c_sigma_max=self.c_sigma_max,
        )

    def validate(self) -> None:
        try:
            self.channel_params()
        except ValueError as exc:
            raise ConfigParse(str(exc)) from None
        if self.trials < 100:
            raise ConfigParse("trials must be at least 100")
        if self.m_cap < 2:
            raise ConfigParse("m_cap must be at least 2 for type-II experiments")
        if not (self.pairs.startswith("min-distance") or self.pairs.startswith("random:")):
            raise ConfigParse(f"unknown pair policy {self.pairs!r}")


def _coerce(name: str, raw: str, typ):
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigParse(f"{name}: cannot parse {raw!r} as {typ.__name__}") from None


def parse_config_text(text: str, cls=ExperimentConfig):
    types = {f: type(v) for f, v in asdict(cls()).items()}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParse(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigParse(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigParse(f"line {lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, raw, types[key])
    return cls(**values)


def load_config(path, cls=ExperimentConfig):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, cls)


def resolve_taps(spec: str, K: int) -> list[float]:
    """``identity`` -> [1]; ``geometric:r`` -> r^k for k < K; else a comma list."""
    spec = spec.strip()
    if spec == "identity":
        taps = [1.0]
    elif spec.startswith("geometric"):
        ratio = float(spec.split(":", 1)[1]) if ":" in spec else 0.3
        taps = [ratio**k for k in range(K)]
    else:
        try:
            taps = [float(t) for t in spec.replace(" ", "").split(",") if t]
        except ValueError:
            raise ConfigParse(f"taps: cannot parse {spec!r}") from None
    if len(taps) != K:
        raise ConfigParse(f"taps: {len(taps)} taps given but K = ceil(n^kappa) = {K}")
    return taps


def _output_dir(cli_value, cfg_value) -> Path:
    out = cli_value or cfg_value or os.environ.get(OUT_ENV) or "dichannel-out"
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise IoFailure(f"output directory {path} is not writable: {exc}") from None
    return path


# --- subcommands -------------------------------------------------------------


def _build_experiment(cfg: ExperimentConfig):
    params = cfg.channel_params()
    try:
        cir = make_cir(resolve_taps(cfg.taps, params.K))
    except DIChannelError as exc:
        raise ConfigParse(f"taps: {exc}") from None
    if cfg.covariance == "identity":
        cov = identity_covariance(params.n_bar)
    elif cfg.covariance == "synth":
        try:
            cov = synthesize_covariance(params, cfg.covariance_seed)
        except ValueError as exc:
            raise ConfigParse(f"covariance: {exc}") from None
    else:
        raise ConfigParse(f"covariance must be 'identity' or 'synth', got {cfg.covariance!r}")
    try:
        ctx = build_context(params, cir, cov, cfg.m_cap)
    except DIChannelError as exc:
        raise ConfigParse(f"codebook: {exc}") from None
    return ctx


def run_simulate(cfg: ExperimentConfig, out_dir: Path) -> tuple[int, dict]:
    cfg.validate()
    ctx = _build_experiment(cfg)
    params, bounds = ctx.params, ctx.bounds
    if not ctx.cov.satisfies_window(params, rtol=1e-12):
        log.warning("covariance spectrum lies outside the configured window")

    try:
        save_codebook(ctx.codebook, out_dir / "codebook.bin")
        save_json(ctx.cir, out_dir / "cir.json")
        save_json(ctx.cov, out_dir / "covariance.json")
    except OSError as exc:
        raise IoFailure(str(exc)) from None

    if not 1 <= cfg.message <= ctx.M:
        raise ConfigParse(f"message {cfg.message} outside 1..{ctx.M}")
    pairs = select_pairs(ctx, cfg.pairs, seed=cfg.seed)
    t1_cache = {}
    rows, failures, pair_reports = [], [], []
    for i in sorted({cfg.message} | {p[0] for p in pairs}):
        t1_cache[i] = estimate_type1_detailed(i, cfg.trials, ctx, cfg.seed, n_jobs=cfg.n_jobs)
    reports = verify_event_bounds(pairs, cfg.trials, ctx, cfg.seed, n_jobs=cfg.n_jobs)
    for rep in reports:
        rows.append(error_row(ctx, t1_cache[rep.i].two_sided, rep, cfg.seed))
        checks = {
            "type2_bound": rep.type2_ok,
            "e0_bound": rep.e0_ok,
            "e1_bound": rep.e1_ok,
            "union_chain": rep.chain_ok,
        }
        for name, ok in checks.items():
            if not ok:
                failures.append(f"pair ({rep.i},{rep.j}): {name}")
        pair_reports.append(
            {
                "i": rep.i, "j": rep.j,
                "p2_hat": rep.type2.rate, "p_e0": rep.e0.rate, "p_e1": rep.e1.rate, "p_e2": rep.e2.rate,
                "checks": checks,
            }
        )
    type1 = {}
    for i, res in t1_cache.items():
        est = res.two_sided
        ok = bounds.type1_vacuous or est.rate <= bounds.eta0 + 3 * est.half_width
        if not ok:
            failures.append(f"message {i}: type1_bound")
        type1[str(i)] = {
            "p1_hat": est.rate, "p1_ci": list(est.ci), "p1_one_sided": res.one_sided.rate, "type1_bound": ok,
        }
    try:
        write_error_csv(rows, out_dir / "errors.csv")
    except OSError as exc:
        raise IoFailure(str(exc)) from None

    summary = {
        "version": __version__,
        "config": asdict(cfg),
        "derived": {
            "K": params.K, "n_bar": params.n_bar, "M": ctx.M,
            "h_min": ctx.cir.h_min, "l_bound": ctx.cir.l_bound,
            "epsilon_n": ctx.packing.epsilon_n, "r0": ctx.packing.r0, "delta_n": ctx.delta_n,
            "sigma_min": ctx.cov.sigma_min, "sigma_max": ctx.cov.sigma_max,
        },
        "bounds": {
            "eta0": bounds.eta0, "zeta0": bounds.zeta0, "zeta1": bounds.zeta1,
            "type1_vacuous": bounds.type1_vacuous, "type2_vacuous": bounds.type2_vacuous,
        },
        "type1": type1,
        "pairs": pair_reports,
        "failures": failures,
        "passed": not failures,
    }
    try:
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    return (EXIT_OK if not failures else EXIT_FAIL), summary


@dataclass
class BoundsConfig:
    kappa_values: str = ""
    mu_values: str = ""
    n_values: str = "1024"
    b: float = 0.01
    a: float = 1.0
    p_max: float = 1.0
    h_min: float = 1.0


def _floats(s: str) -> list[float]:
    try:
        return [float(v) for v in s.replace(" ", "").split(",") if v]
    except ValueError:
        raise ConfigParse(f"cannot parse number list {s!r}") from None


def bounds_rows(cfg: BoundsConfig) -> list[dict]:
    default = [round(0.24 * k / 9, 12) for k in range(10)]
    kappas = _floats(cfg.kappa_values) if cfg.kappa_values else default
    mus = _floats(cfg.mu_values) if cfg.mu_values else default
    ns = [int(v) for v in _floats(cfg.n_values)]
    if any(n < 2 for n in ns):
        raise ConfigParse("n_values must be integers >= 2")
    grid = [(k, m) for k in kappas for m in mus]
    template = ChannelParams(n=2, a=cfg.a, b=cfg.b, p_max=cfg.p_max)
    return sweep(grid, ns, template, h_min=cfg.h_min)


def _emit(text: str, out_dir: Path | None, name: str):
    if out_dir is None:
        sys.stdout.write(text)
        return
    try:
        (out_dir / name).write_text(text)
    except OSError as exc:
        raise IoFailure(str(exc)) from None


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    cfg.validate()
    out_dir = _output_dir(args.out, cfg.output)
    code, summary = run_simulate(cfg, out_dir)
    b = summary["bounds"]
    print(f"n={cfg.n} K={summary['derived']['K']} M={summary['derived']['M']} delta_n={summary['derived']['delta_n']:.4g}")
    print(f"eta0={b['eta0']:.4g} zeta0={b['zeta0']:.4g} zeta1={b['zeta1']:.4g}")
    for i, t in summary["type1"].items():
        print(f"type I  message {i}: p1={t['p1_hat']:.4g}  [{'PASS' if t['type1_bound'] else 'FAIL'}]")
    for p in summary["pairs"]:
        status = "PASS" if all(p["checks"].values()) else "FAIL"
        print(f"type II pair ({p['i']},{p['j']}): p2={p['p2_hat']:.4g} E0={p['p_e0']:.4g} "
              f"E1={p['p_e1']:.4g} E2={p['p_e2']:.4g}  [{status}]")
    print(f"results written to {out_dir}")
    if summary["failures"]:
        print(json.dumps({"failures": summary["failures"]}), file=sys.stderr)
    return code


def cmd_verify(args) -> int:
    results = run_suite(args.suite, seed=args.seed or 0)
    report = {"suites": [r.to_dict() for r in results], "passed": all(r.passed for r in results)}
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        for r in results:
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.suite}")
            for c in r.checks:
                print(f"    {'ok ' if c.passed else 'BAD'} {c.name}  {c.detail}")
    if args.out:
        _emit(json.dumps(report, indent=2), _output_dir(args.out, None), "verify.json")
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_bounds(args) -> int:
    cfg = load_config(args.config, BoundsConfig) if args.config else BoundsConfig()
    rows = bounds_rows(cfg)
    out_dir = _output_dir(args.out, None) if args.out else None
    if args.format == "json":
        _emit(json.dumps(rows, indent=1) + "\n", out_dir, "bounds.json")
    else:
        import io

        buf = io.StringIO()
        write_sweep_csv(rows, buf)
        _emit(buf.getvalue(), out_dir, "bounds.csv")
    return EXIT_OK


def cmd_codebook(args) -> int:
    if args.action == "build":
        if not args.config:
            raise ConfigParse("codebook build needs --config")
        cfg = load_config(args.config)
        cfg.validate()
        ctx = _build_experiment(cfg)
        out_dir = _output_dir(args.out, cfg.output)
        fmt = args.format if args.format in ("csv", "bin") else "bin"
        path = out_dir / f"codebook.{fmt}"
        try:
            save_codebook(ctx.codebook, path, fmt)
        except OSError as exc:
            raise IoFailure(str(exc)) from None
        print(f"wrote {ctx.M} codewords of length {ctx.params.n} (r0={ctx.packing.r0:.6g}) to {path}")
        return EXIT_OK
    if not args.path:
        raise ConfigParse("codebook inspect needs a PATH")
    try:
        cb = load_codebook(args.path)
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    info = {"n": cb.n, "M": cb.M, "p_max": cb.p_max, "r0": cb.r0,
            "max_abs": float(np.abs(cb.codewords).max()) if cb.M else 0.0}
    if 2 <= cb.M <= MAX_CERTIFY:
        info["min_distance"] = certify_min_distance(cb)
    print(json.dumps(info, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dichannel", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the end-to-end Monte-Carlo experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run a numerical lemma suite")
    v.add_argument("--suite", required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bounds", help="tabulate capacity bounds over a (kappa, mu) grid")
    b.add_argument("--config")
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("codebook", help="build or inspect a grid codebook")
    c.add_argument("action", choices=("build", "inspect"))
    c.add_argument("path", nargs="?")
    c.add_argument("--config")
    c.add_argument("--out")
    c.add_argument("--format", choices=("csv", "bin"), default="bin")
    c.set_defaults(func=cmd_codebook)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigParse, UnknownSuite, InadmissibleRegion) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        print(json.dumps({"error": type(exc).__name__, "message": str(msg)}), file=sys.stderr)
        return EXIT_USAGE
    except IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps({"error": "IoFailure", "message": str(exc)}), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
