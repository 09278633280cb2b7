"""Command-line front end: run | sweep | validate | kernels | selftest.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
Output files are named by the config hash so re-runs overwrite their own
artifacts; identical config+seed produces byte-identical CSVs regardless of
--threads (the flag is a coordinator hint and never changes the compute path).
"""

from __future__ import annotations

import argparse
import importlib.metadata
import importlib.resources
import math
import os
import sys
import time

import numpy as np

from .config import config_hash, parse_config
from .errors import ConfigurationError, IoError, NumericalError, QNoiseError
from .scenarios import RunSummary, ScenarioConfig, monte_carlo_validate, run_scenario

TOLERANCE_PROFILES = {
    "default": {"jitter_cap_relative": 1e-6, "quadrature_epsabs": 1e-10},
    "strict": {"jitter_cap_relative": 1e-8, "quadrature_epsabs": 1e-12},
}


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_text(path, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def emit_outputs(summary: RunSummary, out_dir, tag: str, manifest_extra=None) -> list[str]:
    """Write trace CSVs, sweep CSV, summary table, and the run manifest."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out_dir}: {exc}") from exc
    written = []

    for label, trace, q0_ref in summary.traces:
        t = trace.grid.times()
        total = trace.total_sigma
        lines = ["t_s,sigma0_sq_m2,dst_sq_m2,dnst_sq_m2,sigma_total_m,sigma_total_over_q0"]
        for i in range(len(t)):
            lines.append(",".join(_fmt(v) for v in (
                t[i], trace.sigma0_sq[i], trace.delta_sigma_st_sq[i],
                trace.delta_sigma_nst_sq[i], total[i], total[i] / q0_ref)))
        path = os.path.join(out_dir, f"{tag}_trace_{label}.csv")
        _write_text(path, "\n".join(lines) + "\n")
        written.append(path)

    if summary.sweep_rows:
        lines = [summary.sweep_header]
        for row in summary.sweep_rows:
            lines.append(",".join(_fmt(v) for v in row))
        path = os.path.join(out_dir, f"{tag}_sweep.csv")
        _write_text(path, "\n".join(lines) + "\n")
        written.append(path)

    lines = ["quantity,value,units"]
    for name in sorted(summary.scalars):
        lines.append(f"{name},{_fmt(summary.scalars[name])},{summary.units.get(name, '')}")
    path = os.path.join(out_dir, f"{tag}_summary.csv")
    _write_text(path, "\n".join(lines) + "\n")
    written.append(path)

    manifest = dict(summary.manifest)
    if manifest_extra:
        manifest.update(manifest_extra)
    lines = [f"{k} = {manifest[k]}" for k in sorted(manifest)]
    path = os.path.join(out_dir, f"{tag}_manifest.txt")
    _write_text(path, "\n".join(lines) + "\n")
    written.append(path)
    return written


def _resolve_seed(cfg: ScenarioConfig, args) -> ScenarioConfig:
    """Seed precedence: --seed flag > QNOISE_SEED env > config."""
    from dataclasses import replace
    seed = None
    if args.seed is not None:
        seed = args.seed
    elif os.environ.get("QNOISE_SEED"):
        seed = int(os.environ["QNOISE_SEED"])
    if seed is None:
        return cfg
    return replace(cfg, monte_carlo=replace(cfg.monte_carlo, seed=seed))


def _manifest_base(args, cfg_path) -> dict:
    try:
        version = importlib.metadata.version("qnoise")
    except importlib.metadata.PackageNotFoundError:
        version = "unknown"
    return {
        "config_hash": config_hash(cfg_path),
        "library_version": version,
        "tolerance_profile": args.tolerance_profile,
        "tolerances": TOLERANCE_PROFILES[args.tolerance_profile],
        "threads": args.threads,
        "seed_flag": args.seed,
        "seed_env": os.environ.get("QNOISE_SEED", ""),
        "wall_clock_s": None,  # filled after the run
    }


def cmd_run(args) -> int:
    cfg = _resolve_seed(parse_config(args.config), args)
    manifest = _manifest_base(args, args.config)
    t0 = time.perf_counter()
    summary = run_scenario(cfg)
    manifest["wall_clock_s"] = time.perf_counter() - t0
    manifest["seed_effective"] = cfg.monte_carlo.seed
    tag = manifest["config_hash"]
    files = emit_outputs(summary, args.out, tag, manifest)
    for name in sorted(summary.scalars):
        print(f"{name} = {_fmt(summary.scalars[name])} {summary.units.get(name, '')}")
    for f in files:
        print(f"wrote {f}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _resolve_seed(parse_config(args.config), args)
    if cfg.sweep is None:
        raise ConfigurationError("sweep command needs a sweep.* section in the config")
    return cmd_run(args)


def cmd_validate(args) -> int:
    from dataclasses import replace
    cfg = _resolve_seed(parse_config(args.config), args)
    cfg = replace(cfg, monte_carlo=replace(cfg.monte_carlo, enabled=True))
    report = monte_carlo_validate(cfg)
    print(f"paths = {report.n_paths}")
    print(f"seed = {report.seed}")
    print(f"jitter = {_fmt(report.jitter)}")
    print(f"max |z| = {report.max_abs_z:.3f}")
    print(f"fraction |z| > 4 = {report.frac_above_4:.5f}")
    status = "PASS" if report.max_abs_z < 4.0 else "FAIL"
    print(f"monte-carlo-vs-analytic: {status}")
    return 0 if status == "PASS" else 3


def cmd_kernels(args) -> int:
    from .kernels import KernelDecomposition
    from .params import derive_cavity, derive_coulomb
    from .scenarios import _cavity_kernels, particle_particle_kernels

    cfg = parse_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    tag = config_hash(args.config)
    if cfg.kind in ("cavity_particle", "light_probe"):
        dp = derive_cavity(cfg.constants, cfg.oscillator, cfg.cavity)
        st, nst = _cavity_kernels(cfg, dp)
        taus = np.linspace(0.0, 5.0 / dp.gamma, args.points)
    elif cfg.kind == "particle_particle":
        dp = derive_coulomb(cfg.constants, cfg.coulomb)
        st, nst = particle_particle_kernels(cfg, dp)
        taus = np.linspace(0.0, 20.0 * 2 * math.pi / dp.Omega_b, args.points)
    else:
        raise ConfigurationError(f"kernels dump not defined for kind {cfg.kind!r}")

    def dump(kernel: KernelDecomposition, label: str):
        lines = ["tau_s,smooth,delta_coeff,delta2_coeff"]
        if kernel.stationary:
            values = kernel.smooth(taus, 0.0)
        else:
            values = kernel.smooth(taus / 2.0, taus / 2.0)  # equal-time section
        for tau, v in zip(taus, np.atleast_1d(values)):
            lines.append(",".join(_fmt(x) for x in (
                tau, v, kernel.delta_coeff, kernel.delta2_coeff)))
        path = os.path.join(args.out, f"{tag}_kernel_{label}.csv")
        _write_text(path, "\n".join(lines) + "\n")
        print(f"wrote {path}")

    dump(st, "stationary")
    if nst is not None:
        dump(nst, "nonstationary")
    return 0


def cmd_selftest(args) -> int:
    """Abbreviated invariant suite; the full suite lives in pytest."""
    import mpmath as mp

    from .dynamics import closed_form_h, closed_form_h_phi
    from .kernels import lorentzian_J, reduce_delta_product
    from .oracles import (double_integral_variance, gaussian_bump,
                          integrate_against_delta_family,
                          integrate_product_numerically,
                          lorentzian_J_quadrature)
    from .params import OscillatorParams

    failures = 0

    def check(name, ok):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1

    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10):
        wc = 10.0 ** rng.uniform(5, 7)
        nu = 10.0 ** rng.uniform(-5, -2.1)
        gamma = nu * wc
        tau = rng.uniform(0.05, 2.0) / gamma
        j1, j2 = lorentzian_J(tau, wc, gamma)
        q1, q2 = lorentzian_J_quadrature(tau, wc, gamma)
        scale = math.pi / gamma * math.exp(-gamma * tau)
        worst = max(worst, abs(j1 - q1) / scale, abs(j2 - q2) / scale)
    check(f"lorentzian transforms vs quadrature (worst {worst:.2e})", worst < 1e-6)

    worst = 0.0
    for order, trig in ((0, "cos"), (1, "sin"), (1, "cos"), (2, "sin"), (2, "cos")):
        wc = 3.7
        comps = reduce_delta_product(order, trig, wc)
        for k in range(4):
            c, w = rng.uniform(-2, 2), rng.uniform(0.5, 2.0)
            phi_np = gaussian_bump(c, w)
            phi_mp = lambda x: mp.e ** (-((x - c) ** 2) / (2 * w ** 2))
            lhs = integrate_product_numerically(order, trig, wc, phi_mp)
            dphi = lambda x: -(x - c) / w ** 2 * phi_np(x)
            d2phi = lambda x: (((x - c) / w ** 2) ** 2 - 1.0 / w ** 2) * phi_np(x)
            rhs = integrate_against_delta_family(comps, phi_np, dphi, d2phi)
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-12))
    check(f"distribution identities (worst {worst:.2e})", worst < 1e-8)

    osc = OscillatorParams(mass=1.0, bare_frequency=1.0)
    worst = 0.0
    for _ in range(3):
        Wa = rng.uniform(1.2, 2.5)
        t = rng.uniform(1.0, 9.0)
        kap = Wa / 1.0
        brute = double_integral_variance(
            lambda s, sp: np.cos(Wa * (s - sp)), t, 1.0, 1.0, 0.0, n=1501)
        closed = closed_form_h(kap, Wa, 1.0, t) / (1.0 * (1.0 - Wa ** 2) ** 2)
        worst = max(worst, abs(brute - closed) / max(abs(closed), 1e-12))
    check(f"h(t) vs nested quadrature (worst {worst:.2e})", worst < 1e-6)

    print(f"{'OK' if failures == 0 else 'FAILURES'}: {failures} failing group(s)")
    return 0 if failures == 0 else 3


def list_examples() -> int:
    root = importlib.resources.files("qnoise") / "examples"
    for entry in sorted(root.iterdir()):
        if entry.name.endswith(".cfg"):
            first = entry.read_text().splitlines()[0].lstrip("# ").strip()
            print(f"{entry.name}: {first}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnoise",
        description="Quantum-induced stochastic dynamics of semiclassical probes")
    parser.add_argument("--list-examples", action="store_true",
                        help="list shipped example configs and exit")
    sub = parser.add_subparsers(dest="command")
    for name, fn, extra in (
            ("run", cmd_run, True), ("sweep", cmd_sweep, True),
            ("validate", cmd_validate, True), ("kernels", cmd_kernels, True),
            ("selftest", cmd_selftest, False)):
        p = sub.add_parser(name)
        if extra:
            p.add_argument("config")
        if name == "kernels":
            p.add_argument("--points", type=int, default=512)
        p.add_argument("--out", default="qnoise_out")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--tolerance-profile", choices=sorted(TOLERANCE_PROFILES),
                       default="default")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_examples:
        return list_examples()
    if not getattr(args, "fn", None):
        build_parser().print_help()
        return 2
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except IoError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
