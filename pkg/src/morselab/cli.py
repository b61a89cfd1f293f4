"""Command line entry point: ``morselab <subcommand> --config FILE``."""
import argparse
import json
import os
import sys

import numpy as np

from . import acceptance
from .config import ConfigError, ExperimentConfig, load_config
from .delay import DelayError, solve_threshold_delay
from .difference import discrete_scan, seed_grid, unstable_multipliers
from .integrator import IntegrationError, integrate, lyapunov_series, to_csv, \
    trajectory_checks
from .lyapunov import LyapunovUndefined, lyapunov_value, regularity_membership
from .morse import SeedSpec, check_nstar_consistency, run_ensemble
from .spectrum import SpectrumError, analyze, compute_nstar
from .system import SpecError

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_SPEC = 4
EXIT_INTEGRATION = 5
EXIT_LYAPUNOV = 6
EXIT_SPECTRUM = 7
EXIT_DELAY = 8


def _emit(obj, out=None):
    text = obj if isinstance(obj, str) else json.dumps(obj, indent=2, sort_keys=True)
    (out or sys.stdout).write(text + "\n")


def _outdir(cfg, args):
    d = args.out or cfg.outputs.directory
    os.makedirs(d, exist_ok=True)
    return d


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _continuous(cfg, force=False):
    if cfg.is_discrete:
        raise ConfigError("this subcommand needs a cyclic (continuous) system")
    system, kernel = cfg.build_system(), cfg.build_kernel()
    problems = system.check() + kernel.check()
    if problems and not force:
        raise SpecError("; ".join(problems))
    return system, kernel


def cmd_tau(cfg, args):
    system, kernel = _continuous(cfg, args.force)
    seg = cfg.build_initial(system, kernel)
    tau = solve_threshold_delay(seg, kernel)
    lo, hi = 1.0 / kernel.alpha2, kernel.r
    _emit({"tau": tau, "lower": lo, "upper": hi, "within_bounds": lo - 1e-12 <= tau <= hi + 1e-12})
    return EXIT_OK


def cmd_lyapunov(cfg, args):
    system, kernel = _continuous(cfg, args.force)
    seg = cfg.build_initial(system, kernel)
    lv = lyapunov_value(seg, kernel, system.delta)
    verdict = regularity_membership(seg, lv.a, system.delta, kernel=kernel)
    _emit({**lv.to_dict(), "verdict": verdict.to_dict()})
    return EXIT_OK


def cmd_spectrum(cfg, args):
    if cfg.is_discrete:
        spec = cfg.build_system()
        a, b = spec.linear_coefficients
        m = unstable_multipliers(a, b, spec.n) if cfg.scan.m_star is None else cfg.scan.m_star
        _emit({"a": a, "b": b, "n": spec.n, "m_star": m,
               "n_star": compute_nstar(m, False, spec.delta)})
        return EXIT_OK
    system, kernel = _continuous(cfg, args.force)
    _emit(analyze(system, kernel).to_dict())
    return EXIT_OK


def cmd_simulate(cfg, args):
    system, kernel = _continuous(cfg, args.force)
    seg = cfg.build_initial(system, kernel)
    horizon = args.horizon or cfg.integrator.horizon
    traj = integrate(system, kernel, seg, horizon, cfg.integrator.dt)
    stride = max(1, int(round(cfg.integrator.sample_dt / traj.dt)))
    out = _outdir(cfg, args)
    text, sidecar = to_csv(traj, stride)
    _write(os.path.join(out, "trajectory.csv"), text)
    _write(os.path.join(out, "trajectory.json"), sidecar)
    _, V, _ = lyapunov_series(traj, stride, t_min=traj.r)
    checks = trajectory_checks(traj)
    defined = V[V >= 0]
    increases = int(np.count_nonzero(np.diff(defined) > 0))
    _emit({"horizon": horizon, "final_state": [float(x) for x in traj.states[-1]],
           "V_first": int(defined[0]) if defined.size else None,
           "V_last": int(defined[-1]) if defined.size else None,
           "V_increases": increases, "checks": checks, "csv": os.path.join(out, "trajectory.csv")})
    bad = increases or checks["eta_violations"] or checks["M_exits"]
    return EXIT_VIOLATION if bad else EXIT_OK


def _finish_report(report, cfg, args, name, extra=()):
    out = _outdir(cfg, args)
    violations = list(report.violations) + list(extra)
    report.violations = violations
    _write(os.path.join(out, name), report.to_json())
    summary = report.summary()
    summary["report"] = os.path.join(out, name)
    summary["level_graph"] = report.level_graph
    _emit(summary)
    return EXIT_VIOLATION if report.required_violations else EXIT_OK


def cmd_morse_scan(cfg, args):
    system, kernel = _continuous(cfg, args.force)
    spec = analyze(system, kernel, locate_roots=False)
    sc = cfg.scan
    seeds = SeedSpec(count=args.seeds or sc.seeds, rng_seed=sc.rng_seed, nodes=cfg.integrator.nodes)
    report = run_ensemble(system, kernel, seeds, args.horizon or cfg.integrator.horizon,
                          cfg.integrator.sample_dt, dt=cfg.integrator.dt,
                          omega_window=sc.omega_window, early_window=sc.early_window,
                          origin_radius=sc.origin_radius, n_star=spec.n_star, n0=sc.n0,
                          regularization_time=sc.regularization_time)
    extra = check_nstar_consistency(report, spec, sc.origin_radius)
    return _finish_report(report, cfg, args, "morse_report.json", extra)


def cmd_difference_scan(cfg, args):
    if not cfg.is_discrete:
        raise ConfigError("difference-scan needs a discrete system")
    spec = cfg.build_system()
    problems = spec.check()
    if problems and not args.force:
        raise SpecError("; ".join(problems))
    sc = cfg.scan
    a, b = spec.linear_coefficients
    m = unstable_multipliers(a, b, spec.n) if sc.m_star is None else sc.m_star
    seeds = seed_grid(spec.n, sc.grid_per_axis, sc.grid_span)
    report = discrete_scan(spec, seeds, args.steps or sc.steps,
                           omega_window=None if sc.omega_window is None else int(sc.omega_window),
                           n0=sc.n0, n_star=compute_nstar(m, False, spec.delta))
    return _finish_report(report, cfg, args, "difference_report.json")


def cmd_verify(cfg, args):
    results = acceptance.run_all(echo=lambda line: _emit(line), quick=args.quick)
    failed = [r.number for r in results if not r.passed]
    _emit(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_VIOLATION if failed else EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "tau": cmd_tau, "lyapunov": cmd_lyapunov,
            "spectrum": cmd_spectrum, "morse-scan": cmd_morse_scan,
            "difference-scan": cmd_difference_scan, "verify": cmd_verify}


def build_parser():
    p = argparse.ArgumentParser(prog="morselab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        if name == "verify":
            s.add_argument("--quick", action="store_true", help="reduced sample sizes")
            s.add_argument("--config", help=argparse.SUPPRESS)
            continue
        s.add_argument("--config", required=True, help="experiment JSON file")
        s.add_argument("--out", help="output directory (overrides outputs.directory)")
        s.add_argument("--force", action="store_true", help="run despite failed spec checks")
        if name in ("simulate", "morse-scan"):
            s.add_argument("--horizon", type=float)
        if name == "morse-scan":
            s.add_argument("--seeds", type=int)
        if name == "difference-scan":
            s.add_argument("--steps", type=int)
    return p


ERROR_CODES = ((ConfigError, EXIT_CONFIG), (SpecError, EXIT_SPEC),
               (IntegrationError, EXIT_INTEGRATION), (LyapunovUndefined, EXIT_LYAPUNOV),
               (SpectrumError, EXIT_SPECTRUM), (DelayError, EXIT_DELAY))


def run_command(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = None
        if args.command != "verify":
            cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except tuple(e for e, _ in ERROR_CODES) as exc:
        for etype, code in ERROR_CODES:
            if isinstance(exc, etype):
                print(f"morselab {args.command}: {exc}", file=sys.stderr)
                return code
        raise


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()


__all__ = ["run_command", "main", "build_parser", "ExperimentConfig"]
