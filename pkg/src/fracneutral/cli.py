"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 Picard non-convergence,
4 a diagnostic verdict or guarantee below its threshold.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .asymptotics import SampledFunction, Thresholds, classify
from .conditions import guarantee
from .dynamics import ConvergenceError, read_trajectory_csv, sine_synthesis, solve_picard
from .operator import fit_decay_constant
from .scenario import ConfigError, ScenarioConfig, preset

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_DIAGNOSTIC = 0, 2, 3, 4


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n")


def guarantee_for(cfg: ScenarioConfig, system=None, grid=None, lip=None) -> dict:
    if system is None:
        system, grid, lip = cfg.build()
    spec, alpha = system.spectrum, system.alpha
    if cfg.decay_constant is None:
        C, source = fit_decay_constant(spec, alpha, grid.forward_times), "fitted"
    else:
        C, source = cfg.decay_constant, "config"
    report = guarantee(lip, C, 1.0, spec.mu, alpha, grid)
    out = report.to_dict()
    out["empirical"] = source == "fitted" or report.empirical
    out["constants"] = {"C": C, "M": 1.0, "mu": spec.mu, "alpha": alpha.alpha,
                        "Lg": lip.sup_g, "Lf": lip.sup_f, "C_source": source}
    return out


def run_scenario(cfg: ScenarioConfig, out_dir, log=print) -> int:
    """Solve, diagnose and check one scenario, writing the three artifacts."""
    out = Path(out_dir)
    try:
        system, grid, lip = cfg.build()
        thresholds = Thresholds.from_env(**cfg.thresholds)
    except (ConfigError, ValueError) as exc:
        log(f"config error: {exc}")
        return EXIT_CONFIG
    out.mkdir(parents=True, exist_ok=True)
    g_report = guarantee_for(cfg, system, grid, lip)
    _write_json(out / "guarantee.json", g_report)
    log(f"guarantee: best={g_report['best']} constant={g_report['contraction_constant']:.6g}")
    try:
        result = solve_picard(system, grid, cfg.tolerance, cfg.max_iter)
    except ConvergenceError as exc:
        log(f"solver failed: {exc}")
        return EXIT_NONCONVERGENCE
    log(f"solver: iterations={result.iterations} residual={result.residual:.3e}")
    traj = result.trajectory
    traj.to_csv(out / "trajectory.csv")
    if cfg.theta:
        _write_physical(out / "physical.csv", grid.times, traj.values, cfg.theta)
    try:
        report = classify(traj.sampled(), cfg.omega, cfg.delay, cfg.epsilon, thresholds)
    except ValueError as exc:
        log(f"config error: {exc}")
        return EXIT_CONFIG
    _write_json(out / "periodicity.json", report.to_dict())
    v = report.verdicts
    log(f"verdicts: sap={v['sap']['verdict']} class_r={v['class_r']['verdict']} psap={v['psap']['verdict']}")
    return EXIT_OK if v["class_r"]["verdict"] else EXIT_DIAGNOSTIC


def _write_physical(path, times, coeffs, theta) -> None:
    vals = sine_synthesis(coeffs, theta)
    lines = ["time," + ",".join(f"theta_{repr(float(x))}" for x in theta)]
    lines += [",".join(repr(float(x)) for x in (t, *row)) for t, row in zip(times, vals)]
    Path(path).write_text("\n".join(lines) + "\n")


def _sampled_from_csv(path) -> SampledFunction:
    times, values = read_trajectory_csv(path)
    keep = times >= -1e-12
    times, values = times[keep], values[keep]
    if len(times) < 3:
        raise ValueError("need at least three samples at t >= 0")
    h = times[1] - times[0]
    if h <= 0 or np.max(np.abs(np.diff(times) - h)) > 1e-9 * max(1.0, times[-1]):
        raise ValueError("times must be uniformly spaced")
    if abs(times[0]) > 1e-9 * h:
        raise ValueError("samples must include t = 0")
    vals = values[:, 0] if values.shape[1] == 1 else values
    return SampledFunction(vals, float(h))


def _cmd_solve(args) -> int:
    try:
        cfg = ScenarioConfig.load(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_scenario(cfg, args.out)


def _cmd_check(args) -> int:
    try:
        cfg = ScenarioConfig.load(args.config)
        report = guarantee_for(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return EXIT_OK if report["best"] != "none" else EXIT_DIAGNOSTIC


def _cmd_diagnose(args) -> int:
    try:
        f = _sampled_from_csv(args.csv)
        thresholds = Thresholds.from_env()
        report = classify(f, args.omega, args.r, args.eps, thresholds)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = json.dumps(report.to_dict(), indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return EXIT_OK if report.verdicts[args.require]["verdict"] else EXIT_DIAGNOSTIC


def _cmd_preset(args) -> int:
    cfg = preset(args.preset)
    if args.theta:
        cfg.theta = [float(x) for x in args.theta.split(",")]
    if args.dump_config:
        print(cfg.dumps(), end="")
        return EXIT_OK
    return run_scenario(cfg, args.out)


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return run_selftest(force_alpha=args.force_alpha)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracneutral", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a scenario and write trajectory and reports")
    s.add_argument("config")
    s.add_argument("--out", default=".", help="output directory (default: current)")
    s.set_defaults(func=_cmd_solve)

    s = sub.add_parser("diagnose", help="periodicity report for a trajectory CSV")
    s.add_argument("csv")
    s.add_argument("--omega", type=float, required=True)
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--eps", type=float, default=0.01)
    s.add_argument("--require", choices=("sap", "psap", "class_r"), default="class_r",
                   help="verdict that decides the exit status")
    s.add_argument("--out", help="also write the report here")
    s.set_defaults(func=_cmd_diagnose)

    s = sub.add_parser("check", help="evaluate the contraction criteria of a scenario")
    s.add_argument("config")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_check)

    s = sub.add_parser("section4", help="built-in heat equation with kernel-delay terms")
    s.add_argument("--preset", choices=("small", "large"), default="small")
    s.add_argument("--out", default="section4-out")
    s.add_argument("--theta", help="comma-separated points in (0, pi) for physical-space samples")
    s.add_argument("--dump-config", action="store_true", help="print the preset scenario and exit")
    s.set_defaults(func=_cmd_preset)

    s = sub.add_parser("selftest", help="run the built-in example table")
    s.add_argument("--force-alpha", type=float, help=argparse.SUPPRESS)
    s.set_defaults(func=_cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
