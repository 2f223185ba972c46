"""Command-line entry point: ``sanm-attitude <subcommand> ...``.

Exit codes: 0 success, 1 validation error, 2 analysis assertion failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from ..stability import (NoTransient, c_r_constant, check_gains, default_psi, fit_envelope,
                         verify_decrease)
from .bench import bench_step
from .config import SimConfig, load_config, parse_override, parse_text
from .metrics import compare_runs, trace_metrics
from .simulate import run_scenario
from .trace import read_perf, read_trace, write_trace

EXIT_OK, EXIT_INVALID, EXIT_ANALYSIS = 0, 1, 2
P99_BUDGET_US = 50.0

log = logging.getLogger("sanm_attitude")


class AnalysisFailure(Exception):
    pass


def _emit(lines) -> None:
    for line in lines:
        print(line)


def _config_from_args(args) -> SimConfig:
    overrides = dict(parse_override(s) for s in (args.set or []))
    return load_config(args.config, overrides)


def _trace_config(trace) -> SimConfig:
    """Config stored beside a trace, or the defaults if there is none."""
    return SimConfig(parse_text(trace.config_text, "trace sidecar")) if trace.config_text else SimConfig()


def cmd_simulate(args) -> int:
    overrides = {}
    if args.sanm is not None:
        overrides["controller.sanm"] = args.sanm
    if args.seed is not None:
        overrides["run.seed"] = str(args.seed)
    if args.out is not None:
        overrides["run.output"] = args.out
    cfg = _config_from_args(args).with_overrides(overrides)
    trace = run_scenario(cfg, engine=args.engine)
    out = write_trace(trace, cfg["run.output"])
    m = trace_metrics(trace)
    _emit([f"output={out}", f"rows={len(trace)}", f"saturated_steps={int(trace['saturated'].sum())}",
           f"rms_e_R={m.rms_e_R:.6g}", f"rms_e_Omega={m.rms_e_Omega:.6g}",
           f"eps_hat={m.eps_hat:.6g}", f"settling_time={m.settling_time:.6g}",
           f"mean_step_latency_us={m.mean_step_latency_us:.4g}",
           f"p99_step_latency_us={m.p99_step_latency_us:.4g}"])
    return EXIT_OK


def cmd_compare(args) -> int:
    on, off = read_trace(args.on), read_trace(args.off)
    _emit(compare_runs(on, off, read_perf(args.on), read_perf(args.off)).lines())
    return EXIT_OK


def cmd_audit(args) -> int:
    cfg = _config_from_args(args)
    if args.psi is not None:
        psi = args.psi
    elif args.trace is not None:
        psi = default_psi(read_trace(args.trace)["Psi_R"])
    else:
        psi = 1.0
    report = check_gains(cfg.gains, psi)
    _emit([f"k_R={cfg.gains.k_R!r}", f"k_Omega={cfg.gains.k_Omega!r}", f"c_R={cfg.gains.c_R!r}"])
    _emit(report.lines())
    if not (report.c_R_ok and report.all_pd):
        raise AnalysisFailure("gain audit failed")
    return EXIT_OK


def cmd_fit(args) -> int:
    trace = read_trace(args.trace)
    fit = fit_envelope(trace.t, trace.z_norm, tail_fraction=args.tail)
    _emit([f"alpha_hat={fit.alpha_hat:.10g}", f"beta_hat={fit.beta_hat:.10g}",
           f"eps_hat={fit.eps_hat:.10g}", f"residual={fit.residual:.10g}", f"n_fit={fit.n_fit}"])
    if not fit.beta_hat > 0.0:
        raise AnalysisFailure("fitted decay rate is not positive")
    if not fit.residual < args.max_residual:
        raise AnalysisFailure(f"log-fit residual {fit.residual:.3g} >= {args.max_residual}")
    return EXIT_OK


def estimate_c_r(trace, cfg: SimConfig, tail_fraction: float = 0.25) -> tuple[float, float, float]:
    """(C_R, eps_R, eps_M) from the steady-state tail of a trace."""
    n = len(trace)
    tail = slice(n - max(1, int(round(tail_fraction * n))), n)
    eps_R = float(np.linalg.norm(trace["phi"][tail] - trace["phi_bar"][tail], axis=1).max())
    eps_M = float(np.linalg.norm(trace["delta_M"][tail], axis=1).max())
    return c_r_constant(eps_R, eps_M, cfg.inertia.min, cfg.gains), eps_R, eps_M


def cmd_verify(args) -> int:
    trace = read_trace(args.trace)
    cfg = load_config(args.config) if args.config else _trace_config(trace)
    if args.c_r is not None:
        C_R, src = args.c_r, "given"
    else:
        C_R, eps_R, eps_M = estimate_c_r(trace, cfg, args.tail)
        src = "tail_proxy"
        _emit([f"eps_R_proxy={eps_R:.10g}", f"eps_M_proxy={eps_M:.10g}"])
    rep = verify_decrease(trace.t, trace["V_R"], trace.z_norm, cfg.gains, C_R=C_R,
                          tail_fraction=args.tail, tol=args.tol)
    _emit([f"C_R={rep.C_R:.10g}", f"C_R_source={src}", f"lambda_min_M_R={rep.lambda_min:.10g}",
           f"tol={rep.tol:.10g}", f"floor={rep.floor:.10g}", f"n_checked={rep.n_checked}",
           f"n_pass={rep.n_pass}", f"pass_fraction={rep.fraction:.6f}",
           f"violations={len(rep.violation_times)}"])
    if rep.violation_times:
        _emit([f"violation_t={t:.6g}" for t in rep.violation_times[:20]])
    if not rep.passed(args.required):
        raise AnalysisFailure(f"decrease holds on {rep.fraction:.2%} < {args.required:.0%}")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _config_from_args(args)
    res = bench_step(cfg, args.iters, args.neurons)
    _emit(res.lines())
    _emit([f"p99_budget_us={args.budget_us:g}", f"within_budget={res.p99_us <= args.budget_us}"])
    if not res.exp_count_ok or res.exp_per_step != 3 * res.neurons:
        raise AnalysisFailure("Gaussian evaluation count differs from 3*l")
    if res.p99_us > args.budget_us:
        raise AnalysisFailure(f"p99 {res.p99_us:.3g} us over budget")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sanm-attitude", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def config_opts(sp, required=False):
        sp.add_argument("--config", type=Path, required=required, help="flat key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")

    s = sub.add_parser("simulate", help="run one closed-loop scenario and write its trace")
    config_opts(s)
    s.add_argument("--sanm", choices=("on", "off"))
    s.add_argument("--seed", type=lambda x: int(x, 0))
    s.add_argument("--out")
    s.add_argument("--engine", choices=("fast", "numpy"), default="fast")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("compare", help="paired metrics for SANM-on/off traces")
    s.add_argument("--on", required=True, type=Path)
    s.add_argument("--off", required=True, type=Path)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("audit-gains", help="gain feasibility and matrix definiteness")
    config_opts(s)
    s.add_argument("--psi", type=float)
    s.add_argument("--trace", type=Path, help="take psi as the max Psi_R of this trace")
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("fit", help="exponential envelope fit of |z_R(t)|")
    s.add_argument("--trace", required=True, type=Path)
    s.add_argument("--tail", type=float, default=0.25)
    s.add_argument("--max-residual", type=float, default=0.3)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("verify-lyapunov", help="pointwise Lyapunov decrease check")
    s.add_argument("--trace", required=True, type=Path)
    s.add_argument("--config", type=Path, help="defaults to the trace's .cfg sidecar")
    s.add_argument("--c-r", type=float, help="residual constant; default is a tail estimate")
    s.add_argument("--tol", type=float)
    s.add_argument("--tail", type=float, default=0.25)
    s.add_argument("--required", type=float, default=0.99)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("bench", help="controller + SANM step latency")
    config_opts(s)
    s.add_argument("--iters", type=int, default=100_000)
    s.add_argument("--neurons", type=int)
    s.add_argument("--budget-us", type=float, default=P99_BUDGET_US)
    s.set_defaults(func=cmd_bench)
    return p


def _setup_logging() -> None:
    level = os.environ.get("SANM_LOG", "").strip().lower()
    logging.basicConfig(level={"debug": logging.DEBUG, "info": logging.INFO}.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except (AnalysisFailure, NoTransient) as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
