"""Paired comparison of SANM-on / SANM-off traces."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .trace import SimTrace

SETTLE_RADIUS = 0.05
TAIL_FRACTION = 0.25


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RunMetrics:
    rms_e_R: float
    rms_e_Omega: float
    settling_time: float      # to SETTLE_RADIUS on |z_R|; inf if never
    eps_hat: float
    mean_step_latency_us: float | None = None
    p99_step_latency_us: float | None = None

    def __post_init__(self):
        if self.rms_e_R < 0 or self.rms_e_Omega < 0:
            raise ValueError("rms values must be >= 0")
        for lat in (self.mean_step_latency_us, self.p99_step_latency_us):
            if lat is not None and not lat > 0:
                raise ValueError("latencies must be positive")


def settling_time(t, z, r: float = SETTLE_RADIUS) -> float:
    """First time after which |z| stays within r."""
    t = np.asarray(t)
    outside = np.nonzero(np.asarray(z) > r)[0]
    if len(outside) == 0:
        return float(t[0])
    last = int(outside[-1])
    return float(t[last + 1]) if last + 1 < len(t) else math.inf


def _tail(n: int, fraction: float) -> slice:
    return slice(n - max(1, int(round(fraction * n))), n)


def run_metrics(t, e_R, e_Omega, latency_us=None, r: float = SETTLE_RADIUS,
                tail_fraction: float = TAIL_FRACTION) -> RunMetrics:
    e_R = np.asarray(e_R, dtype=float)
    e_Omega = np.asarray(e_Omega, dtype=float)
    nR = np.linalg.norm(e_R, axis=1) if e_R.ndim == 2 else np.abs(e_R)
    nW = np.linalg.norm(e_Omega, axis=1) if e_Omega.ndim == 2 else np.abs(e_Omega)
    z = np.hypot(nR, nW)
    tail = _tail(len(z), tail_fraction)
    mean_lat = p99_lat = None
    if latency_us is not None and len(latency_us):
        lat = np.asarray(latency_us, dtype=float)
        mean_lat, p99_lat = float(lat.mean()), float(np.percentile(lat, 99))
    return RunMetrics(
        rms_e_R=float(np.sqrt(np.mean(nR[tail] ** 2))),
        rms_e_Omega=float(np.sqrt(np.mean(nW[tail] ** 2))),
        settling_time=settling_time(t, z, r),
        eps_hat=float(z[tail].max()),
        mean_step_latency_us=mean_lat, p99_step_latency_us=p99_lat)


def trace_metrics(trace: SimTrace, perf: dict | None = None) -> RunMetrics:
    m = run_metrics(trace.t, trace["e_R"], trace["e_Omega"],
                    None if trace.latency_ns is None else trace.latency_ns / 1e3)
    if perf and m.mean_step_latency_us is None:
        m = RunMetrics(m.rms_e_R, m.rms_e_Omega, m.settling_time, m.eps_hat,
                       perf.get("mean_step_latency_us"), perf.get("p99_step_latency_us"))
    return m


@dataclass(frozen=True)
class Comparison:
    on: RunMetrics
    off: RunMetrics
    ratios: dict
    deltas: dict

    def lines(self) -> list[str]:
        out = []
        for tag, m in (("on", self.on), ("off", self.off)):
            for f in fields(m):
                v = getattr(m, f.name)
                if v is not None:
                    out.append(f"{tag}.{f.name}={v:.10g}")
        out += [f"ratio.{k}={v:.10g}" for k, v in self.ratios.items()]
        out += [f"delta.{k}={v:.10g}" for k, v in self.deltas.items()]
        return out


def _ratio(a: float, b: float) -> float:
    if b == 0.0:
        return 1.0 if a == 0.0 else math.inf
    return a / b


def _delta(a: float, b: float) -> float:
    return 0.0 if a == b else a - b


def compare_metrics(on: RunMetrics, off: RunMetrics) -> Comparison:
    keys = ("rms_e_R", "rms_e_Omega", "settling_time", "eps_hat")
    return Comparison(on, off,
                      ratios={k: _ratio(getattr(on, k), getattr(off, k)) for k in keys},
                      deltas={k: _delta(getattr(on, k), getattr(off, k)) for k in keys})


def compare_runs(trace_on: SimTrace, trace_off: SimTrace, perf_on: dict | None = None,
                 perf_off: dict | None = None) -> Comparison:
    if len(trace_on) != len(trace_off):
        raise ShapeMismatch(f"{len(trace_on)} vs {len(trace_off)} rows")
    if len(trace_on) > 1 and not math.isclose(trace_on.dt, trace_off.dt, rel_tol=1e-12):
        raise ShapeMismatch(f"dt {trace_on.dt} vs {trace_off.dt}")
    return compare_metrics(trace_metrics(trace_on, perf_on), trace_metrics(trace_off, perf_off))
