"""Warm-loop latency of one controller + SANM step (no plant)."""

from __future__ import annotations

import gc
import time
from dataclasses import dataclass

import numpy as np

from ..controller import desired_rates
from ..so3 import exp_so3
from .config import SimConfig
from .simulate import make_loop

MIN_ITERATIONS = 10_000
WARMUP = 2_000


@dataclass(frozen=True)
class BenchResult:
    iterations: int
    neurons: int
    mean_us: float
    p99_us: float
    max_us: float
    exp_per_step: int
    exp_count_ok: bool

    def lines(self) -> list[str]:
        return [f"iterations={self.iterations}", f"neurons={self.neurons}",
                f"mean_step_latency_us={self.mean_us:.4g}", f"p99_step_latency_us={self.p99_us:.4g}",
                f"max_step_latency_us={self.max_us:.4g}", f"gaussian_evals_per_step={self.exp_per_step}",
                f"gaussian_evals_ok={self.exp_count_ok}"]


def bench_step(config: SimConfig, iterations: int = 100_000, neurons: int | None = None,
               engine: str = "fast") -> BenchResult:
    if iterations < MIN_ITERATIONS:
        raise ValueError(f"iterations must be >= {MIN_ITERATIONS}")
    loop = make_loop(config.with_overrides({"controller.sanm": "true", "controller.estimates": "sanm"}),
                     engine, neurons)
    l = loop.neurons
    cmd = desired_rates(config.trajectory(), 0.0, config.dt)
    # a slowly moving state near hover keeps every branch of the laws live
    rng = np.random.default_rng(config.seed)
    n_states = 64
    Rs = [cmd.Rd @ exp_so3(0.3 * rng.standard_normal(3)) for _ in range(n_states)]
    Ws = [rng.standard_normal(3) for _ in range(n_states)]

    for i in range(WARMUP):
        loop.step(Rs[i % n_states], Ws[i % n_states], cmd)

    lat = np.empty(iterations, dtype=np.int64)
    counts_ok = True
    clock = time.perf_counter_ns
    gc_was = gc.isenabled()
    gc.disable()
    try:
        for i in range(iterations):
            R = Rs[i % n_states]
            W = Ws[i % n_states]
            t0 = clock()
            loop.step(R, W, cmd)
            lat[i] = clock() - t0
            if loop.last_exp_count != 3 * l:
                counts_ok = False
    finally:
        if gc_was:
            gc.enable()
    us = lat / 1e3
    return BenchResult(iterations=iterations, neurons=l, mean_us=float(us.mean()),
                       p99_us=float(np.percentile(us, 99)), max_us=float(us.max()),
                       exp_per_step=int(loop.last_exp_count), exp_count_ok=counts_ok)
