"""Config, closed-loop runs, traces, comparison metrics and the latency bench."""

from .bench import BenchResult, bench_step
from .config import ConfigError, SimConfig, load_config
from .metrics import Comparison, RunMetrics, ShapeMismatch, compare_runs, run_metrics
from .simulate import run_scenario
from .trace import SimTrace, TraceFormatError, emit_csv, parse_csv, read_trace, write_trace

__all__ = [
    "BenchResult", "bench_step", "ConfigError", "SimConfig", "load_config", "Comparison",
    "RunMetrics", "ShapeMismatch", "compare_runs", "run_metrics", "run_scenario", "SimTrace",
    "TraceFormatError", "emit_csv", "parse_csv", "read_trace", "write_trace",
]
