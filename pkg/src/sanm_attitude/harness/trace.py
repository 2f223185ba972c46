"""Closed-loop trace: fixed header, one row per control period, exact CSV."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..sanm import SanmParams, SanmState

_VEC = ("1", "2", "3")
_MAT = tuple(f"{i}{j}" for i in _VEC for j in _VEC)

# group name -> column suffixes (None for scalars)
GROUPS: tuple[tuple[str, tuple | None], ...] = (
    ("t", None),
    ("R", _MAT),
    ("Omega", _VEC),
    ("Rd", _MAT),
    ("Omega_d", _VEC),
    ("e_R", _VEC),
    ("e_Omega", _VEC),
    ("Psi_R", None),
    ("M_d", _VEC),
    ("M", _VEC),
    ("delta_M", _VEC),
    ("phi", _VEC),
    ("phi_bar", _VEC),
    ("J_bar", _VEC),
    ("W_norm", _VEC),
    ("V_Rs", None),
    ("V_Re", None),
    ("V_R", None),
    ("saturated", None),
)


class TraceFormatError(ValueError):
    pass


def header(neurons: int) -> list[str]:
    cols = []
    for name, sfx in GROUPS:
        cols.extend([name] if sfx is None else [f"{name}_{s}" for s in sfx])
    cols.extend(f"W_{j}_{k}" for j in _VEC for k in range(1, neurons + 1))
    return cols


def _slices(neurons: int) -> dict[str, slice]:
    out, i = {}, 0
    for name, sfx in GROUPS:
        n = 1 if sfx is None else len(sfx)
        out[name] = slice(i, i + n)
        i += n
    out["W"] = slice(i, i + 3 * neurons)
    return out


@dataclass
class SimTrace:
    """Uniformly sampled rows; ``data`` is (n_rows, n_cols)."""

    data: np.ndarray
    neurons: int
    config_text: str = ""
    latency_ns: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(header(self.neurons)):
            raise TraceFormatError(f"expected {len(header(self.neurons))} columns")
        self._idx = _slices(self.neurons)

    def __len__(self) -> int:
        return self.data.shape[0]

    @property
    def columns(self) -> list[str]:
        return header(self.neurons)

    def __getitem__(self, name: str) -> np.ndarray:
        """Column group: scalars come back 1-D, vectors (n, 3), matrices (n, 3, 3)."""
        block = self.data[:, self._idx[name]]
        if name == "W":
            return block.reshape(-1, 3, self.neurons)
        if block.shape[1] == 1:
            return block[:, 0]
        if block.shape[1] == 9:
            return block.reshape(-1, 3, 3)
        return block

    @property
    def t(self) -> np.ndarray:
        return self["t"]

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self) > 1 else float("nan")

    @property
    def z_norm(self) -> np.ndarray:
        return np.hypot(np.linalg.norm(self["e_R"], axis=1), np.linalg.norm(self["e_Omega"], axis=1))

    def sanm_state(self, row: int, params: SanmParams) -> SanmState:
        """SANM estimates that were in use at ``row``."""
        return params.initial_state(self["J_bar"][row], self["W"][row])


def emit_csv(trace: SimTrace) -> str:
    lines = [",".join(trace.columns)]
    for row in trace.data:
        lines.append(",".join("%.17g" % v for v in row))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> SimTrace:
    rows = text.strip().splitlines()
    if not rows:
        raise TraceFormatError("empty trace")
    cols = rows[0].split(",")
    n_w = sum(c.startswith("W_") and not c.startswith("W_norm") for c in cols)
    if n_w % 3 or cols != header(n_w // 3):
        raise TraceFormatError("unrecognised trace header")
    try:
        data = np.array([[float(x) for x in r.split(",")] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise TraceFormatError(str(exc)) from None
    if data.size == 0:
        data = data.reshape(0, len(cols))
    if data.ndim != 2 or data.shape[1] != len(cols):
        raise TraceFormatError("row length does not match header")
    trace = SimTrace(data, n_w // 3)
    t = trace.t
    if len(t) > 2:
        d = np.diff(t)
        if (d <= 0).any() or np.abs(d - d[0]).max() > 1e-9 * max(1.0, abs(t[-1])):
            raise TraceFormatError("t is not uniformly increasing")
    return trace


def write_trace(trace: SimTrace, path: str | Path) -> Path:
    """Write the CSV plus ``<path>.cfg`` (effective config) and, if timed, ``<path>.perf``."""
    p = Path(path)
    p.write_text(emit_csv(trace))
    if trace.config_text:
        Path(str(p) + ".cfg").write_text(trace.config_text)
    if trace.latency_ns is not None and len(trace.latency_ns):
        lat = trace.latency_ns / 1e3
        Path(str(p) + ".perf").write_text(
            f"mean_step_latency_us={lat.mean():.6g}\np99_step_latency_us={np.percentile(lat, 99):.6g}\n")
    return p


def read_trace(path: str | Path) -> SimTrace:
    p = Path(path)
    try:
        trace = parse_csv(p.read_text())
    except OSError as exc:
        raise TraceFormatError(f"cannot read {p}: {exc.strerror}") from None
    cfg = Path(str(p) + ".cfg")
    if cfg.exists():
        trace.config_text = cfg.read_text()
    return trace


def read_perf(path: str | Path) -> dict[str, float]:
    perf = Path(str(path) + ".perf")
    if not perf.exists():
        return {}
    out = {}
    for line in perf.read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = float(v)
    return out
