"""Flat ``section.key = value`` run configuration.

Every key has a default (the Experiment 1 values), so a config file only
needs to list what it changes.  Lists are comma separated; per-axis RBF
centers live under ``sanm.axis<j>.*``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..controller import ControllerGains, ReferenceTrajectory, TrajectoryKind
from ..rigid_body import (MAX_DT, AllocationModel, DisturbanceKind, DisturbanceModel,
                          InertiaTensor, Scenario)
from ..sanm import SanmParams, SanmState, grid_centers
from ..so3 import exp_so3


class ConfigError(ValueError):
    pass


def _floats(n: int | None = None) -> Callable[[str], tuple]:
    def parse(text: str) -> tuple:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
        if n is not None and len(vals) != n:
            raise ValueError(f"expected {n} values, got {len(vals)}")
        return vals
    return parse


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return t
    return parse


def _str(text: str) -> str:
    return text.strip()


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise ValueError("seed must fit in 64 unsigned bits")
    return v


def _waypoints(text: str) -> tuple:
    rows = []
    for chunk in text.split(";"):
        if chunk.strip():
            rows.append(_floats(4)(chunk.replace(":", ",")))
    return tuple(rows)


def _axis(text: str):
    t = text.strip()
    return t if t == "random" else _floats(3)(t)


# key -> (parser, default text)
SCHEMA: dict[str, tuple[Callable[[str], object], str]] = {
    "plant.scenario": (_choice("known_inertia", "unknown_inertia"), "unknown_inertia"),
    "plant.inertia": (_floats(3), "0.011, 0.020, 0.023"),
    "plant.mass": (float, "1.6"),
    "plant.payload_mass": (float, "0.25"),
    "plant.gravity": (float, "9.81"),
    "disturbance.kind": (_choice("none", "sinusoid", "payload_proxy"), "payload_proxy"),
    "disturbance.amplitude": (_floats(3), "4.0, 4.0, 1.5"),
    "disturbance.frequency": (_floats(3), "0.05, 0.04, 0.03"),
    "disturbance.phase": (_floats(3), "0, 0, 0"),
    "disturbance.random_phase": (_bool, "true"),
    "disturbance.coupling_gain": (float, "0.5"),
    "allocation.enabled": (_bool, "true"),
    "allocation.arm_length": (float, "0.2"),
    "allocation.thrust_coeff": (float, "1.0"),
    "allocation.torque_coeff": (float, "0.016"),
    "allocation.max_thrust": (float, "8.0"),
    "allocation.thrust_perturbation": (_floats(4), "0, 0, 0, 0"),
    "allocation.torque_perturbation": (_floats(4), "0, 0, 0, 0"),
    "allocation.arm_perturbation": (float, "0"),
    "noise.omega_std": (float, "0"),
    "noise.attitude_std": (float, "0"),
    "controller.k_R": (float, "100"),
    "controller.k_Omega": (float, "80"),
    "controller.c_R": (float, "0.6"),
    "controller.sanm": (_bool, "true"),
    "controller.estimates": (_choice("sanm", "oracle"), "sanm"),
    "sanm.eta": (_floats(3), "0.01, 0.01, 0.05"),
    "sanm.scale": (_floats(3), "0.02, 0.02, 0.02"),
    "sanm.J_max": (_floats(3), "0.03, 0.03, 0.04"),
    "sanm.J_min": (float, "1e-4"),
    "sanm.J_init": (_floats(3), "0.01, 0.02, 0.02"),
    "sanm.gamma": (_floats(3), "120, 120, 50"),
    "sanm.r_w": (float, "50"),
    "sanm.neurons": (int, "5"),
    "sanm.axis1.centers_e_R": (_floats(), "-1, -0.5, 0, 0.5, 1"),
    "sanm.axis1.centers_e_Omega": (_floats(), "-10, -5, 0, 5, 10"),
    "sanm.axis1.width": (_floats(), "2"),
    "sanm.axis2.centers_e_R": (_floats(), "-1, -0.5, 0, 0.5, 1"),
    "sanm.axis2.centers_e_Omega": (_floats(), "-10, -5, 0, 5, 10"),
    "sanm.axis2.width": (_floats(), "2"),
    "sanm.axis3.centers_e_R": (_floats(), "-1, -0.5, 0, 0.5, 1"),
    "sanm.axis3.centers_e_Omega": (_floats(), "-6, -3, 0, 3, 6"),
    "sanm.axis3.width": (_floats(), "3"),
    "trajectory.kind": (_choice(*(k.value for k in TrajectoryKind)), "fixed_hover"),
    "trajectory.b1d": (_floats(3), "1, 0, 0"),
    "trajectory.yaw_rate": (float, "0"),
    "trajectory.waypoints": (_waypoints, ""),
    "init.attitude_angle": (float, "0.5"),
    "init.attitude_axis": (_axis, "random"),
    "init.omega": (_floats(3), "0, 0, 0"),
    "run.dt": (float, "0.0025"),
    "run.duration": (float, "20"),
    "run.seed": (_seed, "1"),
    "run.output": (_str, "trace.csv"),
}


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Raw ``key -> value text`` pairs; '#' starts a comment."""
    out: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{n}: unknown key {key!r}")
        out[key] = value
    return out


@dataclass(frozen=True)
class SimConfig:
    """Validated run configuration; ``raw`` keeps the text of every key."""

    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = {k: d for k, (_, d) in SCHEMA.items()}
        for k, v in self.raw.items():
            if k not in SCHEMA:
                raise ConfigError(f"unknown key {k!r}")
            merged[k] = str(v)
        values = {}
        for k, text in merged.items():
            try:
                values[k] = SCHEMA[k][0](text)
            except ValueError as exc:
                raise ConfigError(f"{k}: {exc}") from None
        object.__setattr__(self, "raw", merged)
        object.__setattr__(self, "_v", values)
        self._validate()

    def __getitem__(self, key: str):
        return self._v[key]

    def _validate(self) -> None:
        dt, T = self["run.dt"], self["run.duration"]
        if not 0.0 < dt <= MAX_DT:
            raise ConfigError(f"run.dt must lie in (0, {MAX_DT}]")
        if not T > 0.0:
            raise ConfigError("run.duration must be positive")
        if self["noise.omega_std"] < 0 or self["noise.attitude_std"] < 0:
            raise ConfigError("noise std-devs must be >= 0")
        if not 0.0 <= self["init.attitude_angle"] < math.pi:
            raise ConfigError("init.attitude_angle must lie in [0, pi)")
        axis = self["init.attitude_axis"]
        if axis != "random" and np.linalg.norm(axis) == 0.0:
            raise ConfigError("init.attitude_axis must be nonzero")
        l = self["sanm.neurons"]
        if l < 1:
            raise ConfigError("sanm.neurons must be >= 1")
        for j in (1, 2, 3):
            for part in ("centers_e_R", "centers_e_Omega"):
                if len(self[f"sanm.axis{j}.{part}"]) != l:
                    raise ConfigError(f"sanm.axis{j}.{part} needs {l} values")
            if len(self[f"sanm.axis{j}.width"]) not in (1, l):
                raise ConfigError(f"sanm.axis{j}.width needs 1 or {l} values")
        # constructing the domain objects runs their own invariant checks
        try:
            self.inertia, self.gains, self.sanm_params(), self.sanm_initial()
            self.trajectory(), self.allocation()
            self.disturbance(np.random.default_rng(0))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    # -- builders -----------------------------------------------------------

    def with_overrides(self, overrides: dict) -> "SimConfig":
        return SimConfig({**self.raw, **{k: str(v) for k, v in overrides.items()}})

    @property
    def dt(self) -> float:
        return self["run.dt"]

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self["run.duration"] / self.dt)))

    @property
    def seed(self) -> int:
        return self["run.seed"]

    @property
    def scenario(self) -> Scenario:
        return Scenario(self["plant.scenario"])

    @property
    def inertia(self) -> InertiaTensor:
        return InertiaTensor.from_vec(self["plant.inertia"])

    @property
    def gains(self) -> ControllerGains:
        return ControllerGains(self["controller.k_R"], self["controller.k_Omega"], self["controller.c_R"])

    @property
    def controller_mode(self) -> str:
        if self["controller.estimates"] == "oracle":
            return "oracle"
        return "sanm" if self["controller.sanm"] else "off"

    @property
    def hover_force(self) -> float:
        return (self["plant.mass"] + self["plant.payload_mass"]) * self["plant.gravity"]

    def sanm_params(self, neurons: int | None = None) -> SanmParams:
        """Slice parameters; ``neurons`` swaps the configured centers for an even grid."""
        if neurons is None:
            l = self["sanm.neurons"]
            centers = np.array([np.column_stack([self[f"sanm.axis{j}.centers_e_R"],
                                                 self[f"sanm.axis{j}.centers_e_Omega"]])
                                for j in (1, 2, 3)])
            widths = np.array([np.broadcast_to(self[f"sanm.axis{j}.width"], (l,)) for j in (1, 2, 3)])
        else:
            if neurons < 1:
                raise ConfigError("neurons must be >= 1")
            centers = np.array([grid_centers(neurons, max(np.abs(self[f"sanm.axis{j}.centers_e_R"])),
                                             max(np.abs(self[f"sanm.axis{j}.centers_e_Omega"])))
                                for j in (1, 2, 3)])
            widths = np.array([np.full(neurons, self[f"sanm.axis{j}.width"][0]) for j in (1, 2, 3)])
        if (widths <= 0).any():
            raise ConfigError("RBF widths must be positive")
        return SanmParams(centers=centers, widths=widths,
                          gamma=np.array(self["sanm.gamma"]), eta=np.array(self["sanm.eta"]),
                          scale=np.array(self["sanm.scale"]), J_max=np.array(self["sanm.J_max"]),
                          J_min=self["sanm.J_min"], r_w=self["sanm.r_w"])

    def sanm_initial(self, neurons: int | None = None) -> SanmState:
        return self.sanm_params(neurons).initial_state(np.array(self["sanm.J_init"]))

    def trajectory(self) -> ReferenceTrajectory:
        return ReferenceTrajectory(kind=self["trajectory.kind"], hover_force=self.hover_force,
                                   b1d=np.array(self["trajectory.b1d"]),
                                   yaw_rate=self["trajectory.yaw_rate"],
                                   waypoints=self["trajectory.waypoints"])

    def allocation(self) -> AllocationModel | None:
        if not self["allocation.enabled"]:
            return None
        return AllocationModel(
            arm_length=self["allocation.arm_length"],
            thrust_coeff=np.full(4, self["allocation.thrust_coeff"]),
            torque_coeff=np.full(4, self["allocation.torque_coeff"]),
            max_thrust=self["allocation.max_thrust"],
            thrust_perturbation=np.array(self["allocation.thrust_perturbation"]),
            torque_perturbation=np.array(self["allocation.torque_perturbation"]),
            arm_perturbation=self["allocation.arm_perturbation"])

    def disturbance(self, rng: np.random.Generator) -> DisturbanceModel:
        """Draws the random phases (if enabled) from ``rng`` first."""
        phase = np.array(self["disturbance.phase"])
        if self["disturbance.random_phase"]:
            phase = rng.uniform(0.0, 2.0 * math.pi, 3)
        return DisturbanceModel(kind=DisturbanceKind(self["disturbance.kind"]),
                                amplitude=np.array(self["disturbance.amplitude"]),
                                frequency=np.array(self["disturbance.frequency"]),
                                phase=phase, coupling_gain=self["disturbance.coupling_gain"])

    def initial_attitude(self, rng: np.random.Generator, Rd0: np.ndarray) -> np.ndarray:
        """Rd0 rotated by init.attitude_angle about a fixed or random body axis."""
        axis = self["init.attitude_axis"]
        if axis == "random":
            v = rng.standard_normal(3)
        else:
            v = np.array(axis)
        v = v / np.linalg.norm(v)
        return Rd0 @ exp_so3(self["init.attitude_angle"] * v)

    # -- text form ---------------------------------------------------------

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.raw.items())


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> SimConfig:
    raw = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {p}: {exc.strerror}") from None
        raw = parse_text(text, str(p))
    raw.update({k: str(v) for k, v in (overrides or {}).items()})
    return SimConfig(raw)


def parse_override(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    k, v = item.split("=", 1)
    return k.strip(), v.strip()
