"""Experiment configuration: nested dataclasses loaded from TOML.

Unknown keys anywhere in the file raise :class:`ConfigError`.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .controllers import DFControllerConfig, FMPCConfig, PDConfig
from .models import Params2D

CONTROLLERS = ("df", "fmpc", "pd")


class ConfigError(ValueError):
    pass


@dataclass
class RatesConfig:
    plant_hz: float = 200.0
    controller_hz: float = 50.0

    def __post_init__(self):
        if self.plant_hz <= 0 or self.controller_hz <= 0:
            raise ValueError("rates must be positive")
        ratio = self.plant_hz / self.controller_hz
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("plant rate must be an integer multiple of the controller rate")

    @property
    def substeps(self) -> int:
        return int(round(self.plant_hz / self.controller_hz))

    @property
    def dt(self) -> float:
        return 1.0 / self.controller_hz


@dataclass
class ReferenceConfig:
    """Either a fixed point or a polyline path followed at ``speed``.

    With ``stop_at_end`` a path trial ends once the true output projects
    within ``end_tolerance`` of the final waypoint, so path statistics cover
    one traversal.
    """

    kind: str = "fixed"
    point: list = field(default_factory=lambda: [10.0, 0.0])
    waypoints: list = field(default_factory=lambda: [[-20.0, -30.0], [0.0, -30.0], [0.0, 0.0]])
    speed: float = 3.0
    stop_at_end: bool = True
    end_tolerance: float = 0.5

    def __post_init__(self):
        if self.kind not in ("fixed", "path"):
            raise ValueError("reference.kind must be 'fixed' or 'path'")
        if self.kind == "path" and self.speed <= 0:
            raise ValueError("reference.speed must be positive")


@dataclass
class NoiseConfig:
    """Zero-mean Gaussian noise on the measured outputs, per channel."""

    sigma: list = field(default_factory=lambda: [0.0, 0.0])
    seed: int = 0

    def __post_init__(self):
        if len(self.sigma) != 2 or min(self.sigma) < 0:
            raise ValueError("noise.sigma must be two non-negative numbers")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("noise.seed must be an unsigned 64-bit integer")


@dataclass
class SweepConfig:
    sigmas: list = field(default_factory=lambda: [0.0, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2])
    controllers: list = field(default_factory=lambda: ["df", "fmpc"])


@dataclass
class PathSweepConfig:
    speeds: list = field(default_factory=lambda: [3.0, 5.0, 7.0, 9.0])
    controllers: list = field(default_factory=lambda: ["df", "fmpc", "pd"])
    sigma: list = field(default_factory=lambda: [0.02, 0.02])
    settle_time: float = 5.0


@dataclass
class ExperimentConfig:
    controller: str = "df"
    duration: float = 20.0
    trials: int = 10
    initial_position: list | None = None
    instability_bound: float = 1e3
    model: Params2D = field(default_factory=Params2D)
    rates: RatesConfig = field(default_factory=RatesConfig)
    df: DFControllerConfig = field(default_factory=DFControllerConfig)
    fmpc: FMPCConfig = field(default_factory=FMPCConfig)
    pd: PDConfig = field(default_factory=PDConfig)
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    path_sweep: PathSweepConfig = field(default_factory=PathSweepConfig)

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ValueError(f"controller must be one of {CONTROLLERS}")
        if self.duration <= 0 or self.trials < 1:
            raise ValueError("duration must be positive and trials >= 1")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"[{where}] must be a table")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where or 'root'}]: {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        sub = _NESTED.get((cls, name))
        prefix = f"{where}.{name}" if where else name
        kwargs[name] = _build(sub, value, prefix) if sub else value
        if name == "inertia" and isinstance(value, list):
            kwargs[name] = tuple(value)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where or 'root'}] {exc}") from exc


_NESTED = {
    (ExperimentConfig, "model"): Params2D,
    (ExperimentConfig, "rates"): RatesConfig,
    (ExperimentConfig, "df"): DFControllerConfig,
    (ExperimentConfig, "fmpc"): FMPCConfig,
    (ExperimentConfig, "pd"): PDConfig,
    (ExperimentConfig, "reference"): ReferenceConfig,
    (ExperimentConfig, "noise"): NoiseConfig,
    (ExperimentConfig, "sweep"): SweepConfig,
    (ExperimentConfig, "path_sweep"): PathSweepConfig,
}


def config_from_dict(data: dict) -> ExperimentConfig:
    return _build(ExperimentConfig, data, "")


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return config_from_dict(data)


def replace(cfg: ExperimentConfig, **sections) -> ExperimentConfig:
    """Copy with top-level fields replaced; nested dicts update sub-sections."""
    out = {}
    for key, value in sections.items():
        current = getattr(cfg, key)
        if isinstance(value, dict) and dataclasses.is_dataclass(current):
            out[key] = dataclasses.replace(current, **value)
        else:
            out[key] = value
    return dataclasses.replace(cfg, **out)
