"""Run configuration: a flat JSON document with a versioned schema."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from ..darkstate import LAWS
from ..measurement import RotationSpec
from ..operators import DECAY_FACTORS
from ..propagator import IntegratorConfig
from ..pulses import PulseShape, Steep, pulse_from_config, pulse_to_config

SCHEMA_VERSION = 1
PRESETS = ("fig2", "fig3", "smoke")


class ConfigError(ValueError):
    pass


def _complex_from(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _complex_to(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


@dataclass(frozen=True)
class RunConfig:
    M: int
    pulse: dict
    g: float = 1.0
    Gamma: float = 1.0
    kappa: float = 0.0
    alpha: complex = 1.0
    beta: complex = 0.0
    initial_mode: str = "atomic"
    window: tuple[float, float] | None = None
    integrator: dict = field(default_factory=dict)
    decay_convention: str = "amplitude"
    dark_law: str = "auto"
    rotation: dict = field(default_factory=dict)
    name: str = "run"
    seed: int = 0
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError("M must be a positive integer")
        for name in ("g", "Gamma", "kappa"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be a finite non-negative rate")
        if self.g <= 0:
            raise ConfigError("g must be positive")
        norm = abs(complex(self.alpha)) ** 2 + abs(complex(self.beta)) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ConfigError(f"|alpha|^2 + |beta|^2 must be 1 (got {norm!r})")
        if self.decay_convention not in DECAY_FACTORS:
            raise ConfigError(f"decay_convention must be one of {sorted(DECAY_FACTORS)}")
        if self.dark_law != "auto" and self.dark_law not in LAWS:
            raise ConfigError(f"dark_law must be 'auto' or one of {LAWS}")
        if self.initial_mode not in ("atomic", "photonic"):
            raise ConfigError("initial_mode must be 'atomic' or 'photonic'")
        pulse = self.pulse_shape()
        lo, hi = self.time_window()
        plo, phi = pulse.window
        if not hi > lo:
            raise ConfigError(f"empty window ({lo}, {hi})")
        if lo < plo - 1e-12 or hi > phi + 1e-12:
            raise ConfigError(f"window ({lo}, {hi}) outside the pulse window ({plo}, {phi})")
        if isinstance(pulse, Steep) and hi >= pulse.pole:
            raise ConfigError(f"window reaches the pulse pole at t={pulse.pole}")
        self.integrator_config()

    def pulse_shape(self) -> PulseShape:
        try:
            return pulse_from_config(self.pulse)
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid pulse: {exc}") from exc

    def time_window(self) -> tuple[float, float]:
        if self.window is not None:
            return float(self.window[0]), float(self.window[1])
        return self.pulse_shape().window

    def integrator_config(self) -> IntegratorConfig:
        try:
            return IntegratorConfig(**self.integrator)
        except TypeError as exc:
            raise ConfigError(f"invalid integrator settings: {exc}") from exc

    def rotation_spec(self) -> RotationSpec:
        return RotationSpec(**self.rotation)

    @property
    def cooperativity(self) -> float:
        return self.g ** 2 / (self.kappa * self.Gamma) if self.kappa > 0 and self.Gamma > 0 else math.inf

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alpha"] = _complex_to(self.alpha)
        d["beta"] = _complex_to(self.beta)
        d["window"] = list(self.window) if self.window is not None else None
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "M" not in data or "pulse" not in data:
            raise ConfigError("config needs at least 'M' and 'pulse'")
        d = dict(data)
        d["alpha"] = _complex_from(d.get("alpha", 1.0))
        d["beta"] = _complex_from(d.get("beta", 0.0))
        if d.get("window") is not None:
            d["window"] = (float(d["window"][0]), float(d["window"][1]))
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def load_config(path: str | Path) -> RunConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return RunConfig.from_dict(data)


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(cfg.to_json() + "\n")


def preset(name: str, M: int | None = None) -> RunConfig:
    """Shipped configuration ``fig2``, ``fig3`` or ``smoke``, optionally at another ``M``."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    text = resources.files("noonsim").joinpath("data").joinpath("presets").joinpath(f"{name}.json").read_text()
    data = json.loads(text)
    if M is not None:
        data["M"] = int(M)
        data["name"] = f"{name}_M{M}"
    return RunConfig.from_dict(data)


def config_from_pulse(M: int, pulse: PulseShape, **kw) -> RunConfig:
    return RunConfig(M=M, pulse=pulse_to_config(pulse), **kw)
