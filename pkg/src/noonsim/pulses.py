"""Pump pulse shapes and adiabaticity diagnostics.

Times are in units of ``1/Gamma`` and Rabi frequencies in units of ``Gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline


class PulseError(ValueError):
    pass


class PulseDomainError(PulseError):
    pass


@dataclass(frozen=True)
class Gaussian:
    """``A exp(-((t - t0) / w)**2)``; the defaults match the ``fig2`` preset."""

    amplitude: float = 1000.0
    width: float = 10.0
    center: float = 30.0
    window: tuple[float, float] = (0.0, 30.0)

    kind = "gaussian"

    def _value(self, t):
        x = (t - self.center) / self.width
        return self.amplitude * np.exp(-x * x)

    def _derivative(self, t):
        x = (t - self.center) / self.width
        return -2.0 * x / self.width * self.amplitude * np.exp(-x * x)

    def scaled(self, factor: float) -> "Gaussian":
        """Same shape with time stretched by ``factor`` (slower for factor > 1)."""
        lo, hi = self.window
        return replace(self, width=self.width * factor, center=self.center * factor,
                       window=(lo * factor, hi * factor))

    def params(self) -> dict:
        return {"amplitude": self.amplitude, "width": self.width, "center": self.center}


@dataclass(frozen=True)
class Steep:
    """``-c [tanh(s (t - t1)) + 1/(t - t2)]`` with a pole at ``t2``.

    ``gated=True`` selects the alternative grouping
    ``-c [tanh(s (t - t1)) + 1] / (t - t2)``, which switches on from zero.
    """

    scale: float = 3.0
    steepness: float = 4.0
    shift: float = 0.5
    pole: float = 2.01
    window: tuple[float, float] = (0.0, 2.0)
    gated: bool = False

    kind = "steep"

    def __post_init__(self):
        if self.window[1] >= self.pole:
            raise PulseError(f"steep window must end before the pole at {self.pole}")

    def _value(self, t):
        th = np.tanh(self.steepness * (t - self.shift))
        if self.gated:
            return -self.scale * (th + 1.0) / (t - self.pole)
        return -self.scale * (th + 1.0 / (t - self.pole))

    def _derivative(self, t):
        th = np.tanh(self.steepness * (t - self.shift))
        dth = self.steepness * (1.0 - th * th)
        d = t - self.pole
        if self.gated:
            return -self.scale * (dth / d - (th + 1.0) / (d * d))
        return -self.scale * (dth - 1.0 / (d * d))

    def params(self) -> dict:
        return {"scale": self.scale, "steepness": self.steepness, "shift": self.shift,
                "pole": self.pole, "gated": self.gated}


@dataclass(frozen=True)
class Tabulated:
    times: tuple[float, ...]
    values: tuple[float, ...]
    interpolation: str = "linear"
    fd_step: float = 1e-5

    kind = "tabulated"

    def __post_init__(self):
        if len(self.times) != len(self.values) or len(self.times) < 2:
            raise PulseError("tabulated pulse needs at least two matching time/value pairs")
        if np.any(np.diff(self.times) <= 0):
            raise PulseError("tabulated times must be strictly increasing")
        if self.interpolation not in ("linear", "cubic"):
            raise PulseError(f"unknown interpolation {self.interpolation!r}")
        if self.interpolation == "cubic":
            object.__setattr__(self, "_spline", CubicSpline(self.times, self.values))

    @property
    def window(self) -> tuple[float, float]:
        return (self.times[0], self.times[-1])

    def _value(self, t):
        if self.interpolation == "cubic":
            return self._spline(t)
        return np.interp(t, self.times, self.values)

    def _derivative(self, t):
        lo, hi = self.window
        h = self.fd_step
        t = np.asarray(t, dtype=float)
        tp = np.minimum(t + h, hi)
        tm = np.maximum(t - h, lo)
        return (self._value(tp) - self._value(tm)) / (tp - tm)

    def params(self) -> dict:
        return {"times": list(self.times), "values": list(self.values),
                "interpolation": self.interpolation}


PulseShape = Gaussian | Steep | Tabulated


def _check(pulse: PulseShape, t) -> None:
    lo, hi = pulse.window
    tt = np.asarray(t, dtype=float)
    if isinstance(pulse, Steep) and np.any(tt >= pulse.pole):
        raise PulseDomainError(f"t at or beyond the pole t2={pulse.pole}")
    if np.any(tt < lo - 1e-12) or np.any(tt > hi + 1e-12):
        raise PulseDomainError(f"t outside pulse window [{lo}, {hi}]")


def evaluate(pulse: PulseShape, t):
    _check(pulse, t)
    v = pulse._value(np.asarray(t, dtype=float))
    return float(v) if np.ndim(v) == 0 else v


def derivative(pulse: PulseShape, t):
    _check(pulse, t)
    v = pulse._derivative(np.asarray(t, dtype=float))
    return float(v) if np.ndim(v) == 0 else v


def pulse_from_config(cfg: dict) -> PulseShape:
    cfg = dict(cfg)
    variant = cfg.pop("variant")
    if "window" in cfg:
        cfg["window"] = tuple(cfg["window"])
    if variant == "gaussian":
        return Gaussian(**cfg)
    if variant == "steep":
        return Steep(**cfg)
    if variant == "tabulated":
        return Tabulated(tuple(cfg["times"]), tuple(cfg["values"]), cfg.get("interpolation", "linear"))
    raise PulseError(f"unknown pulse variant {variant!r}")


def pulse_to_config(pulse: PulseShape) -> dict:
    out = {"variant": pulse.kind, **pulse.params()}
    if not isinstance(pulse, Tabulated):
        out["window"] = list(pulse.window)
    return out


def pulse_table(pulse: PulseShape, dt: float = 0.01) -> np.ndarray:
    """Columns ``t, Omega, dOmega/dt`` on a uniform grid over the window."""
    lo, hi = pulse.window
    n = int(round((hi - lo) / dt))
    t = np.linspace(lo, hi, n + 1)
    return np.column_stack([t, evaluate(pulse, t), derivative(pulse, t)])


@dataclass
class AdiabaticityReport:
    """Margins of the two adiabaticity conditions along a trajectory.

    ``margin_empty = (g^2/Gamma) / |dOmega/dt / Omega|`` is the empty-cavity
    condition and ``margin_photon`` multiplies the coupling by
    ``max(n_ph, 1)``.  Instants with ``Omega == 0`` are excluded and listed
    in ``flagged``.
    """

    times: np.ndarray
    log_rate: np.ndarray
    coupling: float
    photon_coupling: np.ndarray
    margin_empty: np.ndarray
    margin_photon: np.ndarray
    flagged: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def _argmin(self, arr):
        finite = np.where(np.isnan(arr), np.inf, arr)
        return int(np.argmin(finite)) if finite.size else -1

    @property
    def min_margin_empty(self) -> float:
        i = self._argmin(self.margin_empty)
        return float(self.margin_empty[i]) if i >= 0 else math.inf

    @property
    def min_margin_photon(self) -> float:
        i = self._argmin(self.margin_photon)
        return float(self.margin_photon[i]) if i >= 0 else math.inf

    @property
    def time_of_min_empty(self) -> float:
        i = self._argmin(self.margin_empty)
        return float(self.times[i]) if i >= 0 else math.nan

    def summary(self) -> dict:
        return {
            "min_margin_empty": self.min_margin_empty,
            "min_margin_photon": self.min_margin_photon,
            "time_of_min_margin_empty": self.time_of_min_empty,
            "flagged_zero_field": int(len(self.flagged)),
        }


def adiabaticity_report(pulse: PulseShape, trajectory, g: float, Gamma: float) -> AdiabaticityReport:
    """Evaluate both margins on the trajectory's sample times.

    ``trajectory`` needs ``times`` and ``n_ph_cond`` arrays (see
    :class:`noonsim.propagator.Trajectory`).
    """
    t = np.asarray(trajectory.times, dtype=float)
    n_ph = np.asarray(trajectory.n_ph_cond, dtype=float)
    om = np.atleast_1d(evaluate(pulse, t))
    dom = np.atleast_1d(derivative(pulse, t))
    zero = om == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.abs(dom / om)
    rate[zero] = np.nan
    coupling = g * g / Gamma if Gamma > 0 else math.inf
    photon_coupling = coupling * np.maximum(n_ph, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        m4 = np.where(rate > 0, coupling / rate, np.inf)
        m5 = np.where(rate > 0, photon_coupling / rate, np.inf)
    m4[zero] = np.nan
    m5[zero] = np.nan
    return AdiabaticityReport(t, rate, coupling, photon_coupling, m4, m5, flagged=t[zero])
