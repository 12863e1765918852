"""Time integration of the damped Schrodinger equation and trajectory observables.

Each sector component of the state is advanced independently with

    dpsi/dt = -i (Omega(t) H_pump + g H_cav) psi - gamma D_decay psi

between observable samples; the inner stepping loop runs in the compiled
kernel when it is available (see :mod:`noonsim.kernels`).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from ._dopri_py import rk4_fixed
from .darkstate import LadderProjector, dark_coefficients, resolve_law
from .operators import HamiltonianSet, hamiltonian_for
from .pulses import Gaussian, PulseShape, Steep, evaluate
from .statespace import StateVector


class PropagationError(RuntimeError):
    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t={time:.6g}")
        self.time = time


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "dopri5"
    rtol: float = 1e-9
    atol: float = 1e-11
    max_step: float = math.inf
    min_step: float = 1e-13
    sample_interval: float = 0.01
    fixed_step: float = 1e-4
    backend: str | None = None

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.sample_interval <= 0:
            raise ValueError("sample interval must be positive")
        if self.method not in ("dopri5", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class Trajectory:
    times: np.ndarray
    Omega: np.ndarray
    norm: np.ndarray
    n_ph_raw: np.ndarray
    n_ph_cond: np.ndarray
    P_dark: np.ndarray
    P_exc: np.ndarray
    P_ladder: np.ndarray
    final_state: StateVector
    M: int
    dark_law: str
    stats: dict = field(default_factory=dict)

    @property
    def loss_running(self) -> np.ndarray:
        return _cumtrapz(self.n_ph_raw, self.times)

    @property
    def loss_running_cond(self) -> np.ndarray:
        return _cumtrapz(self.n_ph_cond, self.times)

    @property
    def P_dark_cond(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.norm > 0, self.P_dark / self.norm ** 2, 0.0)

    def columns(self) -> list[str]:
        return (["t", "norm", "n_ph_raw", "n_ph_cond", "P_dark", "P_exc"]
                + [f"P_n{i}" for i in range(self.P_ladder.shape[1])] + ["loss_running"])

    def table(self) -> np.ndarray:
        return np.column_stack([self.times, self.norm, self.n_ph_raw, self.n_ph_cond,
                                self.P_dark, self.P_exc, self.P_ladder, self.loss_running])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns())
            for row in self.table():
                w.writerow([repr(float(v)) for v in row])


def _cumtrapz(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(np.asarray(y, dtype=float))
    if len(t) > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def hamiltonians_for(psi: StateVector, g: float, Gamma: float,
                     decay_convention: str = "amplitude") -> list[HamiltonianSet]:
    return [hamiltonian_for(c.basis, g, Gamma, decay_convention) for c in psi.components]


def _pulse_kernel_args(pulse: PulseShape):
    if isinstance(pulse, Gaussian):
        return 1, np.array([pulse.amplitude, pulse.width, pulse.center], float), None
    if isinstance(pulse, Steep):
        code = 3 if pulse.gated else 2
        return code, np.array([pulse.scale, pulse.steepness, pulse.shift, pulse.pole], float), None
    return 0, np.zeros(1), lambda t: float(pulse._value(t))


def _check_window(pulse: PulseShape, window) -> tuple[float, float]:
    lo, hi = window if window is not None else pulse.window
    if not hi > lo:
        raise ValueError(f"empty window ({lo}, {hi})")
    evaluate(pulse, np.array([lo, hi]))  # raises on out-of-window or pole
    return float(lo), float(hi)


class _ComponentStepper:
    def __init__(self, H: HamiltonianSet, cfg: IntegratorConfig, pulse: PulseShape):
        self.H = H
        self.cfg = cfg
        hp, hc = H.H_pump.matrix, H.H_cav.matrix
        self.p = (hp.indptr.astype(np.int32), hp.indices.astype(np.int32), hp.data.astype(float))
        self.c = (hc.indptr.astype(np.int32), hc.indices.astype(np.int32), hc.data.astype(float))
        self.rates = np.ascontiguousarray(H.decay_rates, dtype=float)
        self.code, self.params, self.fn = _pulse_kernel_args(pulse)
        self.pulse = pulse
        self.advance = kernels.get_advance(cfg.backend)
        self.hp_norm = float(abs(hp).sum(axis=1).max()) if hp.nnz else 0.0
        self.hc_norm = float(abs(hc).sum(axis=1).max()) if hc.nnz else 0.0
        self.h = None
        self.n_acc = 0
        self.n_rej = 0

    def _initial_step(self, t: float) -> float:
        om = abs(float(self.pulse._value(t)))
        scale = om * self.hp_norm + self.H.g * self.hc_norm + float(self.rates.max(initial=0.0))
        return min(self.cfg.sample_interval, 0.5 / scale) if scale > 0 else self.cfg.sample_interval

    def rhs(self, t, y):
        om = float(self.pulse._value(t))
        return -1j * (om * (self.H.H_pump.matrix @ y) + self.H.g * (self.H.H_cav.matrix @ y)) - self.rates * y

    def step(self, y: np.ndarray, t0: float, t1: float) -> np.ndarray:
        if self.cfg.method == "rk4":
            y, n = rk4_fixed(y, t0, t1, self.cfg.fixed_step, self.rhs)
            self.n_acc += n
            if not np.all(np.isfinite(y)):
                raise PropagationError("non-finite amplitudes", t1)
            return y
        if self.h is None:
            self.h = self._initial_step(t0)
        y, t, h, n_acc, n_rej, status = self.advance(
            np.ascontiguousarray(y, dtype=complex), t0, t1, self.h,
            *self.p, *self.c, self.rates, self.H.g,
            self.code, self.params, self.fn,
            self.cfg.rtol, self.cfg.atol, self.cfg.max_step, self.cfg.min_step,
        )
        self.n_acc += n_acc
        self.n_rej += n_rej
        if status == 1:
            raise PropagationError("step size underflow (stiff region)", t)
        if status == 2 or not np.all(np.isfinite(y)):
            raise PropagationError("NaN in integration error estimate", t)
        self.h = h
        return np.asarray(y)


def sample_times(window: tuple[float, float], interval: float) -> np.ndarray:
    lo, hi = window
    n = max(1, int(math.ceil((hi - lo) / interval - 1e-9)))
    return np.linspace(lo, hi, n + 1)


def propagate(psi0: StateVector, H: HamiltonianSet | Sequence[HamiltonianSet], pulse: PulseShape,
              window: tuple[float, float] | None = None, cfg: IntegratorConfig | None = None,
              law: str = "auto") -> Trajectory:
    """Propagate ``psi0`` over ``window`` and sample observables.

    ``H`` is one operator set per component of ``psi0`` (a bare set is
    accepted for single-component states).  All sets must share ``g``.
    """
    cfg = cfg or IntegratorConfig()
    if isinstance(H, HamiltonianSet):
        H = [H]
    H = list(H)
    if len(H) != len(psi0.components):
        raise ValueError("need one HamiltonianSet per state component")
    for h, c in zip(H, psi0.components):
        if h.dimension != len(c.basis):
            raise ValueError("operator and component dimensions differ")
    if abs(psi0.norm() - 1.0) > 1e-10:
        raise ValueError(f"initial state must be normalized (norm {psi0.norm()!r})")
    g = H[0].g
    lo, hi = _check_window(pulse, window)
    law = resolve_law(law)
    times = sample_times((lo, hi), cfg.sample_interval)
    steppers = [_ComponentStepper(h, cfg, pulse) for h in H]

    psi = psi0.copy()
    projector = LadderProjector(psi)
    n_lad = len(projector.amplitudes(psi))
    exc_masks = [c.basis.excited > 0 for c in psi.components]
    photons = [c.basis.photons.astype(float) for c in psi.components]

    ns = len(times)
    omega = np.asarray(evaluate(pulse, times), dtype=float)
    norm = np.zeros(ns)
    nraw = np.zeros(ns)
    pexc = np.zeros(ns)
    pdark = np.zeros(ns)
    plad = np.zeros((ns, n_lad))

    def record(i):
        pops = [np.abs(c.amplitudes) ** 2 for c in psi.components]
        tot = sum(float(p.sum()) for p in pops)
        norm[i] = math.sqrt(tot)
        nraw[i] = sum(float(p @ ph) for p, ph in zip(pops, photons))
        pexc[i] = sum(float(p[m].sum()) for p, m in zip(pops, exc_masks))
        amps = projector.amplitudes(psi)
        plad[i] = np.abs(amps) ** 2
        coeffs = dark_coefficients(psi.M, omega[i] / g, law, projector.mode).coefficients
        pdark[i] = abs(np.dot(coeffs, amps)) ** 2

    record(0)
    for i in range(1, ns):
        for st, comp in zip(steppers, psi.components):
            comp.amplitudes = st.step(comp.amplitudes, times[i - 1], times[i])
        record(i)

    with np.errstate(divide="ignore", invalid="ignore"):
        ncond = np.where(norm > 0, nraw / norm ** 2, 0.0)
    stats = {
        "backend": kernels.BACKEND if cfg.backend is None else cfg.backend,
        "method": cfg.method,
        "accepted_steps": int(sum(s.n_acc for s in steppers)),
        "rejected_steps": int(sum(s.n_rej for s in steppers)),
    }
    return Trajectory(times, omega, norm, nraw, ncond, pdark, pexc, plad, psi, psi.M, law, stats)


@dataclass(frozen=True)
class LossIntegral:
    kappa: float
    kappa_integral: float
    integral: float
    integral_cond: float

    def as_dict(self) -> dict:
        return {"kappa": self.kappa, "kappa_integral": self.kappa_integral,
                "integral_raw": self.integral, "integral_cond": self.integral_cond}


def loss_integral(traj: Trajectory, kappa: float = 0.0) -> LossIntegral:
    """Trapezoidal ``kappa * int n_ph dt`` plus the kappa-free integrals.

    Times are in units of ``1/Gamma``, so ``integral`` is ``Gamma int n_ph dt``.
    """
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    raw = float(np.trapezoid(traj.n_ph_raw, traj.times)) if len(traj.times) > 1 else 0.0
    cond = float(np.trapezoid(traj.n_ph_cond, traj.times)) if len(traj.times) > 1 else 0.0
    return LossIntegral(kappa, kappa * raw, raw, cond)


@dataclass
class PeakPhotonReport:
    times: np.ndarray
    n_ph: np.ndarray
    target: np.ndarray
    region: np.ndarray
    max_relative_deviation: float

    def summary(self) -> dict:
        return {"max_relative_deviation": self.max_relative_deviation,
                "points_in_region": int(self.region.sum())}


def peak_photon_check(traj: Trajectory, pulse: PulseShape, g: float) -> PeakPhotonReport:
    """Compare ``n_ph(t)`` with ``min(Omega/g, M-1)`` where ``Omega > g``."""
    om = traj.Omega
    target = np.minimum(np.abs(om) / g, traj.M - 1)
    region = np.abs(om) > g
    dev = np.abs(traj.n_ph_cond - target) / np.where(target > 0, target, 1.0)
    worst = float(dev[region].max()) if region.any() else 0.0
    return PeakPhotonReport(traj.times, traj.n_ph_cond, target, region, worst)
