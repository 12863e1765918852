"""Single simulation runs with persisted artifacts and a digest manifest."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__, kernels
from ..measurement import measure_all, rotate_35
from ..operators import OperatorError
from ..propagator import PropagationError, Trajectory, hamiltonians_for, loss_integral, propagate
from ..pulses import PulseError, adiabaticity_report
from ..statespace import StateSpaceError, make_initial_state, state_to_json
from .config import RunConfig

ARTIFACTS = ("trajectory.csv", "summary.json", "final_state.json")


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def sha256_of(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _finite(x):
    """JSON-safe float (non-finite values become strings)."""
    x = float(x)
    return x if math.isfinite(x) else str(x)


@dataclass
class RunManifest:
    config: dict
    status: str
    code_version: str
    backend: str
    started: str
    finished: str
    observables: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)
    error: str | None = None
    notes: list[str] = field(default_factory=list)
    trajectory: Trajectory | None = field(default=None, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return {
            "config": self.config, "status": self.status, "code_version": self.code_version,
            "backend": self.backend, "started": self.started, "finished": self.finished,
            "observables": self.observables, "files": self.files, "error": self.error,
            "notes": self.notes,
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def verify_digests(self, outdir: str | Path) -> dict[str, bool]:
        return {name: sha256_of(Path(outdir) / name) == digest for name, digest in self.files.items()}


def headline_observables(cfg: RunConfig, traj: Trajectory) -> dict:
    """Final populations, loss integrals, adiabaticity margins and measurement summary."""
    pulse = cfg.pulse_shape()
    li = loss_integral(traj, cfg.kappa)
    margins = adiabaticity_report(pulse, traj, cfg.g, cfg.Gamma) if cfg.Gamma > 0 else None
    obs = {
        "final_norm": float(traj.norm[-1]),
        "final_P_dark": float(traj.P_dark[-1]),
        "final_P_dark_cond": float(traj.P_dark_cond[-1]),
        "final_P_exc": float(traj.P_exc[-1]),
        "final_n_ph_cond": float(traj.n_ph_cond[-1]),
        "max_n_ph_cond": float(traj.n_ph_cond.max()),
        "loss_integral_raw": li.integral,
        "loss_integral_cond": li.integral_cond,
        "kappa_loss_integral": li.kappa_integral,
        "dark_law": traj.dark_law,
        "accepted_steps": traj.stats.get("accepted_steps"),
        "rejected_steps": traj.stats.get("rejected_steps"),
    }
    if margins is not None:
        obs.update({k: _finite(v) for k, v in margins.summary().items()})
    obs["measurement"] = measurement_summary(cfg, traj)
    return obs


def measurement_summary(cfg: RunConfig, traj: Trajectory) -> dict:
    psi = traj.final_state
    nrm = psi.norm()
    if nrm == 0:
        return {"outcomes": [], "best_fidelity": None, "best_K": None}
    rotated = rotate_35(psi, cfg.rotation_spec())
    outs = [o for o in measure_all(rotated) if o.defined]
    best = max(outs, key=lambda o: o.fidelity) if outs else None
    return {
        "outcomes": [{"K": o.K, "probability": o.probability, "fidelity": _finite(o.fidelity),
                      "sign": o.expected_sign} for o in outs],
        "best_fidelity": _finite(best.fidelity) if best else None,
        "best_K": best.K if best else None,
        # probability-weighted with the known heralded sign
        "mean_fidelity": _finite(sum(o.probability * o.fidelity for o in outs) / nrm ** 2) if outs else None,
    }


def simulate(cfg: RunConfig) -> Trajectory:
    """Run the dynamics for ``cfg`` without touching the filesystem."""
    psi0 = make_initial_state(cfg.alpha, cfg.beta, cfg.M, cfg.initial_mode)
    H = hamiltonians_for(psi0, cfg.g, cfg.Gamma, cfg.decay_convention)
    return propagate(psi0, H, cfg.pulse_shape(), cfg.time_window(), cfg.integrator_config(), cfg.dark_law)


def run_simulation(cfg: RunConfig, outdir: str | Path | None = None) -> RunManifest:
    """Simulate, write artifacts to ``outdir`` (if given) and return the manifest.

    Propagation errors do not raise; the manifest is marked ``failed``.
    """
    started = _now()
    manifest = RunManifest(
        config=cfg.to_dict(), status="running", code_version=__version__,
        backend=cfg.integrator_config().backend or kernels.BACKEND,
        started=started, finished=started,
        notes=["golden trajectories are self-referential regressions"],
    )
    out = Path(outdir) if outdir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    try:
        traj = simulate(cfg)
        manifest.trajectory = traj
        manifest.observables = headline_observables(cfg, traj)
        manifest.status = "ok"
    except (PropagationError, PulseError, OperatorError, StateSpaceError, ValueError) as exc:
        manifest.status = "failed"
        manifest.error = f"{type(exc).__name__}: {exc}"
        traj = None
    manifest.finished = _now()
    if out is not None:
        if traj is not None:
            traj.to_csv(out / "trajectory.csv")
            (out / "final_state.json").write_text(json.dumps(state_to_json(traj.final_state)) + "\n")
            summary = {"observables": manifest.observables, "columns": traj.columns()}
            (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
            manifest.files = {name: sha256_of(out / name) for name in ARTIFACTS}
        manifest.write(out / "manifest.json")
    return manifest


def trajectory_arrays(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read back a trajectory CSV as ``(columns, data)``."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
