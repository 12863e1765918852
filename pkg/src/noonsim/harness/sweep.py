"""Cartesian parameter sweeps over run configurations."""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..pulses import Gaussian, pulse_from_config, pulse_to_config
from .config import ConfigError, RunConfig
from .runner import RunManifest, run_simulation

AXES = ("M", "g", "Gamma", "kappa", "speed", "cooperativity", "decay_convention", "alpha")
AGGREGATE_COLUMNS = ("point", "final_P_dark", "final_P_dark_cond", "final_norm", "loss_integral_raw",
                     "loss_integral_cond", "kappa_loss_integral", "min_margin_empty", "min_margin_photon")


@dataclass(frozen=True)
class SweepSpec:
    """Axes are applied to ``template`` in the listed order.

    ``speed`` stretches a Gaussian pulse in time by the given factor and
    ``cooperativity`` sets ``kappa = g^2 / (C Gamma)``.
    """

    template: dict
    axes: dict = field(default_factory=dict)
    jobs: int = 1
    max_points: int = 1000

    def __post_init__(self):
        bad = set(self.axes) - set(AXES)
        if bad:
            raise ConfigError(f"unknown sweep axes {sorted(bad)}; allowed {AXES}")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.n_points > self.max_points:
            raise ConfigError(f"sweep has {self.n_points} points, cap is {self.max_points}")

    @property
    def n_points(self) -> int:
        if not self.axes:
            return 0
        return math.prod(len(v) for v in self.axes.values())

    def points(self) -> list[dict]:
        if not self.axes:
            return []
        names = list(self.axes)
        return [dict(zip(names, combo)) for combo in itertools.product(*(self.axes[n] for n in names))]

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        unknown = set(data) - {"template", "axes", "jobs", "max_points"}
        if unknown:
            raise ConfigError(f"unknown sweep keys {sorted(unknown)}")
        return cls(template=data["template"], axes=dict(data.get("axes", {})),
                   jobs=int(data.get("jobs", 1)), max_points=int(data.get("max_points", 1000)))

    @classmethod
    def load(cls, path: str | Path) -> "SweepSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {"template": self.template, "axes": self.axes, "jobs": self.jobs, "max_points": self.max_points}


def point_config(template: dict, point: dict) -> RunConfig:
    d = dict(template)
    for name, value in point.items():
        if name == "speed":
            pulse = pulse_from_config(d["pulse"])
            if not isinstance(pulse, Gaussian):
                raise ConfigError("the speed axis needs a Gaussian pulse")
            d["pulse"] = pulse_to_config(pulse.scaled(float(value)))
            if d.get("window") is not None:
                d["window"] = [float(w) * float(value) for w in d["window"]]
        elif name == "cooperativity":
            g, gam = float(d.get("g", 1.0)), float(d.get("Gamma", 1.0))
            d["kappa"] = g * g / (float(value) * gam)
        elif name == "alpha":
            d["alpha"] = float(value)
            d["beta"] = math.sqrt(max(0.0, 1.0 - float(value) ** 2))
        else:
            d[name] = value
    d["name"] = "_".join(f"{k}{v}" for k, v in point.items()) or d.get("name", "run")
    return RunConfig.from_dict(d)


def _run_point(args) -> tuple[int, dict, dict]:
    idx, template, point, outdir = args
    try:
        cfg = point_config(template, point)
    except ConfigError as exc:
        return idx, point, {"status": "failed", "error": f"ConfigError: {exc}", "observables": {}}
    target = Path(outdir) / f"point_{idx:04d}" if outdir is not None else None
    m: RunManifest = run_simulation(cfg, target)
    return idx, point, {"status": m.status, "error": m.error, "observables": m.observables}


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[dict]
    failures: list[dict]
    aggregate_path: Path | None = None

    @property
    def ok(self) -> bool:
        return not self.failures

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)


def run_sweep(spec: SweepSpec, outdir: str | Path | None = None) -> SweepResult:
    """Run every point (concurrently when ``jobs > 1``) and aggregate.

    Failed points are listed in ``failures`` and left out of the aggregate.
    """
    points = spec.points()
    out = Path(outdir) if outdir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    tasks = [(i, spec.template, p, str(out) if out else None) for i, p in enumerate(points)]
    if spec.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_run_point, tasks))
    else:
        results = [_run_point(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    axis_names = list(spec.axes)
    rows, failures = [], []
    for idx, point, res in results:
        if res["status"] != "ok":
            failures.append({"point": idx, **point, "error": res["error"]})
            continue
        obs = res["observables"]
        row = {"point": idx, **point}
        for c in AGGREGATE_COLUMNS[1:]:
            row[c] = obs.get(c, math.nan)
        rows.append(row)
    result = SweepResult(spec, rows, failures)
    if out is not None:
        path = out / "aggregate.csv"
        cols = ["point"] + axis_names + list(AGGREGATE_COLUMNS[1:])
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
            w.writeheader()
            for r in rows:
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        (out / "sweep.json").write_text(json.dumps(
            {"spec": spec.to_dict(), "n_points": len(points), "n_ok": len(rows), "failures": failures},
            indent=2, sort_keys=True) + "\n")
        result.aggregate_path = path
    return result


def monotone_violations(values, tol: float = 0.0) -> int:
    """Number of decreases in ``values`` larger than ``tol``."""
    v = np.asarray(values, dtype=float)
    return int(np.sum(np.diff(v) < -tol))


@dataclass
class CooperativityScaling:
    Ms: list[int]
    min_cooperativity: list[float]
    log_fit: dict
    linear_fit: dict
    loss_threshold: float
    dark_threshold: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("Ms", "min_cooperativity", "log_fit", "linear_fit",
                                               "loss_threshold", "dark_threshold")}


def minimal_cooperativity(loss_integral_raw: float, final_P_dark: float, cooperativities,
                          g: float = 1.0, Gamma: float = 1.0, loss_threshold: float = 0.1,
                          dark_threshold: float = 0.9) -> float:
    """Smallest ``C`` on the grid with ``kappa int n_ph dt < loss_threshold`` and enough dark population.

    The cavity loss rate enters only this diagnostic, so one trajectory
    serves all cooperativities.
    """
    if final_P_dark <= dark_threshold:
        return math.inf
    for C in sorted(cooperativities):
        kappa = g * g / (C * Gamma)
        if kappa * loss_integral_raw < loss_threshold:
            return float(C)
    return math.inf


def _fit(x, y) -> dict:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2:
        return {"slope": math.nan, "intercept": math.nan, "rms_residual": math.nan}
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return {"slope": float(coef[0]), "intercept": float(coef[1]),
            "rms_residual": float(np.sqrt(np.mean(resid ** 2)))}


def cooperativity_scaling(results: dict[int, tuple[float, float]], cooperativities,
                          g: float = 1.0, Gamma: float = 1.0, loss_threshold: float = 0.1,
                          dark_threshold: float = 0.9) -> CooperativityScaling:
    """Fit ``C_min(M)`` against ``ln M`` and against ``M``.

    ``results`` maps M to ``(loss_integral_raw, final_P_dark)``.  Only M with
    a finite minimal cooperativity enter the fits.
    """
    Ms = sorted(results)
    cmin = [minimal_cooperativity(*results[M], cooperativities, g, Gamma, loss_threshold, dark_threshold)
            for M in Ms]
    fin = [(M, c) for M, c in zip(Ms, cmin) if math.isfinite(c)]
    xs = [M for M, _ in fin]
    ys = [c for _, c in fin]
    return CooperativityScaling(Ms, cmin, _fit(np.log(xs) if xs else [], ys), _fit(xs, ys),
                                loss_threshold, dark_threshold)
