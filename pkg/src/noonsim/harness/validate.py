"""Oracle checks over one configuration, collected into a pass/fail report."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..darkstate import analytic_dark_state, numerical_null_state, null_residual, select_coefficient_law
from ..measurement import compare_detection_formulas
from ..operators import build_hamiltonian_set, hamiltonian_for
from ..oracles import first_quantized_hamiltonian
from ..propagator import IntegratorConfig, loss_integral, propagate
from ..pulses import Steep
from ..statespace import ALPHA, BETA, BRANCHES, enumerate_sector, make_initial_state, neighbours
from .config import RunConfig

FIRST_QUANTIZED_MAX_M = 4
NULL_RATIOS = (0.1, 1.0, 10.0, 100.0)
GOLDEN_KEYS = ("final_norm", "loss_integral_raw", "final_P_dark")
GOLDEN_RTOL = 1e-6


@dataclass
class OracleResult:
    name: str
    status: str  # "pass", "fail" or "skipped"
    residual: float | None = None
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        r = self.residual
        return {"name": self.name, "status": self.status,
                "residual": None if r is None else (r if math.isfinite(r) else str(r)),
                "detail": self.detail}


@dataclass
class ValidationReport:
    M: int
    results: list[OracleResult]

    @property
    def ok(self) -> bool:
        return all(r.status != "fail" for r in self.results)

    def by_name(self) -> dict[str, OracleResult]:
        return {r.name: r for r in self.results}

    def as_dict(self) -> dict:
        return {"M": self.M, "ok": self.ok, "results": [r.as_dict() for r in self.results]}


def check_sector_closure(M: int) -> OracleResult:
    """Every coupling from every state stays inside its sector; branches share no state."""
    leaks = 0
    for sector in BRANCHES.values():
        basis = enumerate_sector(M, sector)
        for s in basis.states:
            for t, amp in neighbours(s):
                if amp != 0.0 and t not in basis.index:
                    leaks += 1
    overlap = len(set(enumerate_sector(M, ALPHA).states) & set(enumerate_sector(M, BETA).states))
    bad = leaks + overlap
    return OracleResult("sector_closure", "pass" if bad == 0 else "fail", float(bad),
                        {"leaking_couplings": leaks, "shared_branch_states": overlap})


def check_first_quantized(M: int, tol: float = 1e-12) -> OracleResult:
    if M > FIRST_QUANTIZED_MAX_M:
        return OracleResult("first_quantized", "skipped",
                            detail={"reason": f"M={M} exceeds {FIRST_QUANTIZED_MAX_M} (6^M atom space)"})
    fq = first_quantized_hamiltonian(M, cutoff=M)
    worst = 0.0
    detail = {}
    for name, sector in (("alpha", ALPHA), ("beta", BETA)):
        basis = enumerate_sector(M, sector)
        H = build_hamiltonian_set(basis, 1.0, 1.0)
        ref = fq.project(basis)
        diffs = {
            "H_pump": float(np.max(np.abs(ref["H_pump"] - H.H_pump.matrix.toarray()))),
            "H_cav": float(np.max(np.abs(ref["H_cav"] - H.H_cav.matrix.toarray()))),
            "D_decay": float(np.max(np.abs(ref["D_decay"] - np.diag(H.D_decay)))),
        }
        detail[name] = diffs
        worst = max(worst, *diffs.values())
    return OracleResult("first_quantized", "pass" if worst <= tol else "fail", worst, detail)


def check_null_state(M: int, ratios=NULL_RATIOS, law: str = "auto") -> OracleResult:
    worst_overlap_defect = 0.0
    worst_resid = 0.0
    rows = []
    law = select_coefficient_law() if law == "auto" else law
    basis = enumerate_sector(M, ALPHA)
    H = hamiltonian_for(basis, 1.0, 0.0)
    for r in ratios:
        D = analytic_dark_state(r, 1.0, M, 1.0, 0.0, law=law).components[0].amplitudes
        try:
            ns = numerical_null_state(H, r)
            ov = float(abs(np.vdot(ns.amplitudes, D)) ** 2)
        except Exception as exc:  # report, do not raise
            rows.append({"ratio": r, "error": str(exc)})
            worst_overlap_defect = math.inf
            continue
        res = null_residual(H, r, D)
        rows.append({"ratio": r, "overlap": ov, "residual": res, "null_dimension": ns.null_dimension})
        worst_overlap_defect = max(worst_overlap_defect, 1.0 - ov)
        worst_resid = max(worst_resid, res)
    ok = worst_overlap_defect < 1e-8 and worst_resid < 1e-8
    return OracleResult("null_state", "pass" if ok else "fail", max(worst_overlap_defect, worst_resid),
                        {"law": law, "rows": rows})


def check_detector(M: int) -> OracleResult:
    """Closed-form detection weights against the brute-force detector model.

    Pass requires the derived closed form to agree everywhere.  Rows where
    the literal formula disagrees are reported in ``detail``.
    """
    rep = compare_detection_formulas(Ms=range(1, min(M, 6) + 1))
    worst = max(abs(r.derived - r.brute) for r in rep.rows)
    disc = [{"M": r.M, "K": r.K, "p": r.p, "literal": r.literal_normalized, "brute": r.brute_normalized}
            for r in rep.discrepancies]
    p0_ok = all(r.literal_matches for r in rep.rows if r.p == 0.0)
    ok = worst <= 1e-12 and p0_ok
    return OracleResult("detector", "pass" if ok else "fail", worst,
                        {"literal_formula_discrepancies": len(disc), "examples": disc[:6],
                         "literal_matches_at_p0": p0_ok})


def golden_probe(M: int, decay_convention: str) -> dict:
    """Short steep-pulse run whose observables are stored as regression goldens."""
    pulse = Steep()
    psi0 = make_initial_state(1.0, 0.0, M)
    H = hamiltonian_for(psi0.components[0].basis, 1.0, 1.0, decay_convention)
    traj = propagate(psi0, H, pulse, (0.0, 1.0), IntegratorConfig(sample_interval=0.01))
    return {"final_norm": float(traj.norm[-1]),
            "loss_integral_raw": loss_integral(traj).integral,
            "final_P_dark": float(traj.P_dark[-1])}


def load_goldens(path: str | Path | None = None) -> dict:
    if path is not None:
        return json.loads(Path(path).read_text())
    text = resources.files("noonsim").joinpath("data").joinpath("goldens.json").read_text()
    return json.loads(text)


def write_goldens(path: str | Path, Ms=(2, 3, 4)) -> dict:
    data = {"reference_convention": "amplitude", "probe": "steep pulse on [0, 1], g = Gamma = 1, alpha branch",
            "values": {str(M): golden_probe(M, "amplitude") for M in Ms}}
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return data


def check_goldens(M: int, decay_convention: str, goldens: dict | None = None) -> OracleResult:
    goldens = goldens if goldens is not None else load_goldens()
    ref = goldens["values"].get(str(M))
    if ref is None:
        return OracleResult("goldens", "skipped", detail={"reason": f"no stored golden for M={M}"})
    got = golden_probe(M, decay_convention)
    rel = max(abs(got[k] - ref[k]) / max(abs(ref[k]), 1e-300) for k in GOLDEN_KEYS)
    return OracleResult("goldens", "pass" if rel <= GOLDEN_RTOL else "fail", rel,
                        {"expected": ref, "got": got, "decay_convention": decay_convention,
                         "reference_convention": goldens.get("reference_convention")})


def validate(cfg: RunConfig | None = None, goldens: dict | None = None) -> ValidationReport:
    """Run every oracle for ``cfg.M``; failures are report content, not exceptions."""
    cfg = cfg or RunConfig(M=2, pulse={"variant": "steep"})
    M = cfg.M
    results = [
        check_sector_closure(M),
        check_first_quantized(M),
        check_null_state(M, law=cfg.dark_law),
        check_detector(M),
        check_goldens(M, cfg.decay_convention, goldens),
    ]
    return ValidationReport(M, results)
