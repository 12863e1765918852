"""Command-line entry point ``noonsim``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .darkstate import analytic_dark_state, numerical_null_state, null_residual, resolve_law
from .harness.config import PRESETS, ConfigError, load_config, preset
from .harness.runner import run_simulation
from .harness.sweep import SweepSpec, run_sweep
from .harness.validate import validate, write_goldens
from .measurement import MeasurementError, RotationSpec, detection_probability, measure_all, rotate_35
from .operators import hamiltonian_for
from .pulses import pulse_table
from .statespace import ALPHA, StateSpaceError, enumerate_sector, state_from_json


def _config(args):
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError("give --config or --preset")
    if getattr(args, "M", None) is not None:
        cfg = cfg.with_(M=args.M, name=f"{cfg.name}_M{args.M}")
    return cfg


def _print(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = Path(args.out) if args.out else Path("runs") / cfg.name
    m = run_simulation(cfg, out)
    if args.dump_operators and m.ok:
        from .propagator import hamiltonians_for
        from .statespace import make_initial_state

        psi0 = make_initial_state(cfg.alpha, cfg.beta, cfg.M, cfg.initial_mode)
        for k, H in enumerate(hamiltonians_for(psi0, cfg.g, cfg.Gamma, cfg.decay_convention)):
            for name, op in (("pump", H.H_pump), ("cavity", H.H_cav)):
                with open(out / f"operator_{k}_{name}.txt", "w") as fh:
                    op.dump(fh)
    summary = {"status": m.status, "output": str(out), "error": m.error}
    if m.ok:
        obs = m.observables
        summary.update({k: obs[k] for k in ("final_P_dark", "final_norm", "loss_integral_raw",
                                             "loss_integral_cond")})
    _print(summary)
    return 0 if m.ok else 1


def cmd_sweep(args) -> int:
    spec = SweepSpec.load(args.spec)
    if args.jobs is not None:
        spec = SweepSpec(spec.template, spec.axes, args.jobs, spec.max_points)
    out = Path(args.out) if args.out else Path("sweeps") / Path(args.spec).stem
    res = run_sweep(spec, out)
    _print({"points": spec.n_points, "ok": len(res.rows), "failed": len(res.failures),
            "aggregate": str(res.aggregate_path)})
    return 0 if res.ok else 1


def cmd_darkstate(args) -> int:
    M, r = args.M, args.omega_over_g
    law = resolve_law(args.law)
    basis = enumerate_sector(M, ALPHA)
    psi = analytic_dark_state(r, 1.0, M, 1.0, 0.0, law=law)
    amps = psi.components[0].amplitudes
    out = {"M": M, "omega_over_g": r, "law": law,
           "amplitudes": [{"state": list(s), "re": float(a.real), "im": float(a.imag)}
                          for s, a in zip(basis.states, amps) if a != 0]}
    status = 0
    if args.validate:
        H = hamiltonian_for(basis, 1.0, 0.0)
        ns = numerical_null_state(H, r)
        ov = float(abs(np.vdot(ns.amplitudes, amps)) ** 2)
        res = null_residual(H, r, amps)
        out["validation"] = {"overlap": ov, "residual": res, "null_dimension": ns.null_dimension}
        status = 0 if (ov > 1 - 1e-8 and res < 1e-8) else 1
    if args.dump_basis:
        out["basis"] = basis.to_records()
    _print(out)
    return status


def cmd_measure(args) -> int:
    with open(args.state) as fh:
        psi = state_from_json(json.load(fh))
    rotated = rotate_35(psi, RotationSpec(reflect=args.reflect))
    outs = measure_all(rotated, p=args.p)
    rows = [{"K": o.K, "probability": o.probability,
             "fidelity": None if not o.defined else o.fidelity, "sign": o.expected_sign}
            for o in outs]
    result = {"outcomes": rows}
    if args.p is not None:
        result["detection_weights"] = [vars(detection_probability(psi.M, K, args.p, form))
                                       for K in range(psi.M + 1) for form in ("literal", "derived")]
    _print(result)
    return 0


def cmd_pulse(args) -> int:
    cfg = _config(args)
    tab = pulse_table(cfg.pulse_shape(), args.dt)
    w = sys.stdout
    w.write("t,Omega,dOmega_dt\n")
    for row in tab:
        w.write(",".join(repr(float(v)) for v in row) + "\n")
    return 0


def cmd_validate(args) -> int:
    if args.write_goldens:
        write_goldens(args.write_goldens)
        return 0
    cfg = _config(args) if (args.config or args.preset) else None
    if cfg is None:
        from .harness.config import RunConfig

        cfg = RunConfig(M=args.M or 2, pulse={"variant": "steep"},
                        decay_convention=args.decay_convention or "amplitude")
    elif args.decay_convention:
        cfg = cfg.with_(decay_convention=args.decay_convention)
    rep = validate(cfg)
    _print(rep.as_dict())
    return 0 if rep.ok else 1


def _add_config_args(p, with_M=True) -> None:
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--preset", choices=PRESETS)
    if with_M:
        p.add_argument("--M", type=int, help="override the atom number")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="noonsim", description="Cavity NOON-state dark-state simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one configuration")
    _add_config_args(p)
    p.add_argument("--out", help="output directory (default runs/<name>)")
    p.add_argument("--dump-operators", action="store_true", help="write sparse operators as coordinate lists")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("--spec", required=True)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("darkstate", help="analytic dark state of one branch")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--omega-over-g", type=float, required=True)
    p.add_argument("--law", default="auto")
    p.add_argument("--validate", action="store_true")
    p.add_argument("--dump-basis", action="store_true")
    p.set_defaults(func=cmd_darkstate)

    p = sub.add_parser("measure", help="rotate and measure a saved final state")
    p.add_argument("--state", required=True)
    p.add_argument("--p", type=float, help="detector efficiency (lossy heralding)")
    p.add_argument("--reflect", action="store_true", help="use the reflecting 3-5 mixing")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("pulse", help="tabulate a pulse")
    _add_config_args(p, with_M=False)
    p.add_argument("--table", action="store_true", help="print t, Omega, dOmega/dt as CSV")
    p.add_argument("--dt", type=float, default=0.01)
    p.set_defaults(func=cmd_pulse)

    p = sub.add_parser("validate", help="run the oracle checks")
    _add_config_args(p)
    p.add_argument("--decay-convention", choices=("amplitude", "population"))
    p.add_argument("--write-goldens", metavar="PATH")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "pulse" and not (args.config or args.preset):
        args.preset = "fig3"
    try:
        return args.func(args)
    except (ConfigError, MeasurementError, StateSpaceError, FileNotFoundError) as exc:
        print(f"noonsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
