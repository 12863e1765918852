import json
import subprocess
import sys

import pytest

from noonsim.cli import main
from noonsim.harness import RunConfig, save_config


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_preset_and_measure(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "simulate", "--preset", "fig3", "--out", str(tmp_path / "r"))
    assert code == 0
    assert json.loads(out)["status"] == "ok"
    assert (tmp_path / "r" / "manifest.json").exists()
    code, out, _ = run_cli(capsys, "measure", "--state", str(tmp_path / "r" / "final_state.json"))
    assert code == 0
    rows = json.loads(out)["outcomes"]
    assert [r["K"] for r in rows] == [0, 1, 2, 3]
    assert {"K", "probability", "fidelity", "sign"} <= set(rows[0])
    code, out, _ = run_cli(capsys, "measure", "--state", str(tmp_path / "r" / "final_state.json"), "--p", "0.9")
    assert code == 0 and "detection_weights" in json.loads(out)


def test_simulate_with_override_and_operator_dump(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "simulate", "--preset", "smoke", "--M", "2",
                           "--out", str(tmp_path / "s"), "--dump-operators")
    assert code == 0
    dumps = sorted(p.name for p in (tmp_path / "s").glob("operator_*.txt"))
    assert dumps == ["operator_0_cavity.txt", "operator_0_pump.txt"]


def test_failed_run_exits_nonzero(tmp_path, capsys):
    cfg = RunConfig(M=2, pulse={"variant": "steep"}, integrator={"min_step": 10.0})
    save_config(cfg, tmp_path / "bad.json")
    code, out, _ = run_cli(capsys, "simulate", "--config", str(tmp_path / "bad.json"), "--out", str(tmp_path / "o"))
    assert code == 1
    assert json.loads(out)["status"] == "failed"


def test_invalid_config_reports_error(tmp_path, capsys):
    (tmp_path / "c.json").write_text('{"M": 2}')
    code, _, err = run_cli(capsys, "simulate", "--config", str(tmp_path / "c.json"))
    assert code == 2 and "error" in err


def test_sweep_command(tmp_path, capsys):
    spec = {"template": RunConfig(M=2, pulse={"variant": "steep"}, integrator={"sample_interval": 0.1}).to_dict(),
            "axes": {"M": [2, 3]}}
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    code, out, _ = run_cli(capsys, "sweep", "--spec", str(tmp_path / "spec.json"), "--jobs", "1",
                           "--out", str(tmp_path / "sw"))
    assert code == 0 and json.loads(out)["ok"] == 2
    (tmp_path / "empty.json").write_text(json.dumps({"template": spec["template"], "axes": {}}))
    code, out, _ = run_cli(capsys, "sweep", "--spec", str(tmp_path / "empty.json"), "--out", str(tmp_path / "e"))
    assert code == 0 and json.loads(out)["points"] == 0
    bad = {"template": spec["template"], "axes": {"speed": [2.0]}}
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    code, _, _ = run_cli(capsys, "sweep", "--spec", str(tmp_path / "bad.json"), "--out", str(tmp_path / "b"))
    assert code == 1


def test_darkstate_command(capsys):
    code, out, _ = run_cli(capsys, "darkstate", "--M", "3", "--omega-over-g", "2.0", "--validate", "--dump-basis")
    data = json.loads(out)
    assert code == 0
    assert data["law"] == "collective"
    assert data["validation"]["overlap"] > 1 - 1e-8
    assert len(data["basis"]) == 16
    assert sum(a["re"] ** 2 + a["im"] ** 2 for a in data["amplitudes"]) == pytest.approx(1.0)


def test_pulse_table(capsys):
    code, out, _ = run_cli(capsys, "pulse", "--table", "--preset", "fig3", "--dt", "0.5")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "t,Omega,dOmega_dt"
    assert len(lines) == 6


def test_validate_command(capsys):
    code, out, _ = run_cli(capsys, "validate", "--M", "2")
    assert code == 0 and json.loads(out)["ok"]
    code, out, _ = run_cli(capsys, "validate", "--M", "2", "--decay-convention", "population")
    assert code == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "noonsim.cli", "darkstate", "--M", "2", "--omega-over-g", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["M"] == 2
