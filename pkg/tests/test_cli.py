"""Command-line contract: reports, formats, config files and exit codes."""
import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from nonlocal_trace.cli import RunConfig, load_config, main
from nonlocal_trace.symbol_core import get_precision, set_precision


@pytest.fixture(autouse=True)
def _restore_precision():
    dps = get_precision()
    yield
    set_precision(dps)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def value_of(report):
    return float(report["value"]["value"])


def test_fp_smoothing_symbol(capsys):
    code, out, _ = run(capsys, "fp", "--symbol", "1/|xi|^2", "--n", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["value"]["rational"] == "2" and rep["value"]["pi_power"] == -1
    assert value_of(rep) == pytest.approx(2 / math.pi)


def test_c0_equals_fp_for_smoothing_symbol(capsys):
    _, fp_out, _ = run(capsys, "fp", "-a", "1/|xi|^2", "--n", "1")
    code, c0_out, _ = run(capsys, "c0", "-a", "1/|xi|^2", "--n", "1", "--m", "4")
    assert code == 0
    assert json.loads(c0_out)["value"] == json.loads(fp_out)["value"]


def test_expand_model_precondition(capsys):
    code, _, err = run(capsys, "expand", "-a", "|xi|", "--n", "1", "--m", "2")
    assert code == 1
    assert "m > sigma + n" in err


def test_missing_dimension_is_usage_error(capsys):
    code, _, err = run(capsys, "fp", "-a", "1")
    assert code == 2
    assert "--n" in err and "grammar" in err


def test_malformed_symbol_is_usage_error(capsys):
    code, _, err = run(capsys, "fp", "-a", "xi1 + xi2^2", "--n", "2")
    assert code == 2
    assert "homogeneous" in err


def test_unknown_flag_and_missing_subcommand(capsys):
    assert run(capsys, "fp", "--bogus")[0] == 2
    assert run(capsys)[0] == 2


def test_expand_with_zeta(capsys):
    code, out, _ = run(capsys, "expand", "-a", "1/|xi|", "--n", "1", "--N", "2", "--zeta")
    assert code == 0
    rep = json.loads(out)
    assert rep["zeta_regular_value"]["rational"] == "1/2"
    assert "0" in rep["zeta"]["poles"]


def test_defect_two_ways(capsys):
    code, out, _ = run(capsys, "defect", "-a", "1/|xi|", "--n", "1", "--p", "4*|xi|^2", "--p2", "|xi|^2")
    assert code == 0
    rep = json.loads(out)
    expected = -0.5 * math.log(4) / math.pi
    assert value_of(rep) == pytest.approx(expected, rel=1e-12)
    assert float(rep["difference_coefficient"]["value"]) == pytest.approx(expected, rel=1e-12)


def test_res_with_log_operator(capsys):
    code, out, _ = run(capsys, "res", "-a", "1/|xi|", "--n", "1", "--p", "4*|xi|^2")
    assert code == 0
    rep = json.loads(out)
    assert float(rep["res_x0_log"]["value"]) == pytest.approx(math.log(4) / math.pi)


def test_logsym_rows(capsys):
    code, out, _ = run(capsys, "logsym", "--p", "|xi|^2; 1", "--n", "1", "--J", "4")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [(r["degree"], r["log_power"]) for r in rows] == [("0", 1), ("-2", 0), ("-4", 0)]


def test_csv_and_pretty_formats(capsys):
    code, out, _ = run(capsys, "fp", "-a", "1/|xi|; 1/|xi|^2", "--n", "1", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["quantity"] == "TR_x" and len(rows) == 3
    code, out, _ = run(capsys, "fp", "-a", "1/|xi|", "--n", "1", "--format", "pretty")
    assert code == 0 and "TR_x: 1/2*pi^-1" in out


def test_extension_override(capsys):
    _, a, _ = run(capsys, "fp", "-a", "1/|xi|", "--n", "1")
    _, b, _ = run(capsys, "fp", "-a", "1/|xi|", "--n", "1", "--extension=-1=4")
    assert json.loads(a)["value"] != json.loads(b)["value"]
    assert json.loads(b)["report"]["terms"][0]["K"] == 4
    assert run(capsys, "fp", "-a", "1/|xi|", "--n", "1", "--extension", "oops")[0] == 2


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"symbol": "1/|xi|", "n": 1, "format": "csv"}))
    cfg_obj = load_config(["fp", "--config", str(cfg), "--format", "json"])
    assert cfg_obj.symbol == "1/|xi|" and cfg_obj.format == "json"
    code, out, _ = run(capsys, "fp", "--config", str(cfg))
    assert code == 0 and out.startswith("quantity")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert run(capsys, "fp", "--config", str(bad))[0] == 2


def test_defaults_are_documented():
    cfg = RunConfig()
    assert (cfg.M, cfg.m, cfg.N, cfg.J, cfg.T, cfg.format) == (1, 2, 1, 3, 6, "json")
    assert cfg.precision >= 15


def test_precision_flag(capsys):
    code, out, _ = run(capsys, "res", "-a", "1/|xi|", "--n", "1", "--p", "4*|xi|^2", "--precision", "20")
    assert code == 0
    digits = json.loads(out)["res_x0_log"]["value"].replace(".", "").lstrip("0")
    assert len(digits) <= 20
    assert run(capsys, "fp", "-a", "1", "--n", "1", "--precision", "5")[0] == 2


def test_out_file(tmp_path, capsys):
    target = tmp_path / "fp.json"
    code, out, _ = run(capsys, "fp", "-a", "1/|xi|", "--n", "1", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "fp"


def test_fit_command(capsys):
    code, out, _ = run(capsys, "fit", "-a", "1/|xi|", "--n", "1", "--t0", "64")
    assert code == 0
    rep = json.loads(out)
    assert rep["passed"]
    slot = next(s for s in rep["rows"] if s["exponent"] == "-1" and s["log_power"] == 0)
    assert slot["verdict"] == "pass"
    code, out, _ = run(capsys, "fit", "-a", "1/|xi|", "--n", "1", "--ladder=-1:1,-1:0,-3/2:0,-2:1,-2:0,-5/2:0,-3:1,-3:0", "--t0", "64", "--format", "csv")
    assert code == 0 and out.splitlines()[0].startswith("exponent,log_power")
    assert run(capsys, "fit", "-a", "1/|xi|", "--n", "1", "--ladder", "nope")[0] == 2


def test_verify_filtered(capsys):
    code, out, _ = run(capsys, "verify", "--only", "parity", "--format", "pretty")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith("[PASS] 6.")


def test_verify_negative_control(capsys):
    code, out, _ = run(capsys, "verify", "--only", "alpha", "--corrupt-alpha")
    assert code == 1
    rep = json.loads(out)
    assert not rep["passed"] and rep["criteria"][0]["key"] == "alpha"


def test_verify_unknown_key(capsys):
    assert run(capsys, "verify", "--only", "nonsense")[0] == 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "nonlocal_trace.cli", "fp", "-a", "1/|xi|^2", "--n", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value"]["rational"] == "2"
    proc = subprocess.run([sys.executable, "-m", "nonlocal_trace.cli", "fp", "-a", "1"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_precision_environment_variable():
    root = Path(__file__).resolve().parents[1]
    proc = subprocess.run(
        [sys.executable, "-c", "from nonlocal_trace.symbol_core import get_precision; print(get_precision())"],
        capture_output=True, text=True, env={"NONLOCAL_TRACE_DPS": "33", "PATH": "/usr/bin:/bin"}, cwd=root,
    )
    assert proc.stdout.strip() == "33"
