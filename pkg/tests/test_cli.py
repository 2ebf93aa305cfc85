import json
import re
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from hollingbif.cli import main

UNIT = ["--alpha", "1", "--beta", "1", "--delta", "1", "--lambda", "1", "--mu", "1"]
TWO = ["--alpha", "1.2505625", "--beta", "-1.1339144168133268", "--delta", "0.83524",
       "--lambda", "0.13094", "--mu", "0.05553"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_equilibria_json(capsys):
    code, out, _ = run(capsys, "equilibria", *UNIT, "--format", "json")
    assert code == 0
    recs = json.loads(out)
    assert isinstance(recs, list)
    origin = [r for r in recs if r["x"] == 0.0 and r["y"] == 0.0 and not r["at_infinity"]]
    assert origin[0]["kind"] == "saddle" and origin[0]["index"] == -1
    assert list(origin[0]) == ["x", "y", "at_infinity", "kind", "index", "eigenvalues",
                              "in_open_first_quadrant", "degenerate"]


def test_equilibria_csv_header(capsys):
    code, out, _ = run(capsys, "equilibria", *UNIT, "--format", "csv")
    assert code == 0
    assert out.split("\r\n")[0] == "x,y,kind,index,re_eig1,im_eig1,re_eig2,im_eig2"


def test_missing_parameter(capsys):
    code, _, err = run(capsys, "equilibria", "--alpha", "1", "--beta", "1", "--lambda", "1", "--mu", "1")
    assert code == 1
    assert "delta" in err


@pytest.mark.parametrize("argv,field", [
    (["--format", "svg"], "format"),
    (["--delta", "-1"], "delta"),
    (["--workers", "0"], "workers"),
])
def test_config_errors_name_field(capsys, argv, field):
    code, _, err = run(capsys, "equilibria", *UNIT, *argv)
    assert code == 1
    assert field in err


def test_bad_flag_value(capsys):
    code, _, err = run(capsys, "equilibria", *UNIT, "--seed", "x")
    assert code == 1 and "seed" in err


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 1, "beta": 1, "delta": 1, "lambda": 1, "mu": 1,
                               "format": "csv"}))
    _, from_cfg, _ = run(capsys, "equilibria", "--config", str(cfg))
    assert from_cfg.startswith("x,y,kind")
    _, flagged, _ = run(capsys, "equilibria", "--config", str(cfg), "--format", "json")
    assert flagged.startswith("[")
    _, other, _ = run(capsys, "equilibria", "--config", str(cfg), "--lambda", "2", "--format", "json")
    assert any(r["x"] == 0.5 and r["y"] == 0.0 for r in json.loads(other))


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 1, "colour": "red"}))
    code, _, err = run(capsys, "equilibria", "--config", str(cfg))
    assert code == 1 and "colour" in err


def test_config_wrong_type(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": "one", "beta": 1, "delta": 1, "lambda": 1, "mu": 1}))
    code, _, err = run(capsys, "equilibria", "--config", str(cfg))
    assert code == 1 and "alpha" in err


def test_degenerate_exit(capsys):
    code, _, _ = run(capsys, "equilibria", "--alpha", "1", "--beta", "1", "--delta", "1",
                     "--lambda", "1", "--mu", "0")
    assert code == 2


def test_cycles_two_nested(capsys):
    code, out, _ = run(capsys, "cycles", *TWO, "--format", "json")
    assert code == 0
    cycles = json.loads(out)["cycles"]
    assert [c["stability"] for c in cycles] == ["unstable", "stable"]


def test_continue_reports_fold(capsys):
    code, out, _ = run(capsys, "continue", *TWO, "--parameter", "gamma", "--stop", "0.1")
    assert code == 0
    rows = out.strip().split("\r\n")
    assert rows[0] == "row,parameter,value,s_star,period,d_s,note"
    assert any(r.startswith("fold,gamma,") and r.endswith("multiplicity=2") for r in rows)
    assert rows[-1] == "end,gamma,,,,,fold"


def test_continue_rejects_parameter(capsys):
    code, _, err = run(capsys, "continue", *TWO, "--parameter", "delta")
    assert code == 1 and "parameter" in err


def test_portrait_two_cycles(capsys, tmp_path):
    out = tmp_path / "p.svg"
    code, _, _ = run(capsys, "portrait", *TWO, "--out", str(out))
    assert code == 0
    text = out.read_text()
    root = ET.fromstring(text)
    assert root.get("version") == "1.1"
    assert len(re.findall(r'<path class="cycle ', text)) == 2
    assert len(re.findall(r'class="antisaddle ', text)) == 1


def test_audit_json_keys(capsys):
    code, out, _ = run(capsys, "audit", "--draws", "3", "--seed", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["draws"] == 3 and rep["violations"] == []


def _cli(*argv):
    return subprocess.run([sys.executable, "-m", "hollingbif", *argv], capture_output=True, check=False)


@pytest.mark.parametrize("argv", [
    ["equilibria", *UNIT, "--format", "csv"],
    ["cycles", *TWO],
    ["audit", "--draws", "6", "--seed", "3", "--workers", "4"],
])
def test_byte_identical_runs(argv):
    a, b = _cli(*argv), _cli(*argv)
    assert a.returncode == 0
    assert a.stdout == b.stdout and a.stdout
