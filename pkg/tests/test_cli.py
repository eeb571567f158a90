import json
import subprocess
import sys

import pytest

from alcontinuum.cli import main

TINY = {"L": 8.0, "T": 0.05, "snapshots": 8, "allow_large_h": True, "R_list": [2.0, 4.0], "nls_dx": 0.0625,
        "h_list": [0.2, 0.1]}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps(TINY))
    return p


def test_check_builtin_and_file(cfg_path, capsys):
    assert main(["check", "--config", "default"]) == 0
    assert main(["check", "--config", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert "config ok" in out and "h0=" in out


def test_config_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"gamma": 0.9, "allow_large_h": true}')
    assert main(["check", "--config", str(bad)]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 1
    assert main(["sweep", "--config", "no-such-builtin"]) == 1
    assert "13/18" in capsys.readouterr().err


def test_run_single_h(cfg_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg_path), "--out", str(out), "--only-h", "0.1"]) == 0
    rec = json.loads((out / "record.json").read_text())
    assert [b["h"] for b in rec["blocks"]] == [0.1]
    assert "wrote" in capsys.readouterr().out


def test_sweep_strict_failure_exits_3(cfg_path, tmp_path):
    # the boundary-mass verdict fails at h = 0.2 on this small window
    assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 0
    assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "o"), "--strict"]) == 3


def test_partial_and_unwritable_exit_2(tmp_path):
    doc = dict(TINY, h_list=[0.2], init={"psi0": {"kind": "gaussian", "amplitude": 8.0}, "phi0": None})
    p = tmp_path / "hot.json"
    p.write_text(json.dumps(doc))
    assert main(["sweep", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    p.write_text(json.dumps(dict(TINY, h_list=[0.2])))
    assert main(["sweep", "--config", str(p), "--out", str(blocker / "sub")]) == 2


def test_only_h_must_match(cfg_path, tmp_path):
    assert main(["sweep", "--config", str(cfg_path), "--only-h", "0.3", "--out", str(tmp_path)]) == 1


def test_oracle_verb_as_module():
    res = subprocess.run([sys.executable, "-m", "alcontinuum", "oracle", "--strict"],
                         capture_output=True, text=True, timeout=300)
    assert res.returncode == 0, res.stdout + res.stderr
    assert "FAIL" not in res.stdout and res.stdout.count("PASS") >= 5
