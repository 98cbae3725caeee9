import json
import math
import os
import shutil
import subprocess

import numpy as np
import pytest

import confine

CLI = os.environ.get("CONFINE_CLI") or shutil.which("confine")


def cli(*args):
    if CLI is None:
        pytest.skip("confine executable not found")
    return subprocess.run([CLI, *args], capture_output=True, text=True, timeout=120)


def test_power_family_threshold():
    assert confine.power_family_verdict(0.0, 0.5, 0.0)
    assert not confine.power_family_verdict(0.0, 0.49, 0.0)
    result = confine.classify_power(lambda1=0.6)
    assert result["verdict"] == "EssentiallySelfAdjoint"
    assert result["rule"] == "P:M(ii)"
    assert confine.classify_power(lambda1=0.4, numerical=True)["verdict"] == "NotEssentiallySelfAdjoint"


def test_em_threshold():
    assert confine.em_threshold_verdict(1.0, 0.0, 0.8)
    assert not confine.em_threshold_verdict(0.6, 0.0, 0.5)


def test_chernoff_family():
    verdicts = [confine.chernoff_verdict(a) for a in (0.5, 1.0, 1.5, 2.0)]
    assert verdicts == ["EssentiallySelfAdjoint"] * 2 + ["NotEssentiallySelfAdjoint"] * 2


def test_pauli_decompose():
    h = np.array([[2.0, -1j], [1j, 0.0]])
    assert confine.pauli_decompose(h) == pytest.approx((1.0, 0.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        confine.pauli_decompose(np.array([[1.0, 2.0], [0.0, 1.0]], dtype=complex))


def test_critical_family_fibers():
    low = confine.critical_family_fibers(0.25)
    assert low["verdict"] == "NotEssentiallySelfAdjoint"
    assert low["failing_fiber"] == -1
    assert not low["certificate"]
    high = confine.critical_family_fibers(0.75)
    assert high["verdict"] == "EssentiallySelfAdjoint"
    assert high["certificate"]


def test_run_sweep_from_toml():
    toml = 'command = "sweep"\n[sweep]\naxes = ["lambda1"]\nlambda1 = [0.3, 0.7, 0.1]\n'
    out = confine.run(toml)
    lines = out["csv"].strip().splitlines()
    assert lines[0] == "param1,param2,verdict,tag,margin"
    assert [line.split(",")[2] for line in lines[1:]] == ["NotESA", "NotESA", "Boundary", "ESA", "ESA"]


def test_run_overrides_and_errors():
    out = confine.run(confine.default_config("classify"),
                      {"problem.v1.family": '"power"', "problem.v1.params": "[0.6, 0.6]"})
    assert out["exit_code"] == 0
    assert out["report"]["result"]["verdict"] == "ESA"
    with pytest.raises(confine.ConfigError):
        confine.run("[numerics]\nbogus = 1\n")


def test_cli_exit_codes(tmp_path):
    assert cli("classify", "--set", 'problem.v1.family="power"', "--set", "problem.v1.params=[0.6,0.6]").returncode == 0
    assert cli("classify", "--set", 'problem.v0.family="constant"', "--set", "problem.v0.params=[1.0]").returncode == 1
    borderline = cli("classify", "--set", 'problem.v1.family="power"', "--set", "problem.v1.params=[0.5,0.5]",
                     "--set", 'numerics.force="numerical"')
    assert borderline.returncode in (0, 2)
    bad = tmp_path / "bad.toml"
    bad.write_text('[problem]\ndomain = "interval"\nbogus = 3\n')
    result = cli("classify", "--config", str(bad))
    assert result.returncode == 3
    assert "line 3" in result.stderr


def test_cli_sweep_outputs(tmp_path):
    out = tmp_path / "sweep.csv"
    result = cli("sweep", "--set", "sweep.lambda1=[0.3,0.7,0.01]", "--jobs", "2", "--out", str(out))
    assert result.returncode == 0
    rows = out.read_text().strip().splitlines()
    assert len(rows) == 42
    report = json.loads((tmp_path / "sweep.csv.json").read_text())
    assert "seconds" not in json.dumps(report)
    again = cli("sweep", "--set", "sweep.lambda1=[0.3,0.7,0.01]", "--jobs", "1")
    assert again.stdout.strip().splitlines() == rows


def test_cli_json_report():
    result = cli("certify", "--set", 'problem.domain="unit_ball"', "--set", 'certify.kind="flat_threshold"',
                 "--set", "certify.lambda=0.5", "--json")
    assert result.returncode == 0
    report = json.loads(result.stdout)
    assert report["command"] == "certify"
    assert math.isclose(report["result"]["shift"], 1.5)
