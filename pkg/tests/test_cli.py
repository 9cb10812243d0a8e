import json

import pytest

from traverse_lab.cli import main

TINY = """
name = "tiny"
kind = "flow"
seed = 1

[domain]
w = "1 - x^2 - y^2"
bbox = [-1.5, 1.5, -1.5, 1.5]

[field]
vx = "1"
vy = "0"

[samples]
N = 256
interior = 20
reversal = 32

[expected]
euler_characteristic = 1
nodes = { "2" = 2 }
"""


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "tiny.toml"
    p.write_text(TINY)
    return p


@pytest.fixture(autouse=True)
def _no_env(monkeypatch):
    monkeypatch.delenv("TRAVERSE_LAB_OUT", raising=False)


def test_run_writes_report(tiny, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(tiny), "--out", str(out)]) == 0
    rep = json.loads((out / "tiny" / "report.json").read_text())
    assert rep["status"] == "pass"
    assert all(c["passed"] for c in rep["claims"])
    assert {"module", "scenario_sha256"} <= set(rep["claims"][0])
    for name in ("table.csv", "graph.dot", "poset.dot", "domain.svg"):
        assert (out / "tiny" / name).exists()
    assert "tiny: pass" in capsys.readouterr().out


def test_reports_are_byte_stable(tiny, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(tiny), "--out", str(a)]) == 0
    assert main(["run", str(tiny), "--out", str(b)]) == 0
    for f in (a / "tiny").iterdir():
        assert f.read_bytes() == (b / "tiny" / f.name).read_bytes(), f.name


def test_env_overrides_out(tiny, tmp_path, monkeypatch):
    env = tmp_path / "env"
    monkeypatch.setenv("TRAVERSE_LAB_OUT", str(env))
    assert main(["run", str(tiny), "--out", str(tmp_path / "ignored")]) == 0
    assert (env / "tiny" / "report.json").exists()
    assert not (tmp_path / "ignored").exists()


def test_failed_claim_exits_3(tmp_path):
    p = tmp_path / "wrong.toml"
    p.write_text(TINY.replace("euler_characteristic = 1", "euler_characteristic = 5"))
    assert main(["run", str(p), "--out", str(tmp_path)]) == 3


def test_billiard_json(tmp_path, capsys):
    assert main(["billiard", "shell", "--chords", "2000", "--steps", "50",
                 "--out", str(tmp_path), "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["status"] == "pass"
    assert data["results"]["census"]["max_m_reduced"] == 1


def test_poset(capsys):
    assert main(["poset", "--max-reduced-norm", "2", "--max-support", "3", "--json"]) == 0
    words = {w["omega"] for w in json.loads(capsys.readouterr().out)["words"]}
    assert words == {"2", "11", "121", "13", "31"}


def test_local_model(capsys):
    assert main(["local-model", "--omega", "1221", "--x=-0.01,0", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["x"] == [-0.01, 0.0]
    assert sum(p["m"] for p in data["divisor"]) == 6


def test_local_model_chain_law(capsys):
    assert main(["local-model", "--omega", "1221", "--chain-law", "--samples", "100"]) == 0
    assert "floor(m/2)" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["local-model", "--omega", "12"],
    ["local-model", "--omega", "121", "--x", "1,2"],
    ["local-model", "--omega", "1221", "--x", "1"],
    ["local-model", "--omega", "121", "--x", "a,b,c"],
    ["run", "no-such-scenario.toml"],
    ["billiard", "disk"],
    ["poset", "--max-reduced-norm", "-1", "--max-support", "2"],
    ["selftest", "--graze-scale", "0"],
])
def test_config_errors_exit_2(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) == 2


def test_selftest_subset(tmp_path, capsys):
    assert main(["selftest", "--only", "1,6", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("[PASS] 1.") and lines[-1] == "selftest: PASS"
    assert json.loads((tmp_path / "selftest.json").read_text())["passed"]


@pytest.mark.slow
def test_inflated_graze_tolerance_fails_selftest(capsys):
    assert main(["selftest", "--only", "G", "--graze-scale", "1e4", "--json"]) == 3
    data = json.loads(capsys.readouterr().out)
    assert not data["passed"]
