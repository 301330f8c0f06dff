import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from fracneutral.cli import main
from fracneutral.dynamics import read_trajectory_csv
from fracneutral.operator import SectorialSpectrum, apply_solution_operator
from fracneutral.scenario import ScenarioConfig, preset


def zero_scenario(**extra):
    d = dict(alpha=1.5, spectrum=dict(modes=3, damping=1.0), delay=1.0, horizon=12.0, step=0.02, omega=2.0,
             forcing=dict(form="zero"), history=dict(form="constant", value=[1.0, 0.5, -0.25]),
             decay_constant=2.0)
    d.update(extra)
    return d


def write_config(path, data):
    path.write_text(yaml.safe_dump(data) if isinstance(data, dict) else data)
    return str(path)


def write_csv(path, t, values):
    rows = ["time,coord_1"] + [f"{float(a)!r},{float(b)!r}" for a, b in zip(t, values)]
    path.write_text("\n".join(rows) + "\n")
    return str(path)


def test_solve_zero_forcing_is_free_evolution(tmp_path):
    cfg = write_config(tmp_path / "s.yaml", zero_scenario())
    assert main(["solve", cfg, "--out", str(tmp_path / "out")]) == 0
    t, u = read_trajectory_csv(tmp_path / "out" / "trajectory.csv")
    spec = SectorialSpectrum.dirichlet_heat(3, 1.0)
    x0 = np.array([1.0, 0.5, -0.25])
    for i in (0, 50, 200, len(t) - 1):
        if t[i] >= 0:
            np.testing.assert_allclose(u[i], apply_solution_operator(spec, 1.5, t[i], x0), atol=1e-12)
    rep = json.loads((tmp_path / "out" / "periodicity.json").read_text())
    assert rep["verdicts"]["sap"]["verdict"] is True
    g = json.loads((tmp_path / "out" / "guarantee.json").read_text())
    assert g["best"] == "constant" and g["contraction_constant"] == 0.0
    assert g["constants"]["C_source"] == "config" and g["empirical"] is False


def test_report_field_names(tmp_path):
    cfg = write_config(tmp_path / "s.yaml", zero_scenario())
    main(["solve", cfg, "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "periodicity.json").read_text())
    assert list(rep) == ["omega", "sap_tail", "psap_mean_curve", "class_r_mean_curve", "ergodic_measure_curve", "verdicts"]
    assert [len(p) for p in rep["psap_mean_curve"]] == [2, 2, 2, 2]
    assert set(rep["verdicts"]) == {"sap", "class_r", "psap", "decay_ratio", "epsilon", "r"}
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == "time,coord_1,coord_2,coord_3"


@pytest.mark.parametrize("text", [
    "alpha: [1.5\n",
    yaml.safe_dump(zero_scenario(forcing=dict(form="quadratic"))),
    yaml.safe_dump(zero_scenario(alpha=1.0)),
    yaml.safe_dump(zero_scenario(alpha=2.0)),
    yaml.safe_dump(zero_scenario(step=0.03)),
    yaml.safe_dump(zero_scenario(colour="red")),
    yaml.safe_dump(zero_scenario(omega=50.0)),
    "- just\n- a list\n",
])
def test_config_errors_exit_2(tmp_path, text, capsys):
    cfg = write_config(tmp_path / "bad.yaml", text)
    assert main(["solve", cfg, "--out", str(tmp_path / "o")]) == 2
    assert main(["check", cfg]) == 2
    assert "config error" in capsys.readouterr().err
    assert not (tmp_path / "o" / "trajectory.csv").exists()


def test_missing_config_file(tmp_path):
    assert main(["solve", str(tmp_path / "nope.yaml")]) == 2


def test_non_convergence_exit_3(tmp_path, capsys):
    assert main(["section4", "--preset", "large", "--out", str(tmp_path)]) == 3
    g = json.loads((tmp_path / "guarantee.json").read_text())
    assert g["best"] == "none"
    assert not (tmp_path / "trajectory.csv").exists()
    assert "solver failed" in capsys.readouterr().out


def test_section4_small(tmp_path, capsys):
    assert main(["section4", "--out", str(tmp_path), "--theta", "0.5,1.5"]) == 0
    out = capsys.readouterr().out
    assert "iterations=" in out
    g = json.loads((tmp_path / "guarantee.json").read_text())
    assert g["best"] != "none" and g["criteria"]["bounded"]["satisfied"]
    phys = (tmp_path / "physical.csv").read_text().splitlines()
    assert phys[0] == "time,theta_0.5,theta_1.5"
    t, u = read_trajectory_csv(tmp_path / "trajectory.csv")
    row = [float(x) for x in phys[-1].split(",")]
    n = np.arange(1, u.shape[1] + 1)
    assert row[1] == pytest.approx(np.sum(u[-1] * np.sin(n * 0.5)), abs=1e-12)


def test_dump_config_round_trip(capsys):
    assert main(["section4", "--dump-config"]) == 0
    text = capsys.readouterr().out
    cfg = ScenarioConfig.loads(text)
    assert cfg == preset("small")
    assert cfg.dumps() == text


def test_deterministic_outputs(tmp_path):
    cfg = write_config(tmp_path / "s.yaml", preset("small").to_dict() | {"horizon": 10.0})
    for d in ("a", "b"):
        assert main(["solve", cfg, "--out", str(tmp_path / d)]) in (0, 4)
    for name in ("trajectory.csv", "periodicity.json", "guarantee.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_diagnose_exit_codes(tmp_path, capsys):
    t = 0.01 * np.arange(4001)
    decaying = write_csv(tmp_path / "d.csv", t, np.exp(-t))
    assert main(["diagnose", decaying, "--omega", "1", "--r", "1"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdicts"]["sap"]["verdict"]
    sine = write_csv(tmp_path / "s.csv", t, np.sin(t))
    out = tmp_path / "rep.json"
    assert main(["diagnose", sine, "--omega", "1", "--r", "1", "--require", "psap", "--out", str(out)]) == 4
    assert json.loads(out.read_text())["verdicts"]["psap"]["verdict"] is False


def test_diagnose_bad_input(tmp_path):
    assert main(["diagnose", str(tmp_path / "none.csv"), "--omega", "1", "--r", "1"]) == 2
    t = np.array([0.0, 0.1, 0.3, 0.4])
    uneven = write_csv(tmp_path / "u.csv", t, t)
    assert main(["diagnose", uneven, "--omega", "0.1", "--r", "0.1"]) == 2
    t = 0.01 * np.arange(101)
    assert main(["diagnose", write_csv(tmp_path / "w.csv", t, t), "--omega", "0.015", "--r", "0.1"]) == 2


def test_threshold_env_override(tmp_path, monkeypatch, capsys):
    t = 0.01 * np.arange(4001)
    path = write_csv(tmp_path / "d.csv", t, 0.1 + 0.05 * np.sin(t))
    monkeypatch.setenv("FRACNEUTRAL_THRESHOLD", "10")
    assert main(["diagnose", path, "--omega", "1", "--r", "1", "--require", "sap"]) == 0
    assert json.loads(capsys.readouterr().out)["verdicts"]["sap"]["threshold"] == 10.0
    monkeypatch.setenv("FRACNEUTRAL_THRESHOLD", "1e-9")
    assert main(["diagnose", path, "--omega", "1", "--r", "1", "--require", "sap"]) == 4
    monkeypatch.setenv("FRACNEUTRAL_THRESHOLD", "loose")
    assert main(["diagnose", path, "--omega", "1", "--r", "1"]) == 2


def test_check_exit_codes(tmp_path, capsys):
    ok = write_config(tmp_path / "ok.yaml", zero_scenario())
    assert main(["check", ok, "--out", str(tmp_path / "g.json")]) == 0
    assert json.loads((tmp_path / "g.json").read_text())["best"] == "constant"
    strong = zero_scenario(forcing=dict(form="linear", g=dict(terms=[dict(lag=1.0, scalar=2.0)])))
    assert main(["check", write_config(tmp_path / "bad.yaml", strong)]) == 4


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1] == "0 failure(s)"
    modules = {line.split()[1].split("/")[0] for line in lines[:-1]}
    assert modules == {"mlf", "operator", "dynamics", "asymptotics", "conditions"}


def test_selftest_reports_failures(monkeypatch, capsys):
    monkeypatch.setenv("FRACNEUTRAL_SELFTEST_TOL", "-1")
    assert main(["selftest"]) == 4
    fails = [line for line in capsys.readouterr().out.splitlines() if line.startswith("FAIL")]
    assert fails and all("/" in line.split()[1] for line in fails)


def test_selftest_rejects_forced_alpha():
    assert main(["selftest", "--force-alpha", "1.0"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fracneutral", "selftest", "--force-alpha", "2.5"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 2
    assert subprocess.run([sys.executable, "-m", "fracneutral", "--help"], capture_output=True).returncode == 0
