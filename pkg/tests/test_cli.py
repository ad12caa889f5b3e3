import json

import numpy as np
import pytest

from fastslow import cli
from fastslow.models import chialvo_flip, chialvo_folds


@pytest.fixture()
def chialvo_config(tmp_path):
    cfg = {
        "schema": 1,
        "model": "chialvo",
        "params": {"a": 1.0, "b": 5.0, "c": 3.5, "k": 0.035},
        "eps": 1e-3,
        "grid": {"x_index": 1, "lo": 1.1, "hi": 2.9, "num": 200},
        "singularities": {"lo": 0.04, "hi": 5.0, "num": 1200},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_singularities_json_schema(tmp_path, chialvo_config):
    out = tmp_path / "sing"
    assert cli.main(["singularities", "--config", str(chialvo_config), "--out", str(out)]) == 0
    payload = json.loads((out / "singularities.json").read_text())
    assert payload["schema"] == 1
    assert payload["model"] == "chialvo"
    assert set(payload["parameter_table"]) == {"a", "b", "c", "k"}
    kinds = [h["kind"] for h in payload["hits"]]
    assert kinds == ["fold", "fold", "flip"]
    for h in payload["hits"]:
        assert set(h) == {"coord", "kind", "mu_re", "mu_im"}
    v_minus, v_plus = chialvo_folds(0.035)
    assert abs(payload["hits"][0]["coord"] - v_minus) <= 1e-8
    assert abs(payload["hits"][1]["coord"] - v_plus) <= 1e-8
    assert abs(payload["hits"][2]["coord"] - chialvo_flip(0.035)) <= 1e-8


def test_malformed_config_exit_2_no_partial_files(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    out = tmp_path / "out"
    assert cli.main(["analyze", "--config", str(bad), "--out", str(out)]) == 2
    assert not out.exists()


def test_missing_model_key_exit_2(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {}}))
    assert cli.main(["singularities", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_numerical_failure_exit_1(tmp_path):
    # slow-manifold across a fold: FoldSingularity -> exit code 1
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "model": "chialvo",
        "params": {"a": 1.0, "b": 5.0, "c": 3.5, "k": 0.035},
        "eps": 1e-3,
        "grid": {"x_index": 1, "lo": 0.8, "hi": 1.2, "num": 60},
    }))
    out = tmp_path / "out"
    assert cli.main(["slow-manifold", "--config", str(cfg), "--out", str(out)]) == 1
    assert not out.exists()


def test_analyze_deterministic(tmp_path, chialvo_config):
    out1, out2 = tmp_path / "a1", tmp_path / "a2"
    assert cli.main(["analyze", "--config", str(chialvo_config), "--out", str(out1)]) == 0
    assert cli.main(["analyze", "--config", str(chialvo_config), "--out", str(out2)]) == 0
    for name in ("report.json", "critical_graph.csv", "slow_manifold.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_analyze_report_contents(tmp_path, chialvo_config):
    out = tmp_path / "analyze"
    assert cli.main(["analyze", "--config", str(chialvo_config), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    kinds = [h["kind"] for h in rep["singularities"]]
    assert kinds.count("fold") == 2 and kinds.count("flip") == 1
    assert len(rep["branches"]) == 4
    assert rep["fixed_points"][0]["branch"] == "S-r"
    assert rep["fixed_points"][0]["stability"] == "unstable"
    assert rep["slow_manifold_residual"] <= 1e-10
    assert rep["spectral_bounds"]["nu_a"] < 1.0


def test_slow_manifold_csv_header(tmp_path, chialvo_config):
    out = tmp_path / "sm"
    assert cli.main(["slow-manifold", "--config", str(chialvo_config), "--out", str(out)]) == 0
    lines = (out / "slow_manifold.csv").read_text().splitlines()
    assert lines[0] == "# schema: 1"
    assert lines[1] == "x_0,phi0_0,phi_eps_firstorder_0,phi_eps_numeric_0,residual"
    assert len(lines) == 2 + 200


def test_simulate_trajectory(tmp_path, chialvo_config):
    out = tmp_path / "sim"
    assert cli.main(["simulate", "--config", str(chialvo_config), "--out", str(out),
                     "--steps", "100"]) == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[1] == "step,z_0,z_1,dist_to_S_eps,flags"
    assert len(lines) == 2 + 101


def test_regimes_single_case(tmp_path):
    out = tmp_path / "regimes"
    assert cli.main(["regimes", "--case", "I", "--eps", "1e-3", "--steps", "30000",
                     "--out", str(out)]) == 0
    rep = json.loads((out / "regime_I.json").read_text())
    assert rep["label"] == "Excitable"
    assert (out / "trajectory_I.csv").exists()


def test_regimes_eps_cap(tmp_path):
    assert cli.main(["regimes", "--case", "I", "--eps", "0.5",
                     "--out", str(tmp_path / "r")]) == 2


def test_euler_study_csv(tmp_path):
    out = tmp_path / "euler"
    assert cli.main(["euler-study", "--eps-list", "1e-2,5e-3", "--h-list", "0.2,0.1",
                     "--out", str(out)]) == 0
    lines = (out / "euler_study.csv").read_text().splitlines()
    assert lines[1] == "eps,h,dist,classification,mu_err"
    assert len(lines) == 2 + 4
    rows = [ln.split(",") for ln in lines[2:]]
    # halving eps at fixed h: ratio near 4
    d = {(float(r[0]), float(r[1])): float(r[2]) for r in rows}
    ratio = d[(1e-2, 0.2)] / d[(5e-3, 0.2)]
    assert 3.5 <= ratio <= 4.5


def test_oracle_stdout(capsys):
    assert cli.main(["oracle", "--model", "chialvo", "--v-grid", "1:3:5"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema"] == 1
    assert abs(payload["discriminant"] + 0.2159) < 1e-10
    assert len(payload["mu"]) == 5


def test_poincare_json(tmp_path):
    out = tmp_path / "poincare"
    assert cli.main(["poincare", "--alpha-range", "0.4:0.6:7", "--eps", "1e-3",
                     "--out", str(out)]) == 0
    payload = json.loads((out / "poincare.json").read_text())
    alpha = np.array(payload["critical_curve"]["alpha"])
    x = np.array(payload["critical_curve"]["x"])
    assert np.max(np.abs(x - np.sqrt(alpha))) <= 1e-8
    assert len(payload["roots"]) == 1
    assert abs(payload["roots"][0]["alpha"] - 0.5) <= 1e-8
    assert abs(payload["slow_fixed_point_alpha"] - 0.5) <= 1e-2
    assert (out / "cycle_samples.csv").exists()
