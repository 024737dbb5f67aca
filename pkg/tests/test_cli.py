import json

import pytest

from mmae_maneuver.cli import main


def test_simulate_identify_report(tmp_path, capsys):
    sim = tmp_path / "sim"
    assert main(["simulate", "--maneuver", "right", "--n-seeds", "2", "--L", "50", "--seed", "4",
                 "--out-dir", str(sim)]) == 0
    files = sorted(sim.glob("*.csv"))
    assert [f.name for f in files] == ["model_truth_right_seed4.csv", "model_truth_right_seed5.csv"]
    out = tmp_path / "id"
    assert main(["identify", *map(str, files), "--maneuver", "right", "--L", "50",
                 "--out-dir", str(out)]) == 0
    assert "seed 4: detected" in capsys.readouterr().out
    assert (out / "identify.json").exists()
    assert main(["report", str(out)]) == 0
    assert "identify: median=" in capsys.readouterr().out


def test_run_with_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"maneuver": "left", "L": 50, "n_seeds": 2, "Q": 0.001}))
    assert main(["run", "--config", str(cfg), "--Q", "0.01", "--format", "json",
                 "--out-dir", str(tmp_path / "o")]) == 0
    data = json.loads((tmp_path / "o" / "model_truth_left_Q0.01_R0.0025.json").read_text())
    assert data["config"]["Q"] == 0.01 and data["config"]["n_seeds"] == 2


def test_tune_sweep_and_vehicle_eval(tmp_path, capsys):
    assert main(["tune-sweep", "--axis", "R", "--values", "0.0025", "0.01", "--L", "50",
                 "--n-seeds", "1", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "sweep_R_left.csv").exists()
    assert main(["vehicle-eval", "--maneuver", "right", "--Q", "0.005", "--n-seeds", "1",
                 "--out-dir", str(tmp_path)]) == 0
    assert "early confusion" in capsys.readouterr().out


def test_diagonal_q_flag(tmp_path):
    assert main(["run", "--Q", "0.001,0.05,0.001,0.05", "--L", "50", "--n-seeds", "1",
                 "--format", "json", "--out-dir", str(tmp_path)]) == 0


@pytest.mark.parametrize("argv,code,category", [
    (["run", "--n-seeds", "0"], 2, "config"),
    (["run", "--run-duration", "1"], 2, "config"),
    (["identify", "no_such.csv"], 4, "io"),
    (["run", "--config", "no_such.json"], 4, "io"),
    (["report", "no_such_dir"], 4, "io"),
])
def test_exit_codes(argv, code, category, capsys):
    assert main(argv) == code
    assert f"error [{category}]" in capsys.readouterr().err


def test_numerical_failure_exit_code(tmp_path, capsys):
    # near-zero-noise bank fed a track 500 m away: every likelihood underflows
    assert main(["simulate", "--maneuver", "straight", "--x0", "0,10,500,0", "--n-seeds", "1",
                 "--run-duration", "1", "--out-dir", str(tmp_path)]) == 0
    argv = ["identify", str(tmp_path / "model_truth_straight_seed0.csv"), "--Q", "0", "--R", "1e-8",
            "--out-dir", str(tmp_path)]
    assert main(argv) == 3
    assert "error [numerical]" in capsys.readouterr().err


def test_config_schema(capsys):
    assert main(["config-schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert "Q" in schema["properties"]
