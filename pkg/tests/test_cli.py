"""Command-line interface: subcommands, exit codes, and output files."""

import subprocess
import sys

import pytest

from gpassm.cli import main
from gpassm.scenario import ScenarioConfig, dump_config, load_config


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("n_runs = 1\nn_vehicles = 2\n", encoding="utf-8")
    return path


def _read_rows(path):
    return path.read_text(encoding="utf-8").splitlines()


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    from gpassm import __version__

    assert __version__ in capsys.readouterr().out


def test_missing_config_exits_one_and_names_the_file(tmp_path, capsys):
    missing = tmp_path / "nope.toml"
    code = main(["simulate", "--config", str(missing), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "nope.toml" in capsys.readouterr().err


def test_invalid_config_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("speeed = 1.0\n", encoding="utf-8")
    code = main(["validate-config", "--config", str(bad)])
    assert code == 1
    assert "speeed" in capsys.readouterr().err


def test_validate_config_echoes_effective_values(tmp_path, capsys):
    path = tmp_path / "config.toml"
    path.write_text("speed = 2.0\n", encoding="utf-8")
    assert main(["validate-config", "--config", str(path)]) == 0
    out = capsys.readouterr().out
    assert out == dump_config(ScenarioConfig(speed=2.0))
    assert "speed = 2.0" in out
    assert "n_runs = 100" in out


def test_simulate_writes_all_outputs(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    code = main(["simulate", "--config", str(config_file), "--out", str(out),
                 "--runs", "1", "--vehicles", "1"])
    assert code == 0
    runs = _read_rows(out / "runs.csv")
    assert runs[0] == "run,vehicle,path,rmse_gpassm,rmse_cv"
    assert len(runs) == 2  # one data row for the single vehicle
    errors = _read_rows(out / "errors.csv")
    assert errors[0] == "run,vehicle,step,err_gpassm,err_cv"
    assert len(errors) == 1 + 26
    traj = _read_rows(out / "trajectories.csv")
    assert traj[0].startswith("run,vehicle,path,step,truth_x")
    assert len(traj) == 1 + 26
    field = _read_rows(out / "field.csv")
    assert len(field) == 1 + 310
    assert (out / "truth_accel.csv").exists()
    # the manifest records the effective config, overrides included
    effective = load_config(out / "manifest.toml")
    assert effective.n_runs == 1
    assert effective.n_vehicles == 1
    # the RMSE table ends with the overall means
    assert "mean" in capsys.readouterr().out


def test_simulate_same_seed_is_byte_identical(tmp_path, config_file):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["simulate", "--config", str(config_file),
                     "--out", str(out), "--seed", "5"]) == 0
        outs.append(out)
    for fname in ("runs.csv", "errors.csv", "trajectories.csv", "field.csv",
                  "truth_accel.csv", "manifest.toml"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes(), fname


def test_simulate_seed_changes_results(tmp_path, config_file):
    outs = []
    for name, seed in (("a", "1"), ("b", "2")):
        out = tmp_path / name
        assert main(["simulate", "--config", str(config_file),
                     "--out", str(out), "--seed", seed]) == 0
        outs.append(out)
    assert (outs[0] / "runs.csv").read_bytes() != (outs[1] / "runs.csv").read_bytes()


def test_simulate_baseline_only_matches_cv(tmp_path, config_file):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(config_file), "--out", str(out),
                 "--baseline-only"]) == 0
    import csv

    with (out / "runs.csv").open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert rows
    for row in rows:
        g = float(row["rmse_gpassm"])
        c = float(row["rmse_cv"])
        assert g == pytest.approx(c, rel=1e-6, abs=1e-8)


def test_field_prior_export_is_zero_mean(tmp_path, config_file):
    out = tmp_path / "out"
    assert main(["field", "--config", str(config_file), "--out", str(out),
                 "--after-vehicle", "0"]) == 0
    rows = _read_rows(out / "field.csv")
    assert len(rows) == 1 + 310
    for line in rows[1:]:
        _, _, ax, ay, var = line.split(",")
        assert float(ax) == 0.0
        assert float(ay) == 0.0
        assert float(var) == pytest.approx(0.05, rel=1e-8)


def test_field_after_too_many_vehicles_fails(tmp_path, config_file, capsys):
    code = main(["field", "--config", str(config_file), "--out",
                 str(tmp_path / "out"), "--after-vehicle", "3"])
    assert code == 1
    assert "after-vehicle" in capsys.readouterr().err


def test_field_default_matches_simulate_snapshot(tmp_path, config_file):
    sim_out = tmp_path / "sim"
    fld_out = tmp_path / "fld"
    assert main(["simulate", "--config", str(config_file), "--out", str(sim_out)]) == 0
    assert main(["field", "--config", str(config_file), "--out", str(fld_out)]) == 0
    assert (sim_out / "field.csv").read_bytes() == (fld_out / "field.csv").read_bytes()


def test_field_prints_written_paths(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    assert main(["field", "--config", str(config_file), "--out", str(out),
                 "--after-vehicle", "1"]) == 0
    printed = capsys.readouterr().out
    assert "field.csv" in printed
    assert "truth_accel.csv" in printed


def test_oracle_check_passes(capsys):
    assert main(["oracle-check"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 3
    assert "FAIL" not in out


def test_console_script_is_installed():
    proc = subprocess.run([sys.executable, "-m", "gpassm.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "gpassm" in proc.stdout
