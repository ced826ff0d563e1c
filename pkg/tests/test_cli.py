import subprocess
import sys

import numpy as np
import pytest

from lvhopf import cli
from lvhopf import spectral as sp
from lvhopf.csvio import read_table, read_trajectory
from lvhopf.errors import NoCrossingFound
from lvhopf.model import jacobian_no_delay
from lvhopf.validation import rightmost_of


def machine_block(out: str) -> dict:
    lines = out.split("[machine]\n", 1)[1].splitlines()
    return dict(line.split(",", 1) for line in lines)


def test_equilibrium_command(capsys):
    assert cli.main(["equilibrium"]) == 0
    block = machine_block(capsys.readouterr().out)
    assert float(block["x1"]) == pytest.approx(0.5262904238263)


def test_coeffs_prints_exact_zero(capsys):
    assert cli.main(["coeffs", "--H", "0"]) == 0
    assert machine_block(capsys.readouterr().out)["a5"] == "0"


def test_stability_infeasible_exit_code(capsys):
    assert cli.main(["stability", "--a", "3"]) == 2
    out = capsys.readouterr().out
    assert "a <= 2+sqrt(2)" in out
    assert machine_block(out)["feasible"] == "false"


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("model.q = 1\n")
    assert cli.main(["equilibrium", "--config", str(cfg)]) == 1
    assert cli.main(["equilibrium", "--config", str(tmp_path / "missing.cfg")]) == 1


def test_analyze_writes_rows(tmp_path, capsys):
    assert cli.main(["analyze", "--output", str(tmp_path)]) == 0
    header, rows = read_table(tmp_path / "analysis.csv")
    values = dict(rows)
    assert header == ["name", "value"]
    assert float(values["E_crit"]) == pytest.approx(1.1974588786, abs=1e-8)
    assert abs(float(values["omega1_minus_omega0"])) <= 1e-8
    assert values["transversal_ok"] == "true"
    assert values["E_crit_ge_E1_lower_bound"] == "true"


def test_analyze_unstable_at_zero(tmp_path):
    assert cli.main(["analyze", "--a", "6", "--H", "0", "--output", str(tmp_path)]) == 2


def test_analyze_no_crossing_exit_code(tmp_path, monkeypatch, capsys):
    def never(*args, **kwargs):
        raise NoCrossingFound("none", 12.5)

    monkeypatch.setattr(sp, "critical_expectation", never)
    assert cli.main(["analyze", "--output", str(tmp_path)]) == 3
    assert "12.5" in capsys.readouterr().err


def test_scan_csv(tmp_path, params, eq):
    assert cli.main(["scan", "--output", str(tmp_path)]) == 0
    header, rows = read_table(tmp_path / "scan.csv")
    assert header == ["E", "re_lead", "im_lead", "stable", "note"]
    E = np.array([float(r[0]) for r in rows])
    assert np.all(np.diff(E) > 0)
    stable = [r[3] for r in rows]
    assert sum(a != b for a, b in zip(stable, stable[1:])) == 1
    eig = rightmost_of(np.linalg.eigvals(jacobian_no_delay(params, eq)))
    assert complex(float(rows[0][1]), float(rows[0][2])) == pytest.approx(eig, abs=1e-10)


def test_simulate_constant_history(tmp_path, eq):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"sim.history = constant\nsim.t_end = 50\noutput = {tmp_path}\n")
    assert cli.main(["simulate", "--config", str(cfg)]) == 0
    traj = read_trajectory(tmp_path / "trajectory.csv")
    assert np.max(np.abs(traj.states - eq.as_array())) < 1e-6
    text = (tmp_path / "trajectory.csv").read_text()
    assert "# sim.history = constant" in text and "# history: constant at equilibrium" in text


def test_simulate_supercritical_metrics_appended(tmp_path):
    args = ["simulate", "--kernel", "erlang", "--shape", "1", "--E", "1.6", "--output", str(tmp_path)]
    cfg = tmp_path / "run.cfg"
    cfg.write_text("sim.t_end = 150\nsim.method = chain\nsim.rho = 0.01\n")
    assert cli.main([*args, "--config", str(cfg)]) == 0
    assert cli.main([*args, "--config", str(cfg)]) == 0
    header, rows = read_table(tmp_path / "metrics.csv")
    assert header[0] == "E" and len(rows) == 2
    assert rows[0][header.index("decaying")] == "false"


def test_simulate_blowup(tmp_path, capsys):
    assert cli.main(["simulate", "--E", "2.0", "--output", str(tmp_path)]) == 4
    traj = read_trajectory(tmp_path / "trajectory.csv")
    assert 0 < traj.times[-1] < 200
    assert "# aborted:" in (tmp_path / "trajectory.csv").read_text()


def test_validate_infeasible_skips(capsys):
    assert cli.main(["validate", "--a", "3"]) != 0
    out = capsys.readouterr().out
    assert out.count("[SKIP]") == 14


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "lvhopf", "coeffs"], capture_output=True, text=True)
    assert res.returncode == 0 and "a4" in res.stdout
