import json
import subprocess
import sys

import numpy as np
import pytest

from geogates import output
from geogates.cli import main, resolve_config


def _run(tmp_path, command, config=None, *extra, name="out"):
    out = tmp_path / name
    args = [command, "--out", str(out), *extra]
    if config is not None:
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(config))
        args += ["--config", str(path)]
    return main(args), out


def _summary(out, name="summary.json"):
    return json.loads((out / name).read_text())


def test_synth_reports_the_published_area(tmp_path):
    code, out = _run(tmp_path, "synth", {"case": 1, "gate": "T"})
    assert code == 0
    s = _summary(out)
    assert s["area_over_pi"] == pytest.approx(0.404, abs=0.02)
    assert s["cyclic"] and s["seed"] == 0 and s["config"]["case"] == 1
    _, header, rows = output.read_csv(out / "trajectory.csv")
    assert header == ["t", "theta", "phi"] and len(rows) == s["config"]["grid"] + 1


def test_synth_with_zero_coefficients(tmp_path):
    code, out = _run(tmp_path, "synth", {"a_theta": [0, 0, 0, 0], "a_phi": [0, 0, 0, 0]})
    assert code == 0
    s = _summary(out)
    assert s["area"] == 0.0 and s["phase"] == 0.0


def test_synth_h_control_vanishes_at_the_ends(tmp_path):
    code, out = _run(tmp_path, "synth", {"case": 1, "gate": "H"}, "--grid", "500")
    assert code == 0
    config, header, rows = output.read_csv(out / "control.csv")
    assert header == ["t", "delta", "omega_re", "omega_im"] and config["grid"] == 500
    first, last = rows[0], rows[-1]
    assert np.hypot(first[2], first[3]) < 1e-12 and np.hypot(last[2], last[3]) < 1e-12


def test_embedded_config_reproduces_the_file(tmp_path):
    code, out = _run(tmp_path, "sweep", {"kind": "errors", "eps": [0.0, 0.1], "eta": [0.05],
                                         "steps": 1000}, "--seed", "5", "--grid", "400")
    assert code == 0
    first = (out / "sweep_errors.csv").read_text()
    embedded = json.loads(first.splitlines()[0][len("# config: "):])
    assert embedded["seed"] == 5
    code, again = _run(tmp_path, "sweep", embedded, name="again")
    assert code == 0
    assert (again / "sweep_errors.csv").read_text() == first
    assert (again / "sweep_errors_summary.json").read_text() == (out / "sweep_errors_summary.json").read_text()


def test_empty_grid_gives_a_header_only_csv(tmp_path):
    code, out = _run(tmp_path, "sweep", {"kind": "cp", "eps": [], "eta": [0.0]})
    assert code == 0
    lines = (out / "sweep_cp.csv").read_text().splitlines()
    assert lines[1] == "eps,eta,fidelity" and len(lines) == 2


def test_decoherence_sweep_favours_the_optimized_drive(tmp_path):
    cfg = {"kind": "decoherence", "case": 2, "gate": "T",
           "gammas": {"start": 1e-5, "stop": 1e-2, "num": 3, "log": True}, "steps": 2000}
    code, out = _run(tmp_path, "sweep", cfg)
    assert code == 0
    _, header, rows = output.read_csv(out / "sweep_decoherence.csv")
    assert header == ["gamma", "ongqg", "single_loop"]
    assert all(r[1] >= r[2] for r in rows)


def test_workers_do_not_change_the_output(tmp_path):
    cfg = {"kind": "errors", "eps": [-0.1, 0.1], "eta": [0.0, 0.1], "steps": 800}
    _, serial = _run(tmp_path, "sweep", cfg, "--grid", "400", name="serial")
    _, pooled = _run(tmp_path, "sweep", cfg, "--grid", "400", "--workers", "2", name="pooled")
    assert (serial / "sweep_errors.csv").read_bytes() == (pooled / "sweep_errors.csv").read_bytes()


def test_cp_sweep_summary_reports_the_fraction(tmp_path):
    code, out = _run(tmp_path, "sweep", {"kind": "cp", "eps": [0.0], "eta": [0.0, 0.05]})
    assert code == 0
    s = _summary(out, "sweep_cp_summary.json")
    assert s["points"] == 2 and 0.0 <= s["fraction_above_0995"] <= 1.0
    assert "fraction_above_099" in s


def test_transmon_sweep(tmp_path):
    code, out = _run(tmp_path, "sweep", {"kind": "transmon", "case": 5, "eps": [0.0], "eta": [0.0],
                                         "device": {"alpha": 300.0}})
    assert code == 0
    _, header, rows = output.read_csv(out / "sweep_transmon.csv")
    assert header == ["eps", "eta", "ongqg", "single_loop"] and rows[0][2] > rows[0][3]


def test_optimize_is_byte_identical_for_a_fixed_seed(tmp_path):
    cfg = {"case": 1, "budget": 300, "seed_count": 2}
    assert _run(tmp_path, "optimize", cfg, "--seed", "3", name="a")[0] == 0
    assert _run(tmp_path, "optimize", cfg, "--seed", "3", name="b")[0] == 0
    a, b = tmp_path / "a" / "result.json", tmp_path / "b" / "result.json"
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a" / "control.csv").exists()


def test_optimize_warm_start_from_the_table(tmp_path):
    from geogates.fixtures import fixture
    from geogates.optimize import Scenario, raw_objective
    from geogates.trajectory import T_GATE

    cfg = {"case": 3, "gate": "T", "budget": 300, "seed_count": 1, "warm_start": "table1"}
    code, out = _run(tmp_path, "optimize", cfg)
    assert code == 0
    result = json.loads((out / "result.json").read_text())
    row = fixture(3, "T")
    direct = raw_objective(Scenario(3, T_GATE), np.r_[row.a_theta, row.a_phi])
    assert result["objective"] <= direct + 1e-9


def test_optimize_angle_sweep_writes_a_curve(tmp_path):
    code, out = _run(tmp_path, "optimize", {"angles": [0.5, 1.0], "budget": 200, "seed_count": 1})
    assert code == 0
    _, header, rows = output.read_csv(out / "area_vs_angle.csv")
    assert header == ["angle", "area", "area_over_pi", "residual", "success"] and len(rows) == 2


def test_baseline_and_table1(tmp_path):
    code, out = _run(tmp_path, "baseline", {"gate": "H"})
    assert code == 0
    s = _summary(out, "baseline_summary.json")
    assert s["closed_form_error"] < 1e-8 and s["area"] == pytest.approx(np.pi, abs=1e-8)
    code, out = _run(tmp_path, "table1", None, name="t1")
    assert code == 0
    _, header, rows = output.read_csv(out / "table1.csv")
    assert len(rows) == 11 and header[0] == "case"
    assert _summary(out, "table1_summary.json")["max_area_deviation_over_pi"] < 0.02


@pytest.mark.parametrize("config", [
    {"bogus": 1},
    {"grid": 50},
    {"kind": "nonsense"},
    {"kind": "decoherence", "gammas": [-1e-3]},
    {"gamma": -1.0},
    {"seed": "x"},
])
def test_config_errors_exit_with_2(tmp_path, config):
    assert _run(tmp_path, "sweep", config)[0] == 2


def test_unreadable_config_exits_with_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["synth", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_infeasible_drive_exits_with_3(tmp_path, capsys):
    code, _ = _run(tmp_path, "sweep", {"kind": "cp", "eps": [0.0], "eta": [0.0], "omega_m_fraction": 1.5})
    assert code == 3
    assert "coupler limit" in capsys.readouterr().err


def test_resolve_config_overrides():
    cfg = resolve_config("synth", {"case": 2}, seed=9, grid=300)
    assert cfg["seed"] == 9 and cfg["grid"] == 300 and cfg["case"] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "geogates", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("synth", "sweep", "optimize", "baseline", "table1"):
        assert sub in res.stdout
