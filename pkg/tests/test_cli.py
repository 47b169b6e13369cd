import json
from pathlib import Path

import pytest

from tifl.cli import (
    EXIT_DATA,
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_USAGE,
    main,
)

MONTAGE_YAML = """
montage:
  phi: 70
  alpha: 20
resolution: 41
"""


@pytest.fixture
def montage_config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(MONTAGE_YAML)
    return path


def run_cli(*args):
    return main([str(a) for a in args])


def test_simulate_writes_outputs(montage_config, tmp_path, capsys):
    out = tmp_path / "out"
    code = run_cli("--config", montage_config, "--out", out, "simulate")
    assert code == EXIT_OK
    assert (out / "envelope_xy.csv").exists()
    assert (out / "envelope_xz.pgm").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert "planes" in summary and "xy" in summary["planes"]
    assert summary["planes"]["xy"]["region"] == "R22"


def test_simulate_requires_montage(tmp_path):
    cfg = tmp_path / "empty.yaml"
    cfg.write_text("resolution: 41\n")
    assert run_cli("--config", cfg, "simulate") == EXIT_USAGE


def test_simulate_deterministic(montage_config, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli("--config", montage_config, "--out", out1, "simulate") == EXIT_OK
    assert run_cli("--config", montage_config, "--out", out2, "simulate") == EXIT_OK
    for name in ("envelope_xy.csv", "envelope_xz.csv", "envelope_xy.pgm", "summary.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_export_writes_field_tables(montage_config, tmp_path):
    out = tmp_path / "out"
    code = run_cli("--config", montage_config, "--out", out, "--plane", "xy", "export")
    assert code == EXIT_OK
    csv = (out / "fields_xy_pair_right.csv").read_text()
    assert csv.splitlines()[0] == "x,y,z,V,Ex,Ey,Ez"
    payload = json.loads((out / "fields_xy.json").read_text())
    assert payload["plane"] == "xy"


def test_sweep_scenario_b_monotone(tmp_path):
    out = tmp_path / "out"
    code = run_cli("--resolution", 61, "--out", out, "--scenario", "b",
                   "--format", "csv", "sweep")
    assert code == EXIT_OK
    rows = (out / "sweep_b.csv").read_text().strip().splitlines()
    assert rows[0].startswith("plane,param,argmax_x")
    xy = [r.split(",") for r in rows[1:] if r.startswith("xy,")]
    xs = [float(r[2]) for r in xy]
    assert xs == sorted(xs)
    assert len(xy) == 3


def test_sweep_requires_scenario(tmp_path):
    assert run_cli("--out", tmp_path / "o", "sweep") == EXIT_USAGE


def test_guidelines_outputs(tmp_path):
    out = tmp_path / "out"
    cfg = tmp_path / "g.yaml"
    cfg.write_text(
        "resolution: 41\nphi_grid: [30, 60, 90, 120]\nalpha_grid: [20, 40]\n"
        "ratio_grid: [0.25, 1.0, 4.0]\n"
    )
    code = run_cli("--config", cfg, "--out", out, "guidelines")
    assert code == EXIT_OK
    table = json.loads((out / "guidelines.json").read_text())
    assert len(table["regions"]) == 9
    assert len(table["depths"]) == 4
    text = (out / "guidelines.txt").read_text()
    assert "Stimulation depth" in text


def test_plan_center(tmp_path):
    out = tmp_path / "out"
    cfg = tmp_path / "p.yaml"
    cfg.write_text(
        "plan:\n"
        "  target: [0.0, 0.0, 0.0]\n"
        "  effort:\n"
        "    phi_grid: [60, 90]\n"
        "    alpha_grid: [40, 60]\n"
        "    psi_grid: [0, 90, 180, 270]\n"
        "    ratio_grid: [0.5, 1.0, 2.0]\n"
        "    refine_evals: 40\n"
        "    raster_resolution: 11\n"
    )
    code = run_cli("--config", cfg, "--out", out, "plan")
    assert code == EXIT_OK
    result = json.loads((out / "plan.json").read_text())
    params = result["montage"]["parameters"]
    ratio = params["i_left"] / params["i_right"]
    assert abs(ratio - 1.0) <= 0.1
    assert result["safety"]["passed"] is True


def test_plan_infeasible_target_exit_code(tmp_path):
    cfg = tmp_path / "p.yaml"
    cfg.write_text("plan:\n  target: [0.0, 0.0, -0.9]\n")
    assert run_cli("--config", cfg, "--out", tmp_path / "o", "plan") == EXIT_INFEASIBLE


def test_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("montage: {phi: 70, alpha: 20, bogus: 1}\n")
    assert run_cli("--config", cfg, "simulate") == EXIT_DATA


def test_missing_config_file_is_usage_error(tmp_path):
    assert run_cli("--config", tmp_path / "nope.yaml", "simulate") == EXIT_USAGE


def test_phi_off_limits_montage_is_bad_data(tmp_path):
    cfg = tmp_path / "p.yaml"
    cfg.write_text("montage: {phi: 150, alpha: 20}\n")
    assert run_cli("--config", cfg, "simulate") == EXIT_DATA
