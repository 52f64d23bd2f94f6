import json
import os

import numpy as np
import pytest

from dpmimo.cli import main
from dpmimo.config import DEFAULTS, load_config
from dpmimo.errors import ConfigError


def test_empty_document_gives_sec6_defaults():
    cfg = load_config("")
    assert cfg.geometry().wavelength == 0.1
    assert cfg.geometry().spacing == 0.05  # half wavelength
    assert cfg.n_ue == 2
    assert len(cfg.clusters()) == 5
    assert cfg.pathloss_params().alpha == 4.0
    assert cfg.xpd_params().eta == 0.8
    assert cfg.xpd_params().xpd_at_unit_distance == pytest.approx(10 ** 0.5)
    thr = cfg.thresholds()
    assert (thr.gamma1, thr.gamma2, thr.power_ratio) == (1.05, 1.05, 1.15)
    assert cfg.fading().mu == 5.0
    assert cfg.gamma == pytest.approx(10 ** ((43.0 + 96.0) / 10.0))
    assert cfg.q0 == pytest.approx(4.0 / (2 * 60))
    assert np.deg2rad(35.0) == pytest.approx(cfg.clusters().azimuth_spreads[0])


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown config key: geomtry"):
        load_config('{"geomtry": {}}')
    with pytest.raises(ConfigError, match="xpd.etaa"):
        load_config('{"xpd": {"etaa": 1.0}}')


def test_subarray_grid_must_cover_array():
    with pytest.raises(ConfigError, match="7 must divide geometry.elements = 60"):
        load_config('{"optimizer": {"subarrays": 7}}')
    with pytest.raises(ConfigError, match="6\\*11"):
        load_config('{"optimizer": {"subarrays": 6, "subarray_size": 11}}')


def test_infeasible_cap_rejected():
    with pytest.raises(ConfigError, match="infeasible per-antenna cap"):
        load_config('{"power": {"q0_factor": 0.9}}')


def test_parse_error_carries_line_and_column():
    with pytest.raises(ConfigError, match=r"line 2, column"):
        load_config('{\n  "xpd": ,\n}')


def test_config_hash_tracks_parameters():
    a = load_config("")
    b = load_config('{"xpd": {"eta": 0.8001}}')
    assert a.config_hash() != b.config_hash()
    assert a.config_hash() == load_config("{}").config_hash()


def test_replace_revalidates():
    cfg = load_config("")
    with pytest.raises(ConfigError):
        cfg.replace(optimizer={"subarrays": 11})
    tweaked = cfg.replace(fading={"seed": 99})
    assert tweaked.seed == 99 and cfg.seed == DEFAULTS["fading"]["seed"]


def run_cli(tmp_path, *argv):
    out = tmp_path / "out"
    return main([*argv, "--out", str(out)]), out


def test_cli_complexity(tmp_path):
    code, out = run_cli(tmp_path, "complexity", "--no-plot")
    assert code == 0
    csv = (out / "complexity.csv").read_text()
    assert csv.startswith("#")
    assert "config_hash" in csv
    data = json.loads((out / "complexity.json").read_text())
    assert data["columns"][0] == "m"


def test_cli_boundary_deterministic(tmp_path):
    code, out = run_cli(tmp_path, "boundary", "--no-plot", "--format", "csv")
    assert code == 0
    first = (out / "boundary.csv").read_bytes()
    code, out = run_cli(tmp_path, "boundary", "--no-plot", "--format", "csv")
    assert code == 0
    assert (out / "boundary.csv").read_bytes() == first


def test_cli_seed_changes_hash_and_output(tmp_path):
    _, out = run_cli(tmp_path, "boundary", "--no-plot", "--format", "csv", "--seed", "1")
    first = (out / "boundary.csv").read_text()
    _, out = run_cli(tmp_path, "boundary", "--no-plot", "--format", "csv", "--seed", "2")
    second = (out / "boundary.csv").read_text()
    assert first != second  # provenance columns track the seed


def test_cli_json_mirror_matches_csv(tmp_path):
    code, out = run_cli(tmp_path, "complexity", "--no-plot")
    rowsj = json.loads((out / "complexity.json").read_text())["rows"]
    lines = [l for l in (out / "complexity.csv").read_text().splitlines()
             if not l.startswith("#")]
    header = lines[0].split(",")
    for j_row, c_line in zip(rowsj, lines[1:]):
        cells = c_line.split(",")
        for name, jv, cv in zip(header, j_row, cells):
            if isinstance(jv, float):
                assert float(cv) == pytest.approx(jv, rel=1e-12)
            else:
                assert str(jv) == cv or ("%g" % jv if isinstance(jv, int) else str(jv)) == cv


def test_cli_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"optimizer": {"subarrays": 7}}')
    code, _ = run_cli(tmp_path, "boundary", "--no-plot", "--config", str(cfg))
    assert code == 2


def test_cli_numerical_failure_exit_code(tmp_path):
    # vanishing azimuth spread drives the angular model out of its domain
    cfg = tmp_path / "bad_model.json"
    cfg.write_text(json.dumps({
        "clusters": {"azimuth_spread_deg": 0.29, "truncation_spread_deg": 360.0}}))
    code, _ = run_cli(tmp_path, "boundary", "--no-plot", "--config", str(cfg))
    assert code == 3


def test_cli_fig6_with_plot(tmp_path):
    code, out = run_cli(tmp_path, "experiment", "fig6")
    assert code == 0
    assert (out / "fig6.csv").exists()
    assert (out / "fig6.json").exists()
    assert (out / "fig6.png").exists()


def test_cli_stdin_config(tmp_path, monkeypatch):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO('{"fading": {"seed": 5}}'))
    code, out = run_cli(tmp_path, "complexity", "--no-plot", "--config", "-")
    assert code == 0
    assert "# seed: 5" in (out / "complexity.csv").read_text()
