import csv
import json

import numpy as np
import pytest

from emat.cli import (
    MODULI_HEADER,
    RESIDUAL_HEADER,
    WAVES_HEADER,
    cmd_moduli,
    cmd_residuals,
    cmd_waves,
    fibonacci_directions,
    main,
    read_moduli_json,
)
from emat.config import ConfigError, load_config, parse_config
from emat.constitutive import compute_moduli

COUPLING = ("BB", "CC", "FF", "KK", "HH", "LL")


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# configuration

def test_defaults_and_overrides():
    cfg = load_config(seed=5, tol_scale=2.0)
    assert cfg.seed == 5 and cfg.tol("assembly") == 2e-12
    assert cfg.model.id == "demo" and not cfg.printed_forms


def test_unknown_key_is_named(tmp_path):
    with pytest.raises(ConfigError, match="unknown key 'model.colour'"):
        load_config(write(tmp_path, '[model]\nid = "demo"\ncolour = "red"\n'))
    with pytest.raises(ConfigError, match="unknown key 'bogus'"):
        parse_config({"bogus": 1})


def test_invalid_values(tmp_path):
    with pytest.raises(ConfigError):
        parse_config({"bias": {"F": [[1, 0, 0], [0, 1, 0], [0, 0, -1]]}})
    with pytest.raises(ConfigError):
        parse_config({"numerics": {"lin_eps": [1e-3]}})
    with pytest.raises(ConfigError, match="malformed TOML"):
        load_config(write(tmp_path, "[model\n"))
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.toml")


def test_non_unit_direction_is_normalized():
    with pytest.warns(UserWarning, match="not a unit vector"):
        cfg = parse_config({"waves": {"directions": [[2.0, 0.0, 0.0]]}})
    assert cfg.waves.directions == [[1.0, 0.0, 0.0]]


def test_incompressible_demo_rejected():
    cfg = parse_config({"model": {"id": "demo", "incompressible": True}})
    with pytest.raises(ConfigError):
        cfg.build_model()


# moduli

def test_moduli_json_round_trip(tmp_path):
    cfg = parse_config({"bias": {"F": [[1.1, 0.1, 0], [0, 0.9, 0], [0.05, 0, 1]], "B_l": [0.1, 0.2, 0.3],
                                 "E_el": [0.3, 0, -0.1]}})
    cmd_moduli(cfg, tmp_path)
    back = read_moduli_json(tmp_path / "moduli.json")
    mod = compute_moduli(cfg.build_model(), np.asarray(cfg.bias.F), np.asarray(cfg.bias.E_el),
                         np.asarray(cfg.bias.B_l), cfg.build_model().reference_temperature())
    for name, block in mod.blocks().items():
        assert np.array_equal(back["referential"][name], block), name
    header, rows = read_csv(tmp_path / "moduli.csv")
    assert header == MODULI_HEADER
    lookup = {(r[0], r[1], r[2]): float(r[3]) for r in rows}
    assert lookup[("referential", "AA", "0.1.2.0")] == mod.AA[0, 1, 2, 0]
    assert "index_order" in json.loads((tmp_path / "moduli.json").read_text())


def test_decoupled_moduli_blocks(tmp_path):
    cfg = parse_config({"model": {"id": "decoupled"}, "bias": {"B_l": [0.5, 0, 0], "E_el": [0, 1.0, 0]}})
    doc = cmd_moduli(cfg, tmp_path)
    for name in COUPLING:
        assert not np.any(doc["referential"][name]), name


def test_neo_hookean_moduli_pattern(tmp_path):
    cfg = parse_config({"model": {"id": "neo_hookean", "coefficients": {"mu": 2.0}}})
    cmd_moduli(cfg, tmp_path)
    back = read_moduli_json(tmp_path / "moduli.json")
    expect = 2.0 * np.einsum("ij,ab->aibj", np.eye(3), np.eye(3))
    assert np.allclose(back["referential"]["AA"], expect, atol=1e-15)


# residuals

def residual_rows(tmp_path, **manufactured):
    sets = manufactured.pop("sets")
    cfg = parse_config({"manufactured": manufactured, "residuals": {"sets": sets, "points": 3}})
    cmd_residuals(cfg, tmp_path)
    header, rows = read_csv(tmp_path / "residuals.csv")
    assert header == RESIDUAL_HEADER
    return rows


def test_zero_increment_through_cli(tmp_path):
    rows = residual_rows(tmp_path, em="random", increment="zero", sets=["incremental"])
    assert rows and all(float(r[5]) == 0.0 for r in rows)
    assert {r[4].split("/")[0] for r in rows} == {"incremental_lagrangian", "incremental_eulerian",
                                                  "incremental_momentum"}


def test_vacuum_wave_through_cli(tmp_path):
    rows = residual_rows(tmp_path, em="vacuum_wave", motion="identity", sets=["vacuum"])
    assert len(rows) == 3 * 4
    for r in rows:
        assert float(r[5]) <= 1e-6 * max(float(r[6]), 1e-300), r


def test_div_defect_through_cli(tmp_path):
    rows = residual_rows(tmp_path, em="div_defect", motion="identity", sets=["maxwell"])
    div = [float(r[5]) for r in rows if r[4] == "maxwell_eulerian/div_B"]
    assert div == pytest.approx([1.0] * 3, abs=1e-14)


def test_residual_errors_are_recorded(tmp_path):
    # the energy set needs a thermal bias; without one every point records the error
    rows = residual_rows(tmp_path, em="random", thermal="none", sets=["energy"])
    assert rows and all(r[7].startswith("error") for r in rows)


# waves

def test_neo_hookean_wave_column(tmp_path):
    cfg = parse_config({"model": {"id": "neo_hookean", "coefficients": {"mu": 3.0}, "rho_r": 1.5},
                        "waves": {"n_directions": 6}})
    cmd_waves(cfg, tmp_path)
    header, rows = read_csv(tmp_path / "waves.csv")
    assert header == WAVES_HEADER and len(rows) == 18
    speeds = np.array([float(r[7]) for r in rows])
    assert np.max(np.abs(speeds - np.sqrt(2.0))) <= 1e-12


def test_magnetic_sweep_is_continuous(tmp_path):
    mags = [0.0, 1e-3, 2e-3, 4e-3]
    cfg = parse_config({"constants": {"mu0": 1.0}, "waves": {"directions": [[0.6, 0.0, 0.8]], "B_magnitudes": mags,
                                                             "B_direction": [1.0, 0.0, 0.0]}})
    cmd_waves(cfg, tmp_path)
    _, rows = read_csv(tmp_path / "waves.csv")
    speeds = np.array([float(r[7]) for r in rows]).reshape(len(mags), 3)
    zero = parse_config({"constants": {"mu0": 1.0}, "waves": {"directions": [[0.6, 0.0, 0.8]], "magnetic": False}})
    cmd_waves(zero, tmp_path)
    _, rows = read_csv(tmp_path / "waves.csv")
    assert np.allclose(speeds[0], [float(r[7]) for r in rows], rtol=1e-14)
    steps = np.abs(np.diff(speeds, axis=0)).max(axis=1) / np.diff(mags)
    assert 0 < steps.max() < 10.0


def test_parallel_sweep_is_deterministic(tmp_path):
    base = {"waves": {"n_directions": 5, "B_magnitudes": [0.0, 0.1], "full_system": True}, "constants": {"mu0": 1.0}}
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    cmd_waves(parse_config(base), a)
    par = json.loads(json.dumps(base))
    par["waves"]["workers"] = 4
    cmd_waves(parse_config(par), b)
    assert (a / "waves.csv").read_bytes() == (b / "waves.csv").read_bytes()
    assert (a / "waves.json").read_bytes() == (b / "waves.json").read_bytes()


def test_degenerate_point_reported(tmp_path):
    cfg = parse_config({"model": {"coefficients": {"alpha": -1.0, "beta": 0.0}}, "constants": {"mu0": 1.0},
                        "waves": {"directions": [[0.0, 0.0, 1.0]]}})
    rows = cmd_waves(cfg, tmp_path)
    diag = json.loads((tmp_path / "waves.json").read_text())["points"]
    assert not rows and "DegenerateProblemError" in diag[0]["error"]


def test_fibonacci_directions_are_unit():
    d = fibonacci_directions(50)
    assert d.shape == (50, 3) and np.allclose(np.linalg.norm(d, axis=1), 1.0)


# entry point and exit codes

def test_exit_codes(tmp_path, capsys):
    bad = write(tmp_path, "surprise = 1\n")
    assert main(["moduli", "--config", bad, "--out-dir", str(tmp_path)]) == 2
    assert "unknown key 'surprise'" in capsys.readouterr().err
    ok = write(tmp_path, '[verify]\nsuites = ["round_trips"]\nround_trip_states = 5\n', "ok.toml")
    assert main(["verify", "--config", ok, "--out-dir", str(tmp_path)]) == 0
    assert main(["verify", "--config", ok, "--out-dir", str(tmp_path), "--tol-scale", "1e-30"]) == 1
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert not report["passed"] and report["schema_version"]


def test_direction_warning_through_main(tmp_path, capsys):
    cfg = write(tmp_path, '[model]\nid = "neo_hookean"\n[waves]\ndirections = [[0.0, 3.0, 0.0]]\n')
    assert main(["waves", "--config", cfg, "--out-dir", str(tmp_path)]) == 0
    assert "normalized" in capsys.readouterr().err
    _, rows = read_csv(tmp_path / "waves.csv")
    assert [float(x) for x in rows[0][3:6]] == [0.0, 1.0, 0.0]


def test_literal_inverse_verify_flags_boundary(tmp_path):
    cfg = write(tmp_path, 'literal_L_inverse = true\n[verify]\nsuites = ["round_trips", "linearization"]\n'
                          'round_trip_states = 5\n')
    assert main(["verify", "--config", cfg, "--out-dir", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify_report.json").read_text())
    lin = [c for c in report["checks"] if c["suite"] == "linearization"]
    bc = [c for c in lin if "/bc" in c["name"]]
    assert bc and all(c["status"] == "flagged" for c in bc)
    assert all(c["status"] == "pass" for c in lin if "/bc" not in c["name"])
    assert report["passed"]
