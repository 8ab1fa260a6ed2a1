import json
import math

import numpy as np
import pytest

from qutrit_dce.cli import main, rates_table, spectrum_table
from qutrit_dce.config import PRESETS, RunConfig, preset
from qutrit_dce.errors import ValidationError


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_table(path):
    lines = path.read_text().splitlines()
    comments = [line[2:] for line in lines if line.startswith("# ")]
    body = [line for line in lines if not line.startswith("#")]
    return json.loads("\n".join(comments)), body[0].split(","), [row.split(",") for row in body[1:]]


def stdout_rows(capsys):
    lines = [line for line in capsys.readouterr().out.splitlines() if not line.startswith("#")]
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


UNCOUPLED = {"model": {"e1": 0.6, "e2": 1.4}, "drive": {"eps2": 0.1, "eta": 3.0}, "space": {"n_max": 10}}
SMALL_FIG1 = {
    "model": {"d1": 0.464, "d2": 0.106, "g01": 0.05, "g12": 0.06, "g02": 0.03},
    "drive": {"eps2": 0.1001, "eta": "resonant"},
    "space": {"n_max": 8},
    "grid": {"t1": 200.0, "sample_dt": 20.0},
    "J": 3,
}


# spectrum

def test_spectrum_uncoupled_columns_equal_k(tmp_path, capsys):
    assert main(["spectrum", "--config", write_config(tmp_path, UNCOUPLED)]) == 0
    header, rows = stdout_rows(capsys)
    assert header == ["k", "lambda_num", "lambda_pert4", "lambda_quadratic", "overlap"]
    for row in rows:
        k = float(row[0])
        assert [float(x) for x in row[1:4]] == [k, k, k]
        assert float(row[4]) == 1.0


def test_spectrum_fig1_columns_cross_check():
    cols, rows = spectrum_table(RunConfig.from_dict(preset("fig1")))
    for row in rows[:5]:
        k, num, pert = int(row[0]), row[1], row[2]
        assert abs(pert - num) <= 0.15 * abs(num - k)


@pytest.mark.parametrize("field, value", [("g02", -0.03), ("omega", 0.0), ("c01", 2)])
def test_invalid_model_field_is_named(tmp_path, capsys, field, value):
    cfg = json.loads(json.dumps(SMALL_FIG1))
    cfg["model"][field] = value
    assert main(["spectrum", "--config", write_config(tmp_path, cfg)]) == 2
    assert field in capsys.readouterr().err


def test_spectrum_writes_file_and_cuts_ambiguous_branch(tmp_path, capsys):
    # fig3: |0,8> is hybridized below overlap 1/2, so the default table stops at k = 7
    out = tmp_path / "out"
    assert main(["spectrum", "--preset", "fig3", "--out", str(out)]) == 0
    assert "ends at k=7" in capsys.readouterr().err
    cfg, header, rows = read_table(out / "fig3_spectrum.csv")
    assert cfg["model"]["d2"] == -0.132 and header[0] == "k" and len(rows) == 8


def test_explicit_k_max_past_ambiguity_fails(tmp_path, capsys):
    cfg = dict(preset("fig3"), k_max=9)
    assert main(["spectrum", "--config", write_config(tmp_path, cfg)]) == 3
    assert "AmbiguousBranch" in capsys.readouterr().err


# rates

def test_rates_without_direct_coupling_are_zero(tmp_path, capsys):
    cfg = json.loads(json.dumps(SMALL_FIG1))
    cfg["model"]["g02"] = 0.0
    cfg["drive"]["eta"] = 3.0
    assert main(["rates", "--config", write_config(tmp_path, cfg), "--J", "3"]) == 0
    header, rows = stdout_rows(capsys)
    assert header == ["k", "theta_analytic", "theta_numeric", "relative_deviation"]
    assert all(float(row[1]) == 0.0 for row in rows)


@pytest.mark.parametrize("name, J, n_rows", [("fig1", 3, 11), ("fig2", 1, 9)])
def test_figure_rate_deviations_low_k(name, J, n_rows):
    _, rows = rates_table(RunConfig.from_dict(preset(name)), J)
    assert len(rows) == n_rows
    for row in rows[:4]:
        assert row[3] <= 0.25, row


def test_fig1_rate_deviations_full_table():
    _, rows = rates_table(RunConfig.from_dict(preset("fig1")), 3)
    assert max(row[3] for row in rows) <= 0.25


@pytest.mark.xfail(strict=True, reason="one-photon closed form deviates 25-33% for k = 6..8; see ledger")
def test_fig2_rate_deviations_full_table():
    _, rows = rates_table(RunConfig.from_dict(preset("fig2")), 1)
    assert max(row[3] for row in rows) <= 0.25


# evolve

def test_evolve_writes_series_and_snapshots(tmp_path, capsys):
    cfg = dict(SMALL_FIG1, outputs={"prefix": "small", "snapshots": ["peak", 100.0]})
    out = tmp_path / "out"
    assert main(["evolve", "--config", write_config(tmp_path, cfg), "--out", str(out)]) == 0
    echoed, header, rows = read_table(out / "small_schrodinger_timeseries.csv")
    assert header == ["t", "n_ph", "Q", "p0", "p1", "p2", "norm_or_trace"]
    assert echoed["drive"]["eta"] == pytest.approx(3.0037, abs=5e-4)
    assert rows[0][2] == ""  # vacuum: Q undefined
    mantissa = rows[-1][1].split("e")[0].replace("-", "").replace(".", "")
    assert len(mantissa) >= 12
    assert float(rows[-1][0]) == pytest.approx(200.0, abs=0.01)
    snaps = sorted(out.glob("small_schrodinger_pn_t*.csv"))
    assert len(snaps) == 2
    _, header, rows = read_table(snaps[0])
    assert header == ["n", "P(n)"] and len(rows) == 9
    assert sum(float(r[1]) for r in rows) == pytest.approx(1.0, abs=1e-9)
    assert "max n_ph" in capsys.readouterr().out


def test_evolve_config_round_trip_is_bit_identical(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    cfg = dict(SMALL_FIG1, mode=["schrodinger", "effective"], outputs={"prefix": "rt"})
    assert main(["evolve", "--config", write_config(tmp_path, cfg), "--out", str(first)]) == 0
    assert main(["evolve", "--config", str(first / "rt_config.json"), "--out", str(second)]) == 0
    for mode in ("schrodinger", "effective"):
        name = f"rt_{mode}_timeseries.csv"
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_evolve_lindblad_mode(tmp_path):
    cfg = dict(SMALL_FIG1, mode="lindblad", dissipation={"kappa": 1e-3, "gphi1": 1e-3},
               outputs={"prefix": "mixed"})
    assert main(["evolve", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    _, _, rows = read_table(tmp_path / "mixed_lindblad_timeseries.csv")
    assert abs(float(rows[-1][6]) - 1) <= 1e-6


def test_overrides(tmp_path):
    out = tmp_path / "o"
    args = ["evolve", "--config", write_config(tmp_path, SMALL_FIG1), "--out", str(out),
            "--eta", "3.01", "--nmax", "6", "--tmax", "50"]
    assert main(args) == 0
    cfg, _, rows = read_table(out / "run_schrodinger_timeseries.csv")
    assert cfg["drive"]["eta"] == 3.01 and cfg["space"]["n_max"] == 6
    assert float(rows[-1][0]) == pytest.approx(50.0, abs=0.01)


def test_numerical_failure_exit_code(tmp_path, capsys):
    cfg = json.loads(json.dumps(SMALL_FIG1))
    cfg["model"].update(g01=30.0, g12=30.0, g02=30.0)
    cfg["drive"]["eta"] = 1.0
    cfg["space"]["n_max"] = 5
    cfg["grid"] = {"t1": 50.0, "dt": 2 * math.pi / (20 * 7.0)}
    assert main(["evolve", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)]) == 3
    assert "NormDrift" in capsys.readouterr().err


# configuration handling

def test_unknown_key_rejected(tmp_path, capsys):
    cfg = dict(SMALL_FIG1, drive={"eta": 3.0, "epsilon2": 0.1})
    assert main(["spectrum", "--config", write_config(tmp_path, cfg)]) == 2
    assert "epsilon2" in capsys.readouterr().err


def test_missing_file_is_io_error(tmp_path):
    assert main(["spectrum", "--config", str(tmp_path / "missing.json")]) == 4


def test_malformed_json_is_config_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["spectrum", "--config", str(path)]) == 2


def test_config_and_preset_are_exclusive(tmp_path):
    assert main(["spectrum", "--preset", "fig1", "--config", write_config(tmp_path, SMALL_FIG1)]) == 2


@pytest.mark.parametrize("cfg", [
    {"drive": {"eta": 1.0}},
    dict(SMALL_FIG1, mode="lindblad"),
    dict(SMALL_FIG1, mode="unitary"),
    dict(SMALL_FIG1, J=2),
    dict(SMALL_FIG1, model={"d1": 0.4, "e2": 1.2}),
])
def test_config_validation(cfg):
    with pytest.raises(ValidationError):
        RunConfig.from_dict(cfg)


@pytest.mark.parametrize("name, d1, d2, J", [("fig1", 0.464, 0.106, 3), ("fig2", 0.362, 0.51, 1),
                                             ("fig3", 0.24, -0.132, 3)])
def test_presets_carry_figure_parameters(name, d1, d2, J):
    raw = PRESETS[name]
    assert (raw["model"]["d1"], raw["model"]["d2"], raw["J"]) == (d1, d2, J)
    assert {k: raw["model"][k] for k in ("g01", "g12", "g02")} == {"g01": 0.05, "g12": 0.06, "g02": 0.03}
    assert (raw["model"]["c01"], raw["model"]["c12"], raw["model"]["c02"]) == (1, 1, 1)
    cfg = RunConfig.from_dict(preset(name))
    assert cfg.drive.eps2 == pytest.approx(0.07 * cfg.params.e2, rel=1e-15)
    assert cfg.drive.eps1 == 0
    assert round(cfg.drive.eta, 4) == raw["meta"]["eta_printed"]


def test_fig3_preset_dissipation():
    cfg = RunConfig.from_dict(preset("fig3"))
    rates = cfg.dissipation
    assert rates.kappa == pytest.approx(5e-6, rel=1e-12)
    for name in ("gamma01", "gamma02", "gamma12", "gphi1", "gphi2"):
        assert getattr(rates, name) == pytest.approx(5e-5, rel=1e-12)
    assert cfg.modes == ("schrodinger", "lindblad")


def test_scan_command(tmp_path, capsys):
    cfg = dict(SMALL_FIG1, scan={"horizon": 100.0})
    assert main(["scan", "--config", write_config(tmp_path, cfg), "--points", "5", "--span", "0.01",
                 "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    values = {line.split(" = ")[0][2:]: float(line.split(" = ")[1]) for line in out.splitlines()
              if line.startswith("# ") and " = " in line}
    assert values["delta_nu"] == pytest.approx(values["best_eta"] - values["predicted_eta"], abs=1e-15)
    _, header, rows = read_table(tmp_path / "run_scan_J3.csv")
    assert header == ["eta", "merit"] and len(rows) == 5
    assert np.all(np.array([float(r[1]) for r in rows]) >= 0)
