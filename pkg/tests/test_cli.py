"""Configuration, sweep and CLI surface tests."""

import json
import math
import os

import numpy as np
import pytest

from omfisher.cli import main
from omfisher.config import PRESETS, RunConfig, SweepSpec, apply_preset, load_config
from omfisher.constants import TWO_PI
from omfisher.errors import ConfigError
from omfisher.sweep import ROW_FIELDS, render_csv, run_sweep
from omfisher.validate import validate


CONFIG_TEXT = """
[system]
kappa_over_2pi_hz = 18.5e6
gamma_over_2pi_hz = 130
omega_m_over_2pi_hz = 1.14e6
mass_kg = 16e-12
temperature_k = 11
g_over_2pi_hz = 129
power_w = 1e-6
delta0_in_kappa = -2
cutoff_in_omega_m = 5
laser_wavelength_m = 1550e-9

[measurement]
omega_k_in_kappa = 0
eta = 1.0
theta = auto

[sweep]
variable = omega_k
scale = linear
start = -1e8
stop = 1e8
points = 5

[switches]
kappa_meas_mode = kappa_total
cfi_convention = bhd_limit

[tolerances]
diffusion_tol = 1e-7

[output]
path = out.csv
format = csv
"""


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(CONFIG_TEXT)
    return str(path)


class TestConfig:
    def test_defaults_match_baseline(self):
        cfg = load_config(None)
        params, meas = cfg.materialize()
        assert params.kappa == pytest.approx(TWO_PI * 18.5e6, rel=1e-12)
        assert params.delta0 == pytest.approx(-2.0 * params.kappa, rel=1e-12)
        assert params.cutoff == pytest.approx(5.0 * params.omega_m, rel=1e-12)
        assert meas["window"] == pytest.approx(1.0 / params.kappa, rel=1e-12)

    def test_file_round_trip(self, config_file):
        cfg = load_config(config_file)
        params, meas = cfg.materialize()
        assert params.gamma == pytest.approx(TWO_PI * 130.0, rel=1e-12)
        assert cfg.sweep.points == 5
        assert cfg.out_path == "out.csv"

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[system]\nnonsense = 1\n")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[plotting]\nx = 1\n")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_bad_sweep_variable(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[sweep]\nvariable = phase_of_moon\nstart = 0\nstop = 1\npoints = 3\n")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_presets_fill_sweep(self):
        cfg = load_config(None)
        for name in PRESETS:
            pc = apply_preset(cfg, name)
            assert pc.sweep is not None
            assert pc.preset == name
            assert len(pc.sweep.grid()) == pc.sweep.points

    def test_kappa_sweep_tracks_relational_defaults(self):
        cfg = load_config(None)
        params, meas = cfg.materialize("kappa", 2.0 * cfg.base_kappa())
        assert params.kappa == pytest.approx(2.0 * cfg.base_kappa(), rel=1e-12)
        assert params.delta0 == pytest.approx(-2.0 * params.kappa, rel=1e-12)
        assert meas["window"] == pytest.approx(1.0 / params.kappa, rel=1e-12)

    def test_log_grid_validation(self):
        with pytest.raises(ConfigError):
            SweepSpec("power", "log", -1.0, 1.0, 5).grid()
        with pytest.raises(ConfigError):
            SweepSpec("power", "linear", 0.0, 1.0, 1).grid()


class TestSweep:
    def test_rows_and_schema(self):
        cfg = apply_preset(load_config(None), "fig1")
        cfg = RunConfig(**{**cfg.__dict__, "sweep": SweepSpec("omega_k", "linear",
                                                              -1e8, 1e8, 5)})
        metadata, rows = run_sweep(cfg)
        assert len(rows) == 5
        assert all(r.stable for r in rows)
        text = render_csv(metadata, rows)
        lines = text.strip().split("\n")
        assert lines[0].startswith("# ")
        assert lines[1] == ",".join(ROW_FIELDS)
        # 17 significant digits: every float round-trips exactly
        for line, row in zip(lines[2:], rows):
            fields = line.split(",")
            assert float(fields[0]) == row.value
            assert float(fields[1]) == row.qfi
            assert float(fields[6]) == row.lyapunov_residual

    def test_deterministic_rows_for_identical_points(self):
        cfg = load_config(None)
        cfg = RunConfig(**{**cfg.__dict__,
                           "sweep": SweepSpec("eta", "linear", 0.8, 0.8, 2)})
        _, rows = run_sweep(cfg)
        assert rows[0] == rows[1].__class__(**{**rows[1].__dict__, "value": rows[0].value})

    def test_unstable_points_emitted_empty(self):
        # drive far past the instability threshold in g
        cfg = load_config(None)
        g0 = cfg.g_freq
        cfg = RunConfig(**{**cfg.__dict__,
                           "sweep": SweepSpec("g", "linear", g0, 40.0 * g0, 4)})
        metadata, rows = run_sweep(cfg)
        assert len(rows) == 4
        assert rows[0].stable and rows[0].qfi is not None
        assert not rows[-1].stable
        assert rows[-1].qfi is None and rows[-1].cfi is None
        text = render_csv(metadata, rows)
        last = text.strip().split("\n")[-1]
        assert ",false," in last and last.endswith(",,")

    def test_missing_sweep_rejected(self):
        with pytest.raises(ConfigError):
            run_sweep(load_config(None))

    def test_bistable_baseline_rejected(self):
        cfg = load_config(None)
        k = cfg.base_kappa()
        cfg = RunConfig(**{**cfg.__dict__, "delta0_in_kappa": 2.0,
                           "power": 3.5e-9,
                           "sweep": SweepSpec("eta", "linear", 0.5, 1.0, 3)})
        from omfisher.params import bistability_window
        params, _ = cfg.materialize()
        win = bistability_window(params)
        assert not win.monostable_for_all_power
        # pick a power inside the window, then expect the config gate to trip
        cfg = RunConfig(**{**cfg.__dict__,
                           "power": math.sqrt(win.p_minus * win.p_plus)})
        with pytest.raises(ConfigError):
            run_sweep(cfg)


class TestCli:
    def test_sweep_byte_identical(self, config_file, tmp_path):
        out1 = str(tmp_path / "a.csv")
        out2 = str(tmp_path / "b.csv")
        assert main(["sweep", "--config", config_file, "--out", out1]) == 0
        assert main(["sweep", "--config", config_file, "--out", out2]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_thread_cap_does_not_change_output(self, config_file, tmp_path):
        out1 = str(tmp_path / "a.csv")
        out2 = str(tmp_path / "b.csv")
        old = os.environ.get("OMFISHER_THREADS")
        try:
            os.environ["OMFISHER_THREADS"] = "1"
            main(["sweep", "--config", config_file, "--out", out1])
            os.environ["OMFISHER_THREADS"] = "4"
            main(["sweep", "--config", config_file, "--out", out2])
        finally:
            if old is None:
                os.environ.pop("OMFISHER_THREADS", None)
            else:
                os.environ["OMFISHER_THREADS"] = old
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_json_format(self, config_file, tmp_path):
        out = str(tmp_path / "rows.json")
        assert main(["sweep", "--config", config_file, "--out", out,
                     "--format", "json"]) == 0
        payload = json.loads(open(out).read())
        assert set(payload) == {"metadata", "rows"}
        assert len(payload["rows"]) == 5
        assert set(payload["rows"][0]) == set(ROW_FIELDS)

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[system]\nmass_kg = -1\n")
        cfgf = str(bad)
        assert main(["sweep", "--config", cfgf, "--preset", "fig1"]) == 2

    def test_steady_state_command(self, config_file, capsys):
        assert main(["steady-state", "--config", config_file]) == 0
        out = capsys.readouterr().out
        assert "photon number" in out
        assert "monostable" in out

    def test_validate_only_filters(self, capsys):
        assert main(["validate", "--only", "kernels"]) == 0
        out = capsys.readouterr().out
        assert "kernels" in out
        assert "lyapunov" not in out

    def test_validate_corrupted_tolerance_fails(self):
        results = validate(only=["kernels"], tolerance_overrides={"kernels": 0.0})
        assert any(not r.passed for r in results)

    def test_validate_unknown_suite(self, capsys):
        assert main(["validate", "--only", "nonsense"]) == 1
