import json
import math
import subprocess
import sys

import numpy as np
import pytest

from autophase import csvio
from autophase.cli import EXIT_ALIAS, EXIT_CONFIG, EXIT_DOMAIN, EXIT_OK, main
from autophase.config import ConfigError, build_grid, load_config, resolve

COUNTERPROP = {
    "units": "normalized",
    "source": {
        "type": "counterprop",
        "pump": {"tau": 20, "width_w": 60},
        "model": {"kind": "taylor", "omega0": 0.5, "betas": [0, 1, 3, 40]},
    },
}

COLLINEAR_SI = {
    "units": "SI",
    "source": {
        "type": "collinear",
        "pump": {"wavelength": 790e-9, "bandwidth": 2 * math.pi * 3e12},
        "length": 0.01,
        "pump_model": {"kind": "sellmeier", "material": "KTP_ny"},
        "signal_model": {"kind": "sellmeier", "material": "KTP_nz"},
        "idler_model": {"kind": "sellmeier", "material": "KTP_ny"},
    },
}


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def run(tmp_path, command, cfg=None, *extra):
    argv = [command, "--out", str(tmp_path / "out")]
    if cfg is not None:
        argv += ["--config", str(write_config(tmp_path, cfg))]
    return main(argv + list(extra))


def with_analysis(base, **analysis):
    return {**base, "analysis": analysis}


class TestDispersionCommand:
    def test_constant_index_has_zero_gvd(self, tmp_path):
        cfg = {"units": "SI", "dispersion": {"model": {"kind": "constant", "n": 1.5},
                                             "wavelength_range": [1.0e-6, 1.6e-6]}}
        assert run(tmp_path, "dispersion", cfg) == EXIT_OK
        table = csvio.read_table(tmp_path / "out" / "dispersion.csv")
        assert np.all(table[:, 4] == 0.0)
        np.testing.assert_allclose(table[:, 1], 1.5, rtol=1e-14)
        np.testing.assert_allclose(table[:, 3], 1.5 / 299792458.0, rtol=1e-14)

    def test_gaas_index_falls_with_wavelength(self, tmp_path):
        cfg = {"units": "SI", "dispersion": {"model": {"kind": "sellmeier", "material": "GaAs"},
                                             "wavelength_range": [1.4e-6, 1.7e-6]}}
        assert run(tmp_path, "run", cfg) == EXIT_OK
        head = csvio.read_header(tmp_path / "out" / "dispersion.csv")
        assert head["columns"] == ["wavelength", "n", "beta", "beta1", "beta2"]
        n = csvio.read_table(tmp_path / "out" / "dispersion.csv")[:, 1]
        assert np.all(np.diff(n) < 0)

    def test_out_of_range_is_domain_error(self, tmp_path):
        cfg = {"units": "SI", "dispersion": {"model": {"kind": "sellmeier", "material": "GaAs"},
                                             "wavelength_range": [0.5e-6, 1.7e-6]}}
        assert run(tmp_path, "dispersion", cfg) == EXIT_DOMAIN


class TestJsaCommand:
    def test_writes_jsa_and_jti(self, tmp_path, capsys):
        cfg = {**COUNTERPROP, "grid": {"n_points": 129}}
        assert run(tmp_path, "jsa", cfg) == EXIT_OK
        out = capsys.readouterr().out
        assert "rho_nu:" in out and "rho_t:" in out
        head = csvio.read_header(tmp_path / "out" / "jsa.csv")
        assert head["command"] == "jsa"
        assert (tmp_path / "out" / "jti.csv").exists()


class TestFransonCommand:
    def test_classify_monochromatic(self, tmp_path, capsys):
        cfg = {"units": "normalized",
               "source": {"type": "counterprop", "pump": {"tau": "inf", "width_w": 20},
                          "model": {"kind": "taylor", "omega0": 0.5, "betas": [0, 1]}},
               "analysis": {"type": "classify"}}
        assert run(tmp_path, "franson", cfg) == EXIT_OK
        assert "anti_correlated" in capsys.readouterr().out.splitlines()

    def test_visibility_and_map(self, tmp_path):
        cfg = with_analysis({**COUNTERPROP, "grid": {"n_points": 129}}, type="visibility")
        assert run(tmp_path, "franson", cfg) == EXIT_OK
        head = csvio.read_header(tmp_path / "out" / "fringe_scan.csv")
        assert 0 <= head["scaled_visibility"] <= 1
        cfg = with_analysis(COUNTERPROP, type="map", tau_range=[0, 5], n_samples=11)
        assert run(tmp_path, "run", cfg) == EXIT_OK
        table = csvio.read_table(tmp_path / "out" / "franson_map.csv")
        assert table.shape == (121, 3)
        assert table[0, 2] == pytest.approx(1.0, abs=1e-12)
        img = csvio.read_pnm(tmp_path / "out" / "franson_map.pgm")
        assert img.shape == (11, 11)

    def test_sweep_lengths_increase(self, tmp_path):
        cfg = with_analysis(COUNTERPROP, type="sweep", lengths={"start": 4, "stop": 2e4, "count": 5})
        assert run(tmp_path, "franson", cfg) == EXIT_OK
        table = csvio.read_table(tmp_path / "out" / "visibility_curve.csv")
        assert np.all(np.diff(table[:, 0]) > 0)
        assert np.all((table[:, 1] >= 0) & (table[:, 1] <= 1))

    def test_alias_guard_exit_code(self, tmp_path):
        cfg = with_analysis({**COUNTERPROP, "grid": {"n_points": 101}},
                            type="map", tau_range=[0, 400], n_samples=11)
        assert run(tmp_path, "franson", cfg) == EXIT_ALIAS
        assert not (tmp_path / "out" / "franson_map.csv").exists()


class TestConfigErrors:
    @pytest.mark.parametrize("cfg", [
        {"units": "x"},
        {**COUNTERPROP, "analysis": {"type": "nope"}},
        {**COUNTERPROP, "extra": 1, "analysis": {"type": "classify"}},
        {**COUNTERPROP, "grid": {"n_points": 128}, "analysis": {"type": "classify"}},
        {"units": "normalized",
         "source": {"type": "counterprop", "pump": {"tau": "inf", "width_w": "inf"},
                    "model": {"kind": "taylor", "omega0": 0.5, "betas": [0, 1]}},
         "analysis": {"type": "classify"}},
        {"units": "normalized",
         "source": {"type": "counterprop", "pump": {"tau": 20, "bandwidth": 0.1, "width_w": 2},
                    "model": {"kind": "taylor", "omega0": 0.5, "betas": [0, 1]}},
         "analysis": {"type": "classify"}},
        {**COUNTERPROP, "analysis": {"type": "sweep", "lengths": [3, 2, 1]}},
    ])
    def test_rejected(self, tmp_path, cfg):
        assert run(tmp_path, "franson", cfg) == EXIT_CONFIG

    def test_unreadable(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["franson", "--config", str(bad)]) == EXIT_CONFIG
        assert main(["franson", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG

    def test_threads_must_be_positive(self, tmp_path):
        cfg = with_analysis(COUNTERPROP, type="classify")
        assert run(tmp_path, "franson", cfg, "--threads", "0") == EXIT_CONFIG

    def test_fig_units(self, tmp_path):
        assert run(tmp_path, "fig3", {"units": "SI"}) == EXIT_CONFIG
        assert run(tmp_path, "fig4", {"units": "normalized"}) == EXIT_CONFIG


class TestValidateAndResolve:
    def test_validate_prints_resolved(self, tmp_path, capsys):
        cfg = with_analysis(COLLINEAR_SI, type="visibility")
        assert run(tmp_path, "franson", cfg, "--validate") == EXIT_OK
        resolved = json.loads(capsys.readouterr().out)
        assert resolved["grid"]["n_points"] == 257
        assert resolved["source"]["poling_period"] == "solve"
        assert not (tmp_path / "out").exists()

    def test_resolve_is_idempotent(self):
        once = resolve(with_analysis(COUNTERPROP, type="map"))
        assert resolve(once) == once

    def test_automatic_grid_span(self):
        resolved = resolve(with_analysis(COUNTERPROP, type="map"))
        grid = build_grid(resolved)
        # first-order estimate for τ = 20, Wβ1 = 60
        # ν_l = (ν_sum + ν_diff)/2 with variances 1/(2τ²) and 1/(2(Wβ1)²)
        sigma = math.sqrt((1 / (2 * 20 ** 2) + 1 / (2 * 60 ** 2)) / 4)
        assert grid.half_span == pytest.approx(5 * sigma, rel=1e-9)

    def test_bandwidth_converted_to_tau(self):
        resolved = resolve(with_analysis(COLLINEAR_SI, type="visibility"))
        tau = resolved["source"]["pump"]["tau"]
        assert tau == pytest.approx(2 * math.sqrt(math.log(2)) / (2 * math.pi * 3e12), rel=1e-12)

    def test_load_config_from_csv_header(self, tmp_path):
        cfg = with_analysis(COUNTERPROP, type="classify")
        assert run(tmp_path, "franson", cfg) == EXIT_OK
        embedded = load_config(tmp_path / "out" / "classification.csv")
        assert embedded == resolve(cfg)
        bare = tmp_path / "bare.csv"
        bare.write_text("# columns: a\n1.0\n")
        with pytest.raises(ConfigError):
            load_config(bare)


class TestDeterminism:
    def test_byte_identical_rerun_and_header_roundtrip(self, tmp_path):
        cfg = with_analysis(COUNTERPROP, type="sweep", lengths=[4, 40, 400])
        first = tmp_path / "first"
        second = tmp_path / "second"
        path = write_config(tmp_path, cfg)
        assert main(["franson", "--config", str(path), "--out", str(first)]) == EXIT_OK
        assert main(["franson", "--config", str(path), "--out", str(second), "--threads", "3"]) == 0
        a = (first / "visibility_curve.csv").read_bytes()
        assert a == (second / "visibility_curve.csv").read_bytes()
        third = tmp_path / "third"
        assert main(["franson", "--config", str(first / "visibility_curve.csv"),
                     "--out", str(third)]) == EXIT_OK
        assert (third / "visibility_curve.csv").read_bytes() == a


@pytest.mark.slow
class TestFigures:
    def test_fig3(self, tmp_path, capsys):
        cfg = {"units": "normalized", "fig3": {"n_points": 257, "n_samples": 41,
                                               "tau_range": [0, 15]}}
        assert run(tmp_path, "fig3", cfg) == EXIT_OK
        out = capsys.readouterr().out
        assert "fig3a: anti_correlated" in out and "fig3b: correlated" in out
        summary = csvio.read_table(tmp_path / "out" / "fig3_summary.csv")
        np.testing.assert_allclose(summary[:, 1], 1.0, atol=1e-12)
        np.testing.assert_allclose(summary[:, 2], 0.5, atol=0.02)
        for tag in "ab":
            assert csvio.read_pnm(tmp_path / "out" / f"fig3{tag}_map.pgm").shape == (41, 41)

    def test_fig4(self, tmp_path, capsys):
        cfg = {"units": "SI", "fig4": {"lengths": {"start": 1e-5, "stop": 1e-2, "count": 4}}}
        assert run(tmp_path, "fig4", cfg) == EXIT_OK
        assert "solved poling period" in capsys.readouterr().out
        cp = csvio.read_table(tmp_path / "out" / "fig4_counterprop.csv")
        col = csvio.read_table(tmp_path / "out" / "fig4_collinear.csv")
        np.testing.assert_array_equal(cp[:, 0], col[:, 0])
        assert csvio.read_pnm(tmp_path / "out" / "fig4_overlay.ppm").shape == (320, 480, 3)


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path, with_analysis(COUNTERPROP, type="classify"))
    proc = subprocess.run(
        [sys.executable, "-m", "autophase", "franson", "--config", str(cfg), "--out",
         str(tmp_path / "o")], capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.splitlines()[0] in {"anti_correlated", "correlated", "intermediate"}
