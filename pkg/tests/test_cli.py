import json

import numpy as np
import pytest
from click.testing import CliRunner

from ellipticbeam import __version__
from ellipticbeam.cli import _format_csv, load_config, main, read_csv
from ellipticbeam.errors import ConfigError
from ellipticbeam.quantum_optics import GaussianQuadState, propagate


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)


class TestParams:
    def test_fig1_weak(self, runner, write_config):
        cfg, out = write_config("fig1")
        res = invoke(runner, "params", "--config", cfg)
        assert res.exit_code == 0, res.stderr
        doc = json.loads(res.stdout)
        assert doc["rytov_sq"] == 1.5
        assert doc["regime_used"] == "weak"
        assert doc["tool_version"] == __version__
        assert json.loads((out / "params.json").read_text()) == doc

    def test_fig2_strong(self, runner, write_config):
        cfg, _ = write_config("fig2")
        res = invoke(runner, "params", "--config", cfg)
        assert json.loads(res.stdout)["regime_used"] == "strong"

    def test_regime_override(self, runner, write_config):
        cfg, _ = write_config("fig2")
        res = invoke(runner, "params", "--config", cfg, "--regime", "weak")
        assert json.loads(res.stdout)["regime_used"] == "weak"


class TestConfigErrors:
    def test_missing_wavelength(self, runner, write_config):
        cfg, _ = write_config("fig1", beam__wavelength_m=None)
        res = invoke(runner, "params", "--config", cfg)
        assert res.exit_code == 2
        assert "beam.wavelength" in res.stderr

    def test_load_config_names_field(self, figure_config):
        doc = figure_config("fig1")
        doc["channel"]["aperture_radius_m"] = "wide"
        with pytest.raises(ConfigError) as info:
            load_config(doc)
        assert info.value.field == "channel.aperture_radius_m"

    def test_unknown_model(self, runner, write_config):
        cfg, _ = write_config("fig1")
        assert invoke(runner, "pdt", "--config", cfg, "--models", "gamma_gamma").exit_code == 2

    def test_squeezing_needs_input_state(self, runner, write_config):
        cfg, _ = write_config("fig1")
        assert invoke(runner, "squeezing", "--config", cfg).exit_code == 2

    def test_overrides_do_not_mutate_document(self, figure_config):
        doc = figure_config("fig1")
        cfg = load_config(doc, seed=5, n_samples=10)
        assert cfg.sampler.seed == 5 and cfg.sampler.n_samples == 10
        assert doc["sampler"]["n_samples"] == 100000


class TestExitCodes:
    def test_numeric_error(self, runner, write_config):
        # the strong table needs a Fresnel number above 1
        cfg, _ = write_config("fig1")
        res = invoke(runner, "params", "--config", cfg, "--regime", "strong")
        assert res.exit_code == 3
        assert "fresnel_omega" in res.stderr

    def test_io_error_on_missing_config(self, runner, tmp_path):
        assert invoke(runner, "params", "--config", tmp_path / "absent.json").exit_code == 4

    def test_io_error_on_blocked_output(self, runner, write_config, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        cfg, _ = write_config("fig1", output_dir=str(blocker / "sub"))
        assert invoke(runner, "params", "--config", cfg).exit_code == 4


class TestCurves:
    def test_compare_emits_all_models(self, runner, write_config):
        cfg, out = write_config("fig1")
        res = invoke(runner, "compare", "--config", cfg)
        assert res.exit_code == 0, res.stderr
        for tag in ("elliptic", "beam_wandering", "log_normal"):
            header, data = read_csv(out / f"pdt_{tag}.csv")
            assert header == ["eta", "density"] and data.shape[1] == 2
            assert (out / f"exceedance_{tag}.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert {"tool_version", "config_hash", "seed", "regime_used"} <= summary.keys()
        assert summary["seed"] == 20160826

    def test_lognormal_tail_past_one(self, runner, write_config):
        cfg, out = write_config("fig1")
        invoke(runner, "exceedance", "--config", cfg, "--models", "elliptic,log_normal")
        _, ln = read_csv(out / "exceedance_log_normal.csv")
        _, el = read_csv(out / "exceedance_elliptic.csv")
        assert ln[-1, 0] == pytest.approx(1.2, abs=2e-3)
        assert np.any((ln[:, 0] > 1) & (ln[:, 1] > 0))
        assert el[-1, 0] == 1.0

    def test_byte_identical_across_runs_and_threads(self, runner, write_config, tmp_path):
        cfg, _ = write_config("fig1")
        outs = []
        for i, threads in enumerate((1, 1, 4)):
            out = tmp_path / f"run{i}"
            invoke(runner, "compare", "--config", cfg, "--out", out, "--threads", threads)
            outs.append(out)
        for name in sorted(p.name for p in outs[0].glob("*.csv")):
            blobs = {(o / name).read_bytes() for o in outs}
            assert len(blobs) == 1, name

    def test_csv_round_trip(self, runner, write_config):
        cfg, out = write_config("fig1")
        invoke(runner, "pdt", "--config", cfg, "--models", "elliptic")
        path = out / "pdt_elliptic.csv"
        raw = path.read_bytes()
        assert b"\r" not in raw
        header, data = read_csv(path)
        assert _format_csv(header, list(data.T)).encode("ascii") == raw

    def test_samples_command(self, runner, write_config):
        cfg, out = write_config("fig2", n_samples=500)
        invoke(runner, "sample", "--config", cfg)
        _, data = read_csv(out / "samples_elliptic.csv")
        assert data.shape == (500, 1)
        assert not (out / "samples_log_normal.csv").exists()

    def test_config_hash_ignores_output_dir(self, figure_config):
        doc = figure_config("fig1")
        a = load_config(doc, output_dir="x").config_hash
        b = load_config(doc, output_dir="y").config_hash
        assert a == b != load_config(doc, seed=1).config_hash


class TestSqueezing:
    def test_fig3_curves(self, runner, write_config):
        cfg, out = write_config("fig3", n_samples=20_000)
        res = invoke(runner, "squeezing", "--config", cfg)
        assert res.exit_code == 0, res.stderr
        header, ell = read_csv(out / "squeezing_elliptic.csv")
        assert header == ["eta_min", "squeezing_db", "acceptance_fraction", "truncated"]
        ok = ell[:, 3] == 0
        assert np.all(np.diff(ell[ok, 1]) <= 1e-6)

    def test_zero_threshold_row_is_unpostselected(self, runner, write_config):
        cfg, out = write_config("fig3", n_samples=3000)
        invoke(runner, "squeezing", "--config", cfg, "--models", "elliptic")
        invoke(runner, "sample", "--config", cfg, "--models", "elliptic")
        _, eta = read_csv(out / "samples_elliptic.csv")
        _, curve = read_csv(out / "squeezing_elliptic.csv")
        expected = propagate(GaussianQuadState.squeezed(-2.4), eta[:, 0]).squeezing_db
        # samples are stored to 9 significant digits
        assert curve[0, 0] == 0.0
        assert curve[0, 1] == pytest.approx(expected, abs=1e-6)
        assert curve[0, 2] == 1.0

    def test_truncated_rows_flagged(self, runner, write_config):
        cfg, out = write_config("fig3", n_samples=2000, thresholds=[0.0, 0.5, 0.99])
        res = invoke(runner, "squeezing", "--config", cfg, "--models", "elliptic")
        assert res.exit_code == 0
        assert "rows flagged" in res.stderr
        _, curve = read_csv(out / "squeezing_elliptic.csv")
        assert curve.shape[0] == 3
        assert curve[2, 3] == 1 and np.isnan(curve[2, 1])
