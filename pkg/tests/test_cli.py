"""Tests for the command-line interface and config files."""

import json

import numpy as np
import pytest

from kernelrisk.cli import build_truth, main, parse_domain
from kernelrisk.config import parse_config_file, resolve
from kernelrisk.kernels import Box, Kernel, KernelExpansion, kernel_from_config


class TestConfig:
    def test_parse_key_value_file(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "# comment\n"
            "alpha = 1.5\n"
            "n-grid = \"100,200\"\n"
            "trials = 7   # inline comment\n"
            "noise = uniform\n"
            "log_factor = true\n",
            encoding="utf-8")
        values = parse_config_file(cfg)
        assert values == {"alpha": 1.5, "n_grid": "100,200", "trials": 7,
                          "noise": "uniform", "log_factor": True}

    def test_malformed_line(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("just a line\n", encoding="utf-8")
        with pytest.raises(ValueError):
            parse_config_file(cfg)

    def test_precedence_flag_over_file_over_default(self):
        class Args:
            alpha = 1.2
            trials = None
            seed = None

        merged = resolve(Args(), {"trials": 9, "alpha": 1.9},
                         {"alpha": 2.0, "trials": 5, "seed": 0})
        assert merged == {"alpha": 1.2, "trials": 9, "seed": 0}


class TestHelpers:
    def test_parse_domain_one_dim(self):
        assert parse_domain("0,1") == Box((0.0,), (1.0,))

    def test_parse_domain_two_dim(self):
        assert parse_domain("0,0;1,2") == Box((0.0, 0.0), (1.0, 2.0))

    def test_build_truth_norm(self):
        kern = Kernel("matern", Box((0.0,), (1.0,)), sobolev_order=1.0,
                      length_scale=0.25)
        truth = build_truth(kern, {"fstar_centers": 5, "fstar_norm": 0.4})
        assert truth.rkhs_norm() == pytest.approx(0.4, rel=1e-9)


class TestCommands:
    def test_fit_writes_loadable_record(self, tmp_path, capsys):
        out = tmp_path / "fit.json"
        code = main(["fit", "--alpha", "2", "--n", "50", "--lam", "0.1",
                     "--seed", "3", "--out", str(out)])
        assert code == 0
        record = json.loads(out.read_text())
        kern = kernel_from_config(record["kernel"])
        f = KernelExpansion(kern, np.array(record["centers"]),
                            np.array(record["coefficients"]))
        assert f.rkhs_norm() <= record["lam"] ** -0.5 + 1e-6
        assert "objective" in record

    def test_bounds_eval_table_and_csv(self, tmp_path, capsys):
        out = tmp_path / "bounds.csv"
        code = main(["bounds", "eval", "--alpha", "1.5", "--p", "1",
                     "--lam", "0.1", "--n", "1000", "--kappa", "0.8",
                     "--q", "inf", "--csv", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "oracle_epsilon_threshold" in text
        assert "hinge_noise_exponent" in text
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "name,value"
        values = dict(line.split(",") for line in lines[1:])
        assert float(values["l2_rate_exponent"]) == pytest.approx(
            2 / 3 - (0.8 - 2 / 3) * 4)
        assert float(values["hinge_noise_exponent"]) == pytest.approx(4 / 3)

    def test_covering_fit_csv(self, tmp_path, capsys):
        out = tmp_path / "cov.csv"
        code = main(["covering", "fit", "--n", "150", "--csv", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "delta,log_cover_lower,log_cover_upper,used_in_fit"
        assert len(lines) == 17

    def test_rates_run_csv_plot_ready(self, tmp_path, capsys):
        out = tmp_path / "rates.csv"
        code = main(["rates", "run", "--alpha", "2", "--n-grid", "40,80",
                     "--trials", "3", "--seed", "1", "--kappa", "0.5",
                     "--covering-exponent", "1.0", "--csv", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "n,mean_excess_l2,stderr"
        assert len(lines) == 3

    def test_validate_variance_exit_code(self, capsys):
        code = main(["validate", "variance", "--alpha", "1.5",
                     "--functions", "3", "--mc-points", "5000", "--seed", "2"])
        assert code == 0

    def test_robustness_run_with_config(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("trials = 2\nn = 60\neta-grid = \"0,0.1\"\n"
                       "alpha-grid = \"1.1,2\"\n", encoding="utf-8")
        out = tmp_path / "rob.csv"
        code = main(["--config", str(cfg), "robustness", "run",
                     "--csv", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "eta,alpha,mean_excess_l2,stderr,trials"
        assert len(lines) == 5  # 2 etas x 2 alphas

    def test_flag_overrides_config(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("alpha = 2\nn = 40\nlam = 0.1\n", encoding="utf-8")
        main(["--config", str(cfg), "fit", "--alpha", "1.5", "--seed", "0"])
        text = capsys.readouterr().out
        assert "alpha=1.5" in text
