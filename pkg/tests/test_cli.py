import json

import pytest

from warped_limit_lab.cli import (
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_USAGE,
    ExperimentConfig,
    build_config,
    load_config,
    main,
    run,
)


def read_summary(out_dir):
    return json.loads((out_dir / "summary.json").read_text())


class TestConfigParsing:
    def test_defaults(self):
        cfg = build_config(["growth"])
        assert cfg.experiment == "growth"
        assert cfg.alpha == 0.5
        assert cfg.p == "auto"
        assert cfg.options["l_min"] == 100

    def test_flag_override(self):
        cfg = build_config(["growth", "--alpha", "1.0", "--l-max", "5000"])
        assert cfg.alpha == 1.0
        assert cfg.options["l_max"] == 5000

    def test_config_file(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "# quick growth run\n"
            "alpha = 1.0\n"
            "l-min = 10\n"
            "l_max = 200\n",
        )
        cfg = build_config(["growth", "--config", str(path)])
        assert cfg.alpha == 1.0
        assert cfg.options["l_min"] == 10
        assert cfg.options["l_max"] == 200

    def test_flags_beat_config(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("alpha = 1.0\n")
        cfg = build_config(["growth", "--config", str(path), "--alpha", "0.75"])
        assert cfg.alpha == 0.75

    def test_unknown_config_key(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("no_such_option = 3\n")
        with pytest.raises(ValueError, match="no_such_option"):
            build_config(["growth", "--config", str(path)])

    def test_malformed_config_line(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("alpha 0.5\n")
        with pytest.raises(ValueError, match="malformed"):
            load_config(path)

    def test_auto_p_resolution(self):
        cfg = build_config(["growth", "--alpha", "1.0"])
        assert cfg.resolve_params().p == 25
        cfg2 = build_config(["growth", "--alpha", "1.0", "--p", "30"])
        assert cfg2.resolve_params().p == 30


class TestExitCodes:
    def test_usage_error_on_missing_subcommand(self):
        assert main([]) == EXIT_USAGE

    def test_usage_error_on_unknown_experiment(self):
        cfg = ExperimentConfig(experiment="nope", alpha=0.5)
        assert run(cfg) == EXIT_USAGE

    def test_usage_error_on_bad_option_value(self, tmp_path):
        code = main([
            "far-loop", "--alpha", "0.5", "--eps-list", "0.5,1.7",
            "--out-dir", str(tmp_path / "o"),
        ])
        assert code == EXIT_USAGE

    def test_claim_failure_exits_one(self, tmp_path):
        out = tmp_path / "fail"
        code = main([
            "curvature-scan", "--alpha", "1", "--p", "5",
            "--out-dir", str(out),
        ])
        assert code == EXIT_FAIL
        summary = read_summary(out)
        assert summary["pass"] is False
        failing = [c for c in summary["claims"] if not c["pass"]]
        assert failing
        assert "V" in failing[0]["details"]["nonpositive_components"]


class TestExperiments:
    def test_curvature_scan_artifacts(self, tmp_path):
        out = tmp_path / "curv"
        code = main([
            "curvature-scan", "--alpha", "1", "--p", "auto",
            "--n-grid", "200", "--out-dir", str(out),
        ])
        assert code == EXIT_PASS
        assert (out / "ricci_grid.csv").exists()
        scan = json.loads((out / "scan_report.json").read_text())
        assert scan["pass"] is True and scan["p"] == 25
        summary = read_summary(out)
        assert all(c["pass"] for c in summary["claims"])

    def test_growth_artifacts(self, tmp_path):
        out = tmp_path / "growth"
        code = main([
            "growth", "--alpha", "0.5", "--l-min", "100", "--l-max", "100000",
            "--n-l", "6", "--fit-l-min", "100", "--out-dir", str(out),
        ])
        assert code == EXIT_PASS
        lines = (out / "growth.csv").read_text().splitlines()
        assert lines[0] == "l,D,lower_bound,upper_bound"
        assert len(lines) == 7
        slope = read_summary(out)["claims"][0]["details"]["slope"]
        assert abs(slope - 0.5) < 0.03

    def test_lemma_bounds_artifacts(self, tmp_path):
        out = tmp_path / "bounds"
        code = main([
            "lemma-bounds", "--alpha", "0.5", "--l-min", "100",
            "--l-max", "10000", "--n-l", "3", "--out-dir", str(out),
        ])
        assert code == EXIT_PASS
        assert (out / "bounds.csv").exists()

    def test_far_loop_artifacts(self, tmp_path):
        out = tmp_path / "far"
        code = main([
            "far-loop", "--alpha", "0.5", "--s-list", "1000",
            "--eps-list", "0.3,0.1", "--out-dir", str(out),
        ])
        assert code == EXIT_PASS
        header = (out / "farloop.csv").read_text().splitlines()[0]
        assert header == "s,epsilon,l,length,size,ratio,analytic_ceiling"

    def test_orbit_dimension_artifacts(self, tmp_path):
        out = tmp_path / "orbit"
        code = main([
            "orbit-dimension", "--alpha", "0.5", "--out-dir", str(out),
        ])
        assert code == EXIT_PASS
        assert (out / "orbit.csv").exists()
        assert (out / "boxcount.csv").exists()
        summary = read_summary(out)
        dim = summary["claims"][0]["details"]["dimension"]
        assert abs(dim - 2.0) <= 0.1

    def test_halfline_artifacts(self, tmp_path):
        out = tmp_path / "half"
        code = main([
            "halfline", "--alpha", "0.5", "--s-list", "1000,10000",
            "--out-dir", str(out),
        ])
        assert code == EXIT_PASS
        assert (out / "halfline.csv").exists()

    def test_flatness_artifacts(self, tmp_path):
        out = tmp_path / "flat"
        code = main([
            "flatness", "--alpha", "0.5", "--s", "1000",
            "--rho-list", "0.1,0.05", "--n-points", "16",
            "--out-dir", str(out),
        ])
        assert code == EXIT_PASS
        lines = (out / "flatness.csv").read_text().splitlines()
        assert len(lines) == 3

    def test_oracle_check_artifacts(self, tmp_path):
        out = tmp_path / "oracle"
        code = main([
            "oracle-check", "--alpha", "1", "--l-list", "1",
            "--mesh-nodes", "150000", "--out-dir", str(out),
        ])
        assert code == EXIT_PASS
        rows = (out / "oracle.csv").read_text().splitlines()
        assert rows[0].startswith("l,alpha,base_r,c,r_star,length,delta_t")
        gap = float(rows[1].split(",")[-1])
        assert gap <= 0.03


def test_serial_reruns_byte_identical(tmp_path):
    args = [
        "growth", "--alpha", "0.5", "--l-min", "100", "--l-max", "10000",
        "--n-l", "5", "--fit-l-min", "100", "--jobs", "1",
    ]
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(args + ["--out-dir", str(out)]) == EXIT_PASS
        outs.append((out / "growth.csv").read_bytes())
    assert outs[0] == outs[1]
