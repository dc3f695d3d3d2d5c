"""Config ingestion, dispatch, output emission, and the CLI contract."""

import json
import math

import numpy as np
import pytest

from fraclab.bsvf import write_bsvf
from fraclab.cli import (
    ConfigError,
    emit_outputs,
    execute,
    load_config,
    main,
    validate_config,
)
from fraclab.decay import NormSeries
from fraclab.spectral import Grid2D
from helpers import random_band_field


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload) if isinstance(payload, dict) else payload)
    return path


class TestLoadConfig:
    def test_minimal_oracle_defaults(self, tmp_path):
        cfg = load_config(write_config(tmp_path, {"kind": "oracle", "alpha": 2.0, "s": 1.0, "ell": 0.0}))
        assert cfg["dimension"] == 2
        assert cfg["density"] == {"form": "ball_indicator", "radius": 1.0, "dimension": 2}
        assert cfg["t_lo"] == 10.0 and cfg["t_hi"] == 1e4
        assert cfg["samples_per_decade"] == 40
        assert cfg["tolerance_pct"] == 2.0
        assert cfg["theorem"] == "linear"

    def test_out_of_range_claim_rejected(self, tmp_path):
        path = write_config(tmp_path, {"kind": "ks", "s": 3.0, "p": 2.0})
        with pytest.raises(ConfigError, match="1 - 2/p < s < 1 \\+ 2/p"):
            load_config(path)

    def test_duplicate_key_rejected_with_locations(self, tmp_path):
        text = '{\n  "kind": "oracle",\n  "alpha": 1.0,\n  "alpha": 2.0\n}\n'
        path = write_config(tmp_path, text)
        with pytest.raises(ConfigError, match="duplicate key 'alpha' at line 3 and line 4"):
            load_config(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path, {"kind": "oracle", "alpa": 1.0})
        with pytest.raises(ConfigError, match="unknown key"):
            load_config(path)

    def test_parse_error_reports_line(self, tmp_path):
        path = write_config(tmp_path, '{"kind": "oracle",\n  broken\n}')
        with pytest.raises(ConfigError, match="line 2"):
            load_config(path)

    def test_kind_required(self, tmp_path):
        with pytest.raises(ConfigError, match="'kind'"):
            load_config(write_config(tmp_path, {"alpha": 1.0}))

    def test_roundtrip_canonical(self, tmp_path):
        cfg = load_config(write_config(tmp_path, {"kind": "sqg", "seed": 4}))
        assert validate_config(cfg) == cfg

    def test_window_defaults_for_runs(self, tmp_path):
        cfg = load_config(write_config(tmp_path, {"kind": "sqg"}))
        xi_min = 2 * math.pi / cfg["L"]
        assert cfg["window_hi"] == pytest.approx(0.1 / xi_min)
        assert cfg["window_lo"] >= 1.0


class TestExecuteBesov:
    def test_prints_norm_and_range(self, tmp_path, rng, capsys):
        g = Grid2D(64, 2 * math.pi)
        field = random_band_field(g, rng)
        fpath = tmp_path / "field.bsvf"
        write_bsvf(fpath, field)
        cfg = validate_config({"kind": "besov", "field": str(fpath), "s": 0.0, "p": 2.0, "r": 1.0})
        result = execute(cfg, tmp_path / "out")
        assert result.exit_code == 0
        out = capsys.readouterr().out
        assert "B0_2_1" in out and "blocks j in" in out
        record = json.loads((tmp_path / "out" / "run.json").read_text())
        assert record["extras"]["value"] > 0
        assert record["extras"]["grid_n"] == 64
        # one-line record
        assert (tmp_path / "out" / "run.json").read_text().count("\n") == 1


class TestEmitOutputs:
    def test_empty_series_writes_record_only(self, tmp_path):
        record = {"kind": "oracle", "pass": True}
        written = emit_outputs(record, {}, tmp_path)
        names = {p.name for p in written}
        assert names == {"run.json"}

    def test_three_point_series_gives_four_line_csv(self, tmp_path):
        series = NormSeries(np.array([1.0, 2.0, 4.0]), np.array([3.0, 2.0, 1.5]), "x")
        record = {"kind": "oracle", "pass": True}
        emit_outputs(record, {"demo": series}, tmp_path)
        text = (tmp_path / "demo.csv").read_text()
        lines = text.splitlines()
        assert lines[0] == "t,value"
        assert len(lines) == 4
        assert lines[1] == "1.0,3.0"

    def test_csv_floats_roundtrip(self, tmp_path):
        times = np.array([1.0 / 3.0, 2.0 / 3.0, 1.23456789012345e-7 + 1.0])
        values = np.array([math.pi, math.e, 1.0 + 2 ** -40])
        emit_outputs({"kind": "x", "pass": True}, {"s": NormSeries(times, values, "")}, tmp_path)
        rows = (tmp_path / "s.csv").read_text().splitlines()[1:]
        for row, t, v in zip(rows, times, values):
            ts, vs = row.split(",")
            assert float(ts) == t and float(vs) == v


class TestDeterminism:
    def test_oracle_rerun_byte_identical(self, tmp_path):
        cfg = validate_config(
            {"kind": "oracle", "alpha": 2.0, "s": 1.0, "ell": 0.0, "tolerance_pct": 10.0,
             "t_lo": 10.0, "t_hi": 100.0, "samples_per_decade": 10}
        )
        ra = execute(dict(cfg), tmp_path / "a")
        rb = execute(dict(cfg), tmp_path / "b")
        assert ra.exit_code == 0 and rb.exit_code == 0
        for name in ("decay_ell0_r1.csv", "preserved_s1_rinf.csv", "plot.gp"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestLinearKind:
    def test_plumbing_and_oracle_comparison(self, tmp_path):
        cfg = validate_config(
            {"kind": "linear", "n": 128, "L": 2 * math.pi * 16, "alpha": 1.0,
             "s": 1.0, "ell": 0.0,
             "density": {"form": "power_law", "exponent": 1.0, "r_lo": 0.3, "r_hi": 1.2},
             "samples_per_decade": 60, "tolerance_pct": 1e6}
        )
        result = execute(cfg, tmp_path / "out")
        assert result.exit_code == 0
        record = result.record
        assert record["extras"]["grid_oracle_max_rel_dev"] <= 0.01
        assert record["extras"]["preserved_nonincreasing"] is True
        assert (tmp_path / "out" / "decay_ell0_r1.csv").exists()


class TestCheckpointLoop:
    def test_run_produces_bsvf_that_besov_consumes(self, tmp_path):
        out = tmp_path / "run"
        cfg = validate_config(
            {"kind": "sqg", "n": 64, "L": 2 * math.pi * 8, "dt": 0.05, "T": 1.0,
             "t_lo": 0.1, "window_lo": 0.2, "window_hi": 0.7,
             "samples_per_decade": 40, "tolerance_pct": 1e6}
        )
        result = execute(cfg, out)
        assert result.exit_code == 0
        assert result.record["extras"]["final_state_file"] == "final.bsvf"
        bcfg = validate_config(
            {"kind": "besov", "field": str(out / "final.bsvf"), "s": 0.0, "p": 2.0, "r": 1.0}
        )
        rb = execute(bcfg, tmp_path / "besov")
        assert rb.exit_code == 0
        assert rb.record["extras"]["value"] > 0


class TestNumericalAbort:
    def test_cfl_violation_exits_3_with_failure_stanza(self, tmp_path):
        cfg = validate_config(
            {"kind": "sqg", "n": 64, "L": 2 * math.pi * 8, "dt": 5000.0, "T": 10000.0,
             "epsilon": 1e-2, "window_lo": 0.1, "window_hi": 0.5, "t_lo": 2500.0}
        )
        result = execute(cfg, tmp_path / "out")
        assert result.exit_code == 3
        assert result.record["failure"]["type"] == "CFLError"
        assert "max|u|" in result.record["failure"]["message"]
        assert result.record["pass"] is False
        # the record is still written for post-mortem inspection
        assert (tmp_path / "out" / "run.json").exists()


class TestSelftestKind:
    def test_full_property_suite_passes(self, tmp_path, capsys):
        cfg = validate_config({"kind": "selftest", "seed": 2024})
        result = execute(cfg, tmp_path / "out")
        out = capsys.readouterr().out
        assert result.exit_code == 0
        assert result.record["pass"] is True
        assert result.record["extras"]["n_failed"] == 0
        assert out.count("PASS") == result.record["extras"]["n_checks"]


class TestMain:
    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "missing.json"
        code = main(["oracle", "--config", str(bad)])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_kind_mismatch_is_usage_error(self, tmp_path, capsys):
        path = write_config(tmp_path, {"kind": "sqg"})
        code = main(["oracle", "--config", str(path)])
        assert code == 2

    def test_besov_requires_config(self, capsys):
        assert main(["besov"]) == 2

    def test_oracle_end_to_end(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("FRACLAB_OUT", raising=False)
        path = write_config(
            tmp_path,
            {"kind": "oracle", "alpha": 2.0, "s": 1.0, "ell": 0.0,
             "t_lo": 10.0, "t_hi": 1000.0, "samples_per_decade": 15},
        )
        out = tmp_path / "results"
        code = main(["oracle", "--config", str(path), "--out", str(out)])
        assert code == 0
        record = json.loads((out / "run.json").read_text())
        assert record["pass"] is True
        assert record["report"]["entries"][0]["passed"] is True
        assert abs(record["fits"][0]["slope"] + 0.5) <= 0.02 * 0.5
        assert (out / "plot.gp").exists()

    def test_env_overrides_out_flag(self, tmp_path, capsys, monkeypatch):
        env_dir = tmp_path / "from-env"
        monkeypatch.setenv("FRACLAB_OUT", str(env_dir))
        path = write_config(
            tmp_path,
            {"kind": "oracle", "alpha": 2.0, "s": 1.0, "ell": 0.0, "tolerance_pct": 10.0,
             "t_lo": 10.0, "t_hi": 100.0, "samples_per_decade": 10},
        )
        code = main(["oracle", "--config", str(path), "--out", str(tmp_path / "ignored")])
        assert code == 0
        assert (env_dir / "run.json").exists()
        assert not (tmp_path / "ignored").exists()

    def test_seed_and_tolerance_overrides(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("FRACLAB_OUT", raising=False)
        path = write_config(
            tmp_path,
            {"kind": "oracle", "alpha": 2.0, "s": 1.0, "ell": 0.0, "seed": 1,
             "t_lo": 10.0, "t_hi": 100.0, "samples_per_decade": 10, "tolerance_pct": 10.0},
        )
        out = tmp_path / "o"
        code = main(["oracle", "--config", str(path), "--out", str(out), "--seed", "99",
                     "--tolerance", "7.5"])
        assert code == 0
        record = json.loads((out / "run.json").read_text())
        assert record["config"]["seed"] == 99
        assert record["config"]["tolerance_pct"] == 7.5
