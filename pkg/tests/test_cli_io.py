"""Event-log files, real-data ingestion, configuration and the command line."""

import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from src.config import LOG_LEVEL_ENV, load_config
from src.errors import ConfigValidationError, LogValidationError
from src.guardrails.log_guardrail import EventLogGuardrail
from src.tools.artifacts import artifact_name, to_jsonable
from src.tools.event_log_io import event_log_lines, parse_event_log, read_event_log, write_event_log
from src.tools.real_data import ingest_real_log, parse_real_log, real_log_lines
from src.ui.cli import main

SAMPLE = Path(__file__).resolve().parent.parent / "data" / "sample_real_log.jsonl"


class TestEventLogFiles:
    def test_write_then_read(self, model1_log, tmp_path):
        path = write_event_log(model1_log, tmp_path / "model1.jsonl")
        log = read_event_log(path)
        assert log.records == model1_log.records
        assert log.header.p0 == model1_log.header.p0
        assert log.header.seed == 3

    def test_state_only_records_survive(self, model2_log):
        log = parse_event_log(event_log_lines(model2_log))
        assert [r.z for r in log.records] == [r.z for r in model2_log.records]

    def test_violation_carries_line_number(self, model1_log):
        lines = event_log_lines(model1_log)
        row = json.loads(lines[2])
        row["t"] = "0.0"
        lines[2] = json.dumps(row)
        with pytest.raises(LogValidationError) as info:
            parse_event_log(lines)
        assert info.value.line_number == 3

    def test_guardrail_report(self):
        report = EventLogGuardrail().validate_lines(["not json"])
        assert not report["valid"]
        assert report["violations"][0]["line"] == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(LogValidationError):
            read_event_log(tmp_path / "absent.jsonl")


class TestRealData:
    def test_ingest_sample(self):
        log = ingest_real_log(SAMPLE)
        assert len(log) == 14
        assert len(log.header.ticks) == 2
        assert log.header.source == "real"
        assert log.counts() == {"1+": 2, "2-": 2, "1-": 2, "2+": 1}
        assert log.records[0].z is None
        assert log.records[-1].x["signal"][0] == [0.16]

    def test_unit_scales(self):
        log = ingest_real_log(SAMPLE, {"time_scale": 2.0, "price_scale": 100.0})
        assert log.horizon == pytest.approx(120.0)
        assert log.header.ticks == pytest.approx((0.5, 0.5))
        assert log.records[0].t == pytest.approx(3.64)

    def test_imbalance_outside_unit_interval(self):
        lines = SAMPLE.read_text().splitlines()
        row = json.loads(lines[1])
        row["imbalance"] = 1.5
        lines[1] = json.dumps(row)
        with pytest.raises(LogValidationError) as info:
            parse_real_log(lines)
        assert info.value.line_number == 2

    def test_move_must_be_one_tick(self):
        lines = SAMPLE.read_text().splitlines()
        row = json.loads(lines[3])
        row["price"] = 20.0175
        lines[3] = json.dumps(row)
        with pytest.raises(LogValidationError):
            parse_real_log(lines)

    def test_export_then_ingest(self, model2_log):
        log = parse_real_log(real_log_lines(model2_log), preset_id="model2")
        assert [r.z for r in log.records] == [r.z for r in model2_log.records]
        assert [r.t for r in log.records] == [r.t for r in model2_log.records]
        assert [r.p for r in log.records] == [r.p for r in model2_log.records]

    def test_queue_logs_cannot_be_exported(self, model1_log):
        with pytest.raises(LogValidationError):
            real_log_lines(model1_log)


class TestConfig:
    def test_defaults(self):
        config = load_config()
        assert config.preset.id == "model1"
        assert config.simulation.scheme == "frozen"

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.safe_dump({"simulation": {"horizon": 1.0, "speed": 3}}))
        with pytest.raises(ConfigValidationError):
            load_config(str(path))

    def test_overrides_win(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(yaml.safe_dump({"simulation": {"horizon": 1.0, "seed": 4}}))
        config = load_config(str(path), {"simulation": {"seed": 9}})
        assert config.simulation.horizon == 1.0
        assert config.simulation.seed == 9

    def test_odd_degree_rejected(self):
        with pytest.raises(ConfigValidationError):
            load_config(overrides={"likelihood": {"n_deg": 5}})

    def test_log_level_from_environment(self, monkeypatch):
        monkeypatch.setenv(LOG_LEVEL_ENV, "debug")
        assert load_config().logging.level == "DEBUG"

    def test_shipped_config_is_valid(self):
        root = Path(__file__).resolve().parent.parent
        for path in [root / "config.yaml", *sorted((root / "configs").glob("*.yaml"))]:
            load_config(str(path))


class TestArtifacts:
    def test_artifact_name(self):
        assert artifact_name("scaling-check", "model2", 7) == "scaling_check_model2_seed7.json"
        assert artifact_name("estimate", "model1", None, ".csv") == "estimate_model1_seednone.csv"

    def test_to_jsonable(self):
        data = to_jsonable({"a": np.arange(2), "b": (np.float64(0.5), float("inf")), 3: np.bool_(True)})
        assert data == {"a": [0, 1], "b": [0.5, "inf"], "3": True}


def write_run_config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({
        "preset": {"id": "constant", "theta": {"rate.a": 1.0, "rate.b": 2.0, "sigma": 0.01}},
        "simulation": {"horizon": 5.0, "seed": 1, "scheme": "thinning"},
        "likelihood": {"n_deg": 2, "min_substeps": 1, "max_step": 1.0},
    }))
    return str(path)


class TestCommandLine:
    def test_simulate_then_likelihood(self, tmp_path):
        config = write_run_config(tmp_path)
        out = tmp_path / "out"
        assert main(["simulate", "--config", config, "--out", str(out), "--seed", "2"]) == 0
        log_path = out / "simulate_constant_seed2.jsonl"
        assert log_path.exists()
        summary = json.loads((out / "simulate_constant_seed2.json").read_text())
        assert summary["config"]["simulation"]["seed"] == 2
        assert "format_version" in summary

        assert main(["likelihood", "--config", config, "--out", str(out), "--seed", "2", "--log", str(log_path)]) == 0
        result = json.loads((out / "likelihood_constant_seed2.json").read_text())
        assert result["result"]["intervals"] >= 1
        assert isinstance(result["result"]["value"], float)

    def test_artifacts_are_byte_identical(self, tmp_path):
        config = write_run_config(tmp_path)
        args = ["simulate", "--config", config, "--out", str(tmp_path / "out"), "--horizon", "2.0"]
        assert main(args) == 0
        first = (tmp_path / "out" / "simulate_constant_seed1.json").read_bytes()
        first_log = (tmp_path / "out" / "simulate_constant_seed1.jsonl").read_bytes()
        assert main(args) == 0
        assert (tmp_path / "out" / "simulate_constant_seed1.json").read_bytes() == first
        assert (tmp_path / "out" / "simulate_constant_seed1.jsonl").read_bytes() == first_log

    def test_validate_log(self, tmp_path, model1_log, capsys):
        config = write_run_config(tmp_path)
        good = write_event_log(model1_log, tmp_path / "good.jsonl")
        assert main(["validate-log", "--config", config, "--log", str(good)]) == 0

        bad = tmp_path / "bad.jsonl"
        bad.write_text(good.read_text().replace('"type": "header"', '"type": "record"'))
        assert main(["validate-log", "--config", config, "--log", str(bad)]) == 2
        assert f"{bad}:1:" in capsys.readouterr().out

    def test_validate_real_log(self, tmp_path):
        config = write_run_config(tmp_path)
        assert main(["validate-log", "--config", config, "--log", str(SAMPLE), "--real"]) == 0

    def test_missing_log(self, tmp_path):
        config = write_run_config(tmp_path)
        code = main(["likelihood", "--config", config, "--out", str(tmp_path), "--log", str(tmp_path / "nope.jsonl")])
        assert code == 2

    def test_bad_config_exit_code(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("simulation: {horizon: -1}\n")
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 2
