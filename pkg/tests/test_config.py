"""
設定とユーティリティのテスト
"""
import json
import logging

import numpy as np
import pytest

from drsubmax.config import Config, RunConfig, load_config
from drsubmax.errors import ConfigError, GraphParseError
from drsubmax.utils import (
    format_error_payload,
    format_float,
    make_rng,
    measure_execution_time,
    sanitize_error_message,
    spawn_rngs,
)


class TestConfig:
    """環境変数で上書きする Config"""

    def test_defaults(self):
        config = Config()
        assert config.DEFAULT_SEED == 20220607
        assert config.STABILITY_ITERATIONS == 50
        assert config.QUADRATIC_BUDGETS[0] == 2.0
        config.validate()

    def test_from_env(self, monkeypatch):
        monkeypatch.setenv("CHECK_SAMPLES", "50")
        monkeypatch.setenv("RECORD_TIMING", "yes")
        monkeypatch.setenv("QUADRATIC_BUDGETS", "1, 2.5")
        monkeypatch.setenv("SMOOTHNESS_MODE", "gp")
        config = Config.from_env()
        assert config.CHECK_SAMPLES == 50
        assert config.RECORD_TIMING is True
        assert config.QUADRATIC_BUDGETS == [1.0, 2.5]
        assert config.SMOOTHNESS_MODE == "gp"

    def test_unparsable_value_keeps_default(self, monkeypatch, caplog):
        monkeypatch.setenv("PF_MAX_ITER", "many")
        with caplog.at_level(logging.WARNING):
            config = Config.from_env()
        assert config.PF_MAX_ITER == 100000
        assert "PF_MAX_ITER" in caplog.text

    @pytest.mark.parametrize("key,value", [
        ("ORACLE_TOL", 0.0),
        ("CHECK_SAMPLES", 0),
        ("GRID_RESOLUTION", 2.0),
        ("OUTPUT_FORMAT", "xml"),
        ("SMOOTHNESS_MODE", "exact"),
        ("FLOAT_DIGITS", 20),
    ])
    def test_validate_rejects(self, key, value):
        config = Config()
        setattr(config, key, value)
        with pytest.raises(ValueError):
            config.validate()

    def test_load_config_falls_back(self, monkeypatch):
        monkeypatch.setenv("ORACLE_TOL", "-1")
        assert load_config().ORACLE_TOL == 1e-9

    def test_to_dict_and_str(self):
        config = Config()
        assert config.to_dict()["LOG_LEVEL"] == "INFO"
        assert "DEFAULT_SEED=20220607" in str(config)


class TestRunConfig:
    """実行設定ファイル"""

    def test_round_trip(self):
        rc = RunConfig.from_dict({"objective": "quadratic_random", "n": 4, "budget": 2.0})
        assert RunConfig.from_dict(rc.to_dict()) == rc

    def test_unknown_keys(self):
        with pytest.raises(ConfigError) as excinfo:
            RunConfig.from_dict({"objective": "quadratic_random", "eta": 0.1, "alpha": 1})
        assert excinfo.value.details["keys"] == ["alpha", "eta"]

    @pytest.mark.parametrize("data", [
        {"objective": "cubic"},
        {"set": "ball"},
        {"algorithm": "adam"},
        {"n": 0},
        {"mu": "fast"},
        {"L": -1.0},
        {"K": 0},
        {"x1": "ones"},
        {"mode": "exact"},
        {"step_rule": "adagrad"},
        {"format": "xml"},
        {"graph_format": "graphml"},
        {"seed": -1},
        {"delta": 0.6},
        {"objective": "stability"},
    ])
    def test_invalid_values(self, data):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(data)

    def test_not_an_object(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict([1, 2])

    def test_from_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"algorithm": "pga", "x1": [0.1, 0.2, 0.3]}))
        rc = RunConfig.from_file(path)
        assert rc.algorithm == "pga"
        assert rc.x1 == [0.1, 0.2, 0.3]

    def test_from_file_invalid_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            RunConfig.from_file(path)

    def test_from_file_missing(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig.from_file(tmp_path / "missing.json")

    def test_bundled_configs_are_valid(self, configs_dir):
        import glob
        import os
        paths = sorted(glob.glob(os.path.join(configs_dir, "*.json")))
        assert len(paths) == 6
        for path in paths:
            RunConfig.from_file(path)


class TestUtils:
    """ユーティリティ関数"""

    def test_make_rng_is_deterministic(self):
        np.testing.assert_array_equal(make_rng(5).uniform(size=4), make_rng(5).uniform(size=4))
        assert not np.array_equal(make_rng(5).uniform(size=4), make_rng(6).uniform(size=4))

    def test_spawn_rngs_are_independent(self):
        first, second = spawn_rngs(1, 2)
        assert not np.array_equal(first.uniform(size=3), second.uniform(size=3))

    def test_format_float(self):
        assert format_float(1.0) == "1"
        assert format_float(0.1) == "0.10000000000000001"
        assert format_float(None) == ""
        assert format_float(float("nan")) == "nan"
        assert format_float(2.0 / 3.0, 4) == "0.6667"

    def test_sanitize_error_message(self):
        error = ValueError("cannot open /home/alice/graphs/g.col")
        assert sanitize_error_message(error) == "ValueError: cannot open /home/***/graphs/g.col"
        assert sanitize_error_message(error, include_type=False).startswith("cannot open")

    def test_sanitize_truncates(self):
        message = sanitize_error_message(ValueError("x" * 5000), include_type=False)
        assert len(message) == 2003

    def test_error_payload(self):
        payload = format_error_payload(GraphParseError("bad edge", line_number=3))
        assert payload == {"error": "GraphParseError", "message": "line 3: bad edge",
                           "details": {"line_number": 3}}
        assert format_error_payload(KeyError("k"))["details"] == {}

    def test_measure_execution_time(self, caplog):
        @measure_execution_time
        def double(x):
            return 2 * x

        @measure_execution_time
        def broken():
            raise RuntimeError("boom")

        with caplog.at_level(logging.INFO):
            assert double(3) == 6
            with pytest.raises(RuntimeError):
                broken()
        assert "double executed in" in caplog.text
        assert "broken failed after" in caplog.text
