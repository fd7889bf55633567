import json

import pytest

from mofilter.config import DEFAULT_OUTPUT_DIR, Config, RunConfig
from mofilter.errors import ConfigError


class TestConfig:
    def test_defaults_valid(self):
        cfg = Config().validate()
        assert cfg.delta0 == 0.5 and cfg.delta_max == 16.0
        assert cfg.B_crit == 1000.0 and cfg.M_crit == 3000.0

    @pytest.mark.parametrize("overrides, relation", [
        ({"gamma0": 0.6}, "gamma0"),
        ({"nu1": 0.95}, "nu1"),
        ({"delta0": 32.0}, "delta0"),
        ({"eps_chi": 1.0}, "eps_chi"),
        ({"psi": 0.5}, "psi"),
        ({"linesearch_xtol": 0.0}, "linesearch_xtol"),
    ])
    def test_violations_name_relation(self, overrides, relation):
        with pytest.raises(ConfigError, match=relation):
            Config(**overrides).validate()

    def test_config_error_is_value_error(self):
        with pytest.raises(ValueError):
            Config(gamma2=0.5).validate()

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="typo"):
            Config.from_dict({"typo": 1})

    def test_replace_validates(self):
        assert Config().replace(c_delta=0.99).c_delta == 0.99
        with pytest.raises(ConfigError):
            Config().replace(gamma1=1.5)


class TestRunConfig:
    def test_minimal(self, monkeypatch):
        monkeypatch.delenv("MOFILTER_OUTPUT_DIR", raising=False)
        rc = RunConfig.from_dict({"problem": "two_parabolas", "x0": [-2, 0.5]})
        assert rc.problem_name == "two_parabolas" and rc.weights is None
        assert rc.x0 == [-2.0, 0.5]
        assert rc.output_dir == DEFAULT_OUTPUT_DIR

    def test_inline_problem(self):
        rc = RunConfig.from_dict({"problem": {"name": "mw3", "weights": [0.5, 0.5]}, "x0": [0.3, 0.5, 0.4]})
        assert rc.problem_name == "mw3" and rc.weights == [0.5, 0.5]

    def test_overrides_reach_solver(self):
        rc = RunConfig.from_dict({"problem": "mw3", "x0": [0, 0, 0], "model_kind": "taylor1",
                                  "overrides": {"max_iter": 7}})
        cfg = rc.solver_config()
        assert cfg.max_iter == 7 and cfg.model_kind == "taylor1"

    def test_env_output_dir(self, monkeypatch, tmp_path):
        monkeypatch.setenv("MOFILTER_OUTPUT_DIR", str(tmp_path))
        rc = RunConfig.from_dict({"problem": "mw3", "x0": [0, 0, 0], "output_dir": "elsewhere"})
        assert rc.output_dir == str(tmp_path)

    @pytest.mark.parametrize("data", [
        {"x0": [0.0]},
        {"problem": "mw3"},
        {"problem": "mw3", "x0": [0, 0, 0], "extra": 1},
        {"problem": "mw3", "x0": ["a"]},
        {"problem": "mw3", "x0": [0, 0, 0], "model_kind": "quadratic"},
        {"problem": {"weights": [1.0]}, "x0": [0.0]},
    ])
    def test_rejected(self, data):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(data)

    def test_bad_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            RunConfig.from_json(path)

    def test_from_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"problem": "two_parabolas", "x0": [-2.0, 0.0]}), encoding="utf-8")
        assert RunConfig.from_json(path).x0 == [-2.0, 0.0]
