import json

import pytest

from main import EXIT_CONFIGURATION, EXIT_OK, EXIT_PRECONDITION, main
from pipeline.orchestrator import ScenarioRunner, load_scenario
from utils.config_loader import apply_overrides, load_config, read_scenario_file
from utils.exceptions import ConfigurationError, ScenarioError


class TestMain:
    def test_equilibria_writes_summary(self, tmp_path, capsys):
        assert main(["equilibria", "ej311", "--out", str(tmp_path)]) == EXIT_OK
        summary = json.loads((tmp_path / "equilibria_summary.json").read_text())
        assert summary["command"] == "equilibria"
        assert summary["scenario"] == "ej311"
        assert (tmp_path / "equilibria.csv").exists()
        assert json.loads(capsys.readouterr().out) == summary

    def test_scenario_option(self, tmp_path):
        assert main(["zero-hopf", "--scenario", "sec46", "--out", str(tmp_path)]) == EXIT_OK
        summary = json.loads((tmp_path / "zero_hopf_summary.json").read_text())
        assert summary["on_threshold"] is True
        assert summary["point"]["kind"] == "zero-saddle"
        assert summary["point"]["degenerate"] is True

    def test_unknown_override_key(self, tmp_path):
        code = main(["equilibria", "ej311", "--override", "model.bogus=1", "--out", str(tmp_path)])
        assert code == EXIT_CONFIGURATION

    def test_missing_preset(self, tmp_path):
        assert main(["equilibria", "no_such_preset", "--out", str(tmp_path)]) == EXIT_CONFIGURATION

    def test_missing_scenario(self, tmp_path):
        assert main(["equilibria", "--out", str(tmp_path)]) == EXIT_CONFIGURATION

    def test_bad_jobs(self, tmp_path):
        assert main(["equilibria", "ej311", "--jobs", "0", "--out", str(tmp_path)]) == EXIT_CONFIGURATION

    def test_unsupported_command_for_family(self, tmp_path):
        assert main(["hopf", "ch2_table", "--out", str(tmp_path)]) == EXIT_CONFIGURATION

    def test_hypothesis_failure(self, tmp_path):
        code = main(["hopf", "fig48", "--override", "model.K2=1.0", "--out", str(tmp_path)])
        assert code == EXIT_PRECONDITION
        assert not (tmp_path / "hopf_summary.json").exists()


class TestRunner:
    def test_unknown_command(self, tmp_path, scenario):
        runner = ScenarioRunner(load_config(None), tmp_path)
        with pytest.raises(ConfigurationError):
            runner.run("dance", scenario("ej311"))

    def test_simulate_table(self, tmp_path):
        data = apply_overrides(read_scenario_file("ej311"), ["integrator.t_end=5", "integrator.sample_dt=1"])
        runner = ScenarioRunner(load_config(None), tmp_path, max_workers=1)
        summary = runner.run("simulate", load_scenario(data))
        assert summary["samples"] == 6
        lines = (tmp_path / "simulate.csv").read_text().splitlines()
        assert len(lines) == 7
        assert runner.stats["commands_run"] == 1

    def test_stateless_scenario_rejected(self, tmp_path, scenario):
        runner = ScenarioRunner(load_config(None), tmp_path)
        with pytest.raises(ConfigurationError):
            runner.run("simulate", scenario("sec46"))


class TestConfig:
    def test_defaults(self):
        config = load_config(None)
        assert config["integrator"]["rel_tol"] == 1e-9
        assert config["concurrency"]["max_workers"] == 4

    def test_file_values_merge_with_defaults(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("integrator:\n  rel_tol: 1.0e-7\n")
        config = load_config(path)
        assert config["integrator"]["rel_tol"] == 1e-7
        assert config["integrator"]["abs_tol"] == 1e-12

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("POPDYN_INTEGRATOR__REL_TOL", "1e-8")
        assert load_config(None)["integrator"]["rel_tol"] == 1e-8

    def test_invalid_level(self, monkeypatch):
        monkeypatch.setenv("POPDYN_LOGGING__LEVEL", "LOUD")
        with pytest.raises(ConfigurationError):
            load_config(None)

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("integrator: [unclosed\n")
        with pytest.raises(ConfigurationError):
            load_config(path)


class TestScenarioFiles:
    def test_preset_name(self):
        data = read_scenario_file("ej311")
        assert data["name"] == "ej311"
        assert data["model"]["family"] == "two_predator"

    def test_json_file_name_defaults_to_stem(self, tmp_path):
        path = tmp_path / "pair.json"
        path.write_text(json.dumps({"model": {"family": "bazykin", "r": 1, "K": 3, "q": 1, "a": 1, "c": 2, "mu": 0.5, "m": 0}}))
        data = read_scenario_file(path)
        assert data["name"] == "pair"
        assert load_scenario(data).model.K == 3.0

    def test_unsupported_format(self, tmp_path):
        path = tmp_path / "pair.ini"
        path.write_text("[model]\n")
        with pytest.raises(ScenarioError):
            read_scenario_file(path)

    def test_overrides_are_typed_and_nested(self):
        data = {"model": {"family": "bazykin", "m": 0.0}}
        result = apply_overrides(data, ["model.m=0.5", "initial.state=[1, 2]", "hopf.with_l1=true"])
        assert result["model"]["m"] == 0.5
        assert result["initial"]["state"] == [1, 2]
        assert result["hopf"]["with_l1"] is True
        assert data["model"]["m"] == 0.0

    @pytest.mark.parametrize("item", ["model.m", "=3"])
    def test_malformed_override(self, item):
        with pytest.raises(ScenarioError):
            apply_overrides({}, [item])

    def test_dimension_mismatch_rejected(self):
        data = apply_overrides(read_scenario_file("ej311"), ["initial.state=[1.0, 2.0]"])
        with pytest.raises(ValueError):
            load_scenario(data)
