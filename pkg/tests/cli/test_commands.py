import argparse
import json
import logging
import os
import unittest
from types import SimpleNamespace

import numpy as np
import pandas as pd
import pytest
from dsim.cli.commands import Command, Context, build_context, exit_code
from dsim.cli.main import main
from dsim.core.events import CELL_REGRESSED, Event, EventDispatcher
from dsim.exceptions import (
    DsimArgumentError,
    DsimConfigurationError,
    DsimDataError,
    DsimDegenerateDataError,
    DsimDimensionError,
    DsimError,
    DsimInsufficientDataError,
)
from dsim.model.serialization import load_fit
from dsim.simulate.runner import TABLE_COLUMNS


class MockCommand(Command):
    def __init__(self, context, result=0, error=None):
        super().__init__(context)
        self.result = result
        self.error = error
        self.last_options = None

    def execute(self, options):
        self.last_options = options
        if self.error is not None:
            raise self.error
        return self.result


class ContextTests(unittest.TestCase):

    def setUp(self):
        self.event_dispatcher = EventDispatcher()
        self.context = Context(self.event_dispatcher)
        self.options = argparse.Namespace(effective={})

    def test_init_with_invalid_dispatcher_type(self):
        with self.assertRaises(DsimArgumentError):
            Context("not_a_dispatcher")

    def test_command_with_invalid_context_type(self):
        with self.assertRaises(DsimArgumentError):
            MockCommand("not_a_context")

    def test_map_command_with_invalid_command_type(self):
        with self.assertRaises(DsimArgumentError):
            self.context.map_command("fit", "not_a_command")

    def test_map_command_with_empty_name(self):
        with self.assertRaises(DsimArgumentError):
            self.context.map_command(" ", MockCommand(self.context))

    def test_logs_regressed_cells(self):
        row = SimpleNamespace(q="empirical", noise="gaussian", theta0="0.785398", measure="index", slope=0.4, stderr=0.05)
        with self.assertLogs("dsim.cli.commands", level="INFO") as logs:
            self.event_dispatcher.dispatch(Event(CELL_REGRESSED, row))
        self.assertIn("empirical/gaussian/0.785398/index: slope=0.400", logs.output[0])

    def test_run_executes_the_mapped_command(self):
        command = MockCommand(self.context, result=0)
        self.context.map_command("fit", command)
        self.assertEqual(self.context.run("fit", self.options), 0)
        self.assertIs(command.last_options, self.options)

    def test_run_unknown_command(self):
        with self.assertLogs("dsim.cli.commands", level="ERROR"):
            self.assertEqual(self.context.run("missing", self.options), 1)

    def test_run_turns_errors_into_exit_codes(self):
        self.context.map_command("fit", MockCommand(self.context, error=DsimDegenerateDataError("constant")))
        with self.assertLogs("dsim.cli.commands", level="ERROR") as logs:
            self.assertEqual(self.context.run("fit", self.options), 3)
        self.assertIn("fit: constant", logs.output[0])

    def test_run_does_not_swallow_other_errors(self):
        self.context.map_command("fit", MockCommand(self.context, error=KeyError("bug")))
        with self.assertRaises(KeyError):
            self.context.run("fit", self.options)

    def test_build_context_maps_all_commands(self):
        context = build_context()
        self.assertEqual(set(context._commands), {"fit", "predict", "rates", "simulate", "houseprice"})


@pytest.mark.parametrize(
    "error, code",
    [
        (DsimDataError("x"), 2),
        (DsimConfigurationError("x"), 2),
        (DsimDegenerateDataError("x"), 3),
        (DsimDimensionError("x"), 4),
        (DsimInsufficientDataError("x"), 5),
        (DsimArgumentError("x"), 1),
        (DsimError("x"), 1),
    ],
)
def test_exit_code(error, code):
    assert exit_code(error) == code


@pytest.fixture
def dataset(tmp_path):
    rng = np.random.default_rng(12)
    covariates = rng.uniform(size=(80, 2))
    alpha = np.array([np.cos(np.pi / 3), np.sin(np.pi / 3)])
    frame = pd.DataFrame(covariates, columns=["x1", "x2"])
    frame["y"] = (covariates @ alpha) ** 3 * rng.exponential(size=80)
    path = tmp_path / "data.csv"
    frame.to_csv(path, index=False)
    return path


def fit_args(dataset, out, *extra):
    return ["fit", "--data", str(dataset), "--response", "y", "--covariates", "x1,x2", "--grid", "16", "--out", str(out), *extra]


class TestFitAndPredict:
    def test_round_trip(self, dataset, tmp_path, capsys):
        model = tmp_path / "model.json"
        assert main(fit_args(dataset, model)) == 0
        assert "alpha" in capsys.readouterr().out

        predictions = tmp_path / "predictions.csv"
        args = ["predict", "--model", str(model), "--data", str(dataset), "--covariates", "x1,x2",
                "--taus", "0.1,0.5,0.9", "--ys", "0.5", "--out", str(predictions)]
        assert main(args) == 0
        table = pd.read_csv(predictions)
        assert list(table.columns) == ["index", "extrapolated", "q_0.1", "q_0.5", "q_0.9", "cdf_0.5"]

        fit = load_fit(model)
        covariates = pd.read_csv(dataset)[["x1", "x2"]].to_numpy()
        np.testing.assert_allclose(table["index"], covariates @ fit.alpha, rtol=0, atol=1e-12)
        assert not table["extrapolated"].any()
        assert (table["q_0.1"] <= table["q_0.5"]).all()

    def test_metadata_records_the_effective_config(self, dataset, tmp_path):
        model = tmp_path / "model.json"
        assert main(fit_args(dataset, model, "--seed", "9", "--no-refine")) == 0
        metadata = json.loads(model.read_text())["metadata"]
        assert metadata["config"]["seed"] == 9
        assert metadata["config"]["refine"] is False
        assert metadata["config"]["q"] == {"type": "empirical"}
        assert metadata["dataset"]["covariates"] == ["x1", "x2"]

    def test_metadata_records_every_search_setting(self, dataset, tmp_path):
        model = tmp_path / "model.json"
        assert main(fit_args(dataset, model)) == 0
        search = json.loads(model.read_text())["metadata"]["config"]["search"]
        assert search["grid_sizes"] == [16]
        assert search["n_starts"] == 3
        assert search["refine_max_iter"] == 200
        assert search["refine_tol"] == 1e-6
        assert search["refine"] is True
        assert search["tie_tol"] == 0.0

    def test_metadata_resolves_the_default_grid(self, tmp_path):
        path = tmp_path / "toy.csv"
        path.write_text("x1,x2,y\n0,1,0\n1,0,1\n0.5,0.5,2\n")
        model = tmp_path / "model.json"
        assert main(["fit", "--data", str(path), "--response", "y", "--covariates", "x1,x2", "--out", str(model)]) == 0
        config = json.loads(model.read_text())["metadata"]["config"]
        assert config["grid"] is None
        assert config["search"]["grid_sizes"] == [40]

    def test_uniform_weighting(self, dataset, tmp_path):
        model = tmp_path / "model.json"
        q = '{"type": "density", "name": "uniform", "a": 0, "b": 2, "quad_points": 64}'
        assert main(fit_args(dataset, model, "--q", q)) == 0
        assert load_fit(model).q.descriptor()["name"] == "uniform"

    def test_config_file(self, dataset, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"tie_tol": 0.001, "seed": 4}))
        model = tmp_path / "model.json"
        assert main(fit_args(dataset, model, "--config", str(config))) == 0
        assert load_fit(model).tie_tol == 0.001

    def test_two_rows(self, tmp_path):
        path = tmp_path / "toy.csv"
        path.write_text("x1,x2,y\n0,1,0\n1,0,1\n")
        model = tmp_path / "model.json"
        assert main(["fit", "--data", str(path), "--response", "y", "--covariates", "x1,x2", "--out", str(model)]) == 0
        assert load_fit(model).idr.thresholds.tolist() == [0.0, 1.0]

    def test_predict_single_vectors(self, dataset, tmp_path, capsys):
        model = tmp_path / "model.json"
        assert main(fit_args(dataset, model)) == 0
        capsys.readouterr()
        assert main(["predict", "--model", str(model), "--x", "0.5,0.5", "--x", "0.1,0.9", "--taus", "0.5"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "index,extrapolated,q_0.5"
        assert len(lines) == 3


class TestExitCodes:
    def test_missing_column(self, dataset, tmp_path, caplog):
        caplog.set_level(logging.ERROR)
        args = ["fit", "--data", str(dataset), "--response", "y", "--covariates", "x1,x9", "--out", str(tmp_path / "m.json")]
        assert main(args) == 2
        assert "'x9'" in caplog.text

    def test_constant_response(self, tmp_path):
        path = tmp_path / "flat.csv"
        path.write_text("x1,x2,y\n0.1,0.2,1\n0.3,0.1,1\n0.5,0.9,1\n")
        args = ["fit", "--data", str(path), "--response", "y", "--covariates", "x1,x2", "--out", str(tmp_path / "m.json")]
        assert main(args) == 3

    def test_dimension_mismatch(self, dataset, tmp_path):
        model = tmp_path / "model.json"
        assert main(fit_args(dataset, model)) == 0
        assert main(["predict", "--model", str(model), "--x", "0.1,0.2,0.3"]) == 4

    def test_invalid_tau(self, dataset, tmp_path):
        model = tmp_path / "model.json"
        assert main(fit_args(dataset, model)) == 0
        assert main(["predict", "--model", str(model), "--x", "0.1,0.2", "--taus", "1.5"]) == 2

    def test_predict_without_rows(self, dataset, tmp_path):
        model = tmp_path / "model.json"
        assert main(fit_args(dataset, model)) == 0
        assert main(["predict", "--model", str(model)]) == 2

    def test_invalid_model_file(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"version": 99}))
        assert main(["predict", "--model", str(path), "--x", "0.1,0.2"]) == 2

    def test_invalid_config_file(self, dataset, tmp_path):
        config = tmp_path / "config.json"
        config.write_text("[]")
        assert main(fit_args(dataset, tmp_path / "m.json", "--config", str(config))) == 2

    def test_invalid_weighting(self, dataset, tmp_path):
        assert main(fit_args(dataset, tmp_path / "m.json", "--q", '{"type": "lebesgue"}')) == 2

    def test_insufficient_sample_sizes(self, tmp_path):
        out = tmp_path / "rates.csv"
        assert main(["rates", "--inject-rate", "0.5", "--sizes", "256", "--reps", "1", "--out", str(out)]) == 5
        assert out.exists()


class TestRatesAndSimulate:
    def test_injected_rates(self, tmp_path, capsys):
        out = tmp_path / "rates.csv"
        args = ["rates", "--inject-rate", "0.5", "--sizes", "256,512,1024", "--reps", "2",
                "--noises", "gaussian,exponential", "--q-choices", "empirical", "--out", str(out)]
        assert main(args) == 0
        table = pd.read_csv(out)
        assert list(table.columns) == TABLE_COLUMNS
        assert len(table) == 6
        np.testing.assert_allclose(table["slope"], 0.5, atol=1e-10)
        assert "2 cell(s), 6 row(s), 0 failed replicate(s)" in capsys.readouterr().out

    def test_thetas_flag(self, tmp_path):
        out = tmp_path / "rates.csv"
        args = ["rates", "--inject-rate", "0.5", "--sizes", "256,512", "--reps", "1",
                "--thetas", "0.785398/1.047198;1.047198", "--out", str(out)]
        assert main(args) == 0
        assert list(pd.read_csv(out)["theta0"].unique()) == ["0.785398", "1.047198;1.047198"]

    def test_experiment_from_config_file(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"experiment": {"sample_sizes": [256, 512], "reps": 1, "injected_rate": 0.25}}))
        out = tmp_path / "rates.csv"
        assert main(["rates", "--config", str(config), "--out", str(out)]) == 0
        np.testing.assert_allclose(pd.read_csv(out)["slope"], 0.25, atol=1e-10)
        assert json.loads((tmp_path / "rates_config.json").read_text())["reps"] == 1

    def test_experiment_settings_survive_the_defaults(self, tmp_path):
        experiment = {"seed": 7, "search": {"grid_sizes": [8]}, "sample_sizes": [256, 512], "reps": 1, "injected_rate": 0.5}
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"experiment": experiment}))
        out = tmp_path / "rates.csv"
        assert main(["rates", "--config", str(config), "--out", str(out)]) == 0
        written = json.loads((tmp_path / "rates_config.json").read_text())
        assert written["seed"] == 7
        assert written["search"]["grid_sizes"] == [8]
        assert written["workers"] == 1

    def test_flags_override_the_experiment_settings(self, tmp_path):
        experiment = {"seed": 7, "search": {"grid_sizes": [8], "n_starts": 2}, "sample_sizes": [256, 512], "reps": 1, "injected_rate": 0.5}
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"experiment": experiment, "refine": False}))
        out = tmp_path / "rates.csv"
        assert main(["rates", "--config", str(config), "--seed", "11", "--grid", "12", "--out", str(out)]) == 0
        written = json.loads((tmp_path / "rates_config.json").read_text())
        assert written["seed"] == 11
        assert written["search"]["grid_sizes"] == [12]
        assert written["search"]["refine"] is False
        assert written["search"]["n_starts"] == 2

    def test_invalid_experiment(self, tmp_path):
        assert main(["rates", "--noises", "cauchy", "--out", str(tmp_path / "rates.csv")]) == 2

    def test_simulate(self, tmp_path):
        out = tmp_path / "sample.csv"
        assert main(["simulate", "--theta", "1.047198;1.047198", "--noise", "exponential", "--n", "25", "--out", str(out)]) == 0
        table = pd.read_csv(out)
        assert list(table.columns) == ["x1", "x2", "x3", "y"]
        assert len(table) == 25
        assert (table["y"] >= 0).all()

    def test_simulate_is_seeded(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--theta", "0.5", "--n", "10", "--seed", "3", "--out", str(first)]) == 0
        assert main(["simulate", "--theta", "0.5", "--n", "10", "--seed", "3", "--out", str(second)]) == 0
        assert first.read_text() == second.read_text()


@pytest.mark.skipif(not os.environ.get("DSIM_HOUSE_PRICE_CSV"), reason="DSIM_HOUSE_PRICE_CSV is not set")
def test_house_price_indices(tmp_path, capsys):
    out = tmp_path / "houseprice"
    assert main(["houseprice", "--data", os.environ["DSIM_HOUSE_PRICE_CSV"], "--out", str(out)]) == 0
    estimates = pd.read_csv(out / "index_estimates.csv", index_col=0)
    for name in ("empirical", "uniform"):
        assert list(np.sign(estimates.loc[name])) == [1.0, -1.0, 1.0, -1.0]
    agreement = float(capsys.readouterr().out.rsplit(":", 1)[1])
    assert agreement >= 0.95


def test_house_price_without_header(dataset, tmp_path, capsys):
    headerless = tmp_path / "headerless.csv"
    pd.read_csv(dataset).to_csv(headerless, index=False, header=False)
    out = tmp_path / "houseprice"
    args = ["houseprice", "--data", str(headerless), "--no-header", "--response", "2", "--covariates", "0,1",
            "--grid", "16", "--uniform-b", "2", "--out", str(out)]
    assert main(args) == 0
    estimates = pd.read_csv(out / "index_estimates.csv", index_col=0)
    assert list(estimates.columns) == ["0", "1"]
    for name in ("empirical", "uniform"):
        fit = load_fit(out / f"model_{name}.json")
        assert fit.criterion.n == 80
        metadata = json.loads((out / f"model_{name}.json").read_text())["metadata"]
        assert metadata["config"]["search"]["grid_sizes"] == [16]
    assert "Spearman" in capsys.readouterr().out
