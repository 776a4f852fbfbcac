"""
src/dsim/cli/commands.py
Subcommands of the dsim command line and the context that runs them.

Each subcommand is a Command; the Context maps subcommand names to commands, owns the
event dispatcher for progress reporting and turns errors into exit codes.
"""

import argparse
import dataclasses
import logging
import time
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from dsim.cli import config as cli_config
from dsim.cli.data import (
    HOUSE_PRICE_COVARIATES,
    HOUSE_PRICE_RESPONSE,
    DatasetSpec,
    load_dataset,
    load_rows,
    parse_vector,
    require_fittable,
)
from dsim.core.events import CELL_REGRESSED, REPLICATE_FAILED, REPLICATE_FINISHED, Event, EventDispatcher
from dsim.core.utils import validate_instance_type, validate_non_empty_string
from dsim.estimation.index_opt import DsimFit, SearchConfig, fit_dsim
from dsim.estimation.weighting import density_measure
from dsim.exceptions import (
    DsimArgumentError,
    DsimConfigurationError,
    DsimDataError,
    DsimDegenerateDataError,
    DsimDimensionError,
    DsimError,
    DsimInsufficientDataError,
)
from dsim.model.predictor import Predictor, index_agreement
from dsim.model.serialization import load_fit, save_fit
from dsim.simulate.runner import ExperimentConfig, run_table
from dsim.simulate.scenarios import SimScenario, generate

logger = logging.getLogger(__name__)

HOUSE_PRICE_UNIFORM = (0.0, 120.0)


def exit_code(error: BaseException) -> int:
    """Exit status for an error raised by a command."""
    if isinstance(error, DsimDegenerateDataError):
        return 3
    if isinstance(error, DsimDimensionError):
        return 4
    if isinstance(error, DsimInsufficientDataError):
        return 5
    if isinstance(error, (DsimDataError, DsimConfigurationError)):
        return 2
    return 1


def _split(text: Optional[str]) -> List[str]:
    return [part.strip() for part in (text or "").split(",") if part.strip()]


def _summary(fit: DsimFit) -> str:
    return (
        f"alpha     = {np.array2string(fit.alpha, precision=6)}\n"
        f"theta     = {tuple(round(angle, 6) for angle in fit.theta.theta)}\n"
        f"criterion = {fit.criterion.value:.6g}\n"
        f"n = {fit.criterion.n}, m = {fit.idr.m}, k = {fit.idr.k}"
    )


def _resolved_config(effective: Dict[str, Any], fit: DsimFit, search: SearchConfig) -> Dict[str, Any]:
    """The effective configuration with the weighting and every search setting, grid sizes resolved."""
    resolved = {**dataclasses.asdict(search), "grid_sizes": list(search.sizes_for(fit.dim))}
    return {**effective, "q": fit.q.descriptor(), "search": resolved}


class Command(ABC):
    """
    Represents an abstract base class for subcommands.

    Commands receive the parsed options, with the merged effective configuration in
    ``options.effective``, and return an exit status.
    """

    def __init__(self, context: "Context"):
        validate_instance_type("context", context, Context)
        self.context = context

    @abstractmethod
    def execute(self, options: argparse.Namespace) -> int:
        """
        Execute the command with the given options.

        Args:
            options: Parsed command line options.
        """


class FitCommand(Command):
    """Fits a model to a CSV dataset and writes the model JSON."""

    def execute(self, options: argparse.Namespace) -> int:
        effective: Dict[str, Any] = options.effective
        spec = DatasetSpec(
            options.data, options.response, tuple(_split(options.covariates)), options.delimiter, not options.no_header
        )
        sample = require_fittable(load_dataset(spec))
        q = cli_config.parse_q(effective["q"])
        search = cli_config.search_config(effective)
        fit = fit_dsim(sample, q, search)
        metadata = {
            "config": _resolved_config(effective, fit, search),
            "dataset": {"path": str(spec.path), "response": spec.response_col, "covariates": list(spec.covariate_cols)},
        }
        save_fit(fit, options.out or "model.json", metadata)
        print(_summary(fit))
        return 0


class PredictCommand(Command):
    """Predicts index values, quantiles and CDF values for covariate rows."""

    def execute(self, options: argparse.Namespace) -> int:
        predictor = Predictor(load_fit(options.model))
        if options.x:
            vectors = [parse_vector(text, "x") for text in options.x]
            if len({vector.size for vector in vectors}) != 1:
                raise DsimDataError("x expects rows of equal length")
            rows = np.vstack(vectors)
        elif options.data:
            rows = load_rows(options.data, _split(options.covariates), options.delimiter, not options.no_header)
        else:
            raise DsimConfigurationError("predict expects --x or --data")
        taus = parse_vector(options.taus, "taus") if options.taus else np.array([])
        ys = parse_vector(options.ys, "ys") if options.ys else np.array([])
        try:
            table = predictor.predict(rows, taus, ys)
        except DsimDimensionError:
            raise
        except DsimArgumentError as e:
            raise DsimConfigurationError(str(e)) from e
        if options.out:
            Path(options.out).parent.mkdir(parents=True, exist_ok=True)
            table.to_csv(options.out, index=False)
            logger.info(f"Wrote {len(table)} predictions to {options.out}")
        else:
            print(table.to_csv(index=False), end="")
        return 0


class RatesCommand(Command):
    """Runs the convergence rate experiment and writes the rate table."""

    def experiment_config(self, options: argparse.Namespace) -> ExperimentConfig:
        effective: Dict[str, Any] = options.effective
        if options.full_scale:
            cfg = ExperimentConfig.full_scale()
        else:
            cfg = ExperimentConfig.from_dict(effective.get("experiment", {}))
        # Only settings given by a flag or a top-level config key replace the experiment's own.
        explicit = getattr(options, "explicit", frozenset())
        overrides: Dict[str, Any] = {}
        if "seed" in explicit:
            overrides["seed"] = int(effective["seed"])
        if "threads" in explicit:
            overrides["workers"] = int(effective["threads"])
        search = cli_config.search_fields(effective, [key for key in cli_config.SEARCH_KEYS if key in explicit])
        if search:
            overrides["search"] = dataclasses.replace(cfg.search, **search)
        if options.reps is not None:
            overrides["reps"] = options.reps
        if options.sizes:
            overrides["sample_sizes"] = tuple(int(n) for n in _split(options.sizes))
        if options.noises:
            overrides["noises"] = tuple(_split(options.noises))
        if options.q_choices:
            overrides["q_choices"] = tuple(_split(options.q_choices))
        if options.thetas:
            overrides["thetas"] = tuple(tuple(parse_vector(t.replace(";", ","), "theta")) for t in _split_thetas(options.thetas))
        if options.mc_draws is not None:
            overrides["mc_draws"] = options.mc_draws
        if options.inject_rate is not None:
            overrides["injected_rate"] = options.inject_rate
        try:
            return dataclasses.replace(cfg, **overrides)
        except (TypeError, ValueError) as e:
            raise DsimConfigurationError(f"invalid experiment config: {e}") from e

    def execute(self, options: argparse.Namespace) -> int:
        cfg = self.experiment_config(options)
        started = time.perf_counter()
        report = run_table(cfg, self.context.event_dispatcher)
        report.write(options.out or "rates.csv")
        elapsed = time.perf_counter() - started
        print(f"{cfg.cell_count} cell(s), {len(report.rows)} row(s), {len(report.failures)} failed replicate(s) in {elapsed:.1f} s")
        insufficient = report.insufficient_cells
        if insufficient:
            raise DsimInsufficientDataError(f"{len(insufficient)} row(s) had fewer than 2 usable sample sizes")
        return 0


def _split_thetas(text: str) -> List[str]:
    """Angle tuples separated by '/', angles within a tuple by ';' or ','."""
    return [part.strip() for part in text.split("/") if part.strip()]


class SimulateCommand(Command):
    """Writes one simulated sample to CSV."""

    def execute(self, options: argparse.Namespace) -> int:
        theta = parse_vector(options.theta.replace(";", ","), "theta")
        scn = SimScenario.from_angles(theta, noise=options.noise, seed=int(options.effective["seed"]))
        sample = generate(scn, options.n, options.rep)
        table = pd.DataFrame(sample.covariates, columns=[f"x{j + 1}" for j in range(scn.dim)])
        table["y"] = sample.responses
        target = Path(options.out or "sample.csv")
        target.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(target, index=False)
        print(f"Wrote {sample.n} rows to {target}")
        return 0


class HousePriceCommand(Command):
    """Fits the house price data under the empirical and a uniform weighting and compares the indices."""

    def execute(self, options: argparse.Namespace) -> int:
        effective: Dict[str, Any] = options.effective
        covariates = tuple(_split(options.covariates)) or HOUSE_PRICE_COVARIATES
        response = options.response or HOUSE_PRICE_RESPONSE
        spec = DatasetSpec(options.data, response, covariates, options.delimiter, not options.no_header)
        sample = require_fittable(load_dataset(spec))
        search = cli_config.search_config(effective)
        a, b = options.uniform_a, options.uniform_b
        measures = {"empirical": cli_config.parse_q("empirical"), "uniform": density_measure("uniform", a, b)}

        fits = {name: fit_dsim(sample, q, search) for name, q in measures.items()}
        table = pd.DataFrame({name: fit.alpha for name, fit in fits.items()}, index=list(covariates)).T
        agreement = index_agreement(Predictor(fits["empirical"]), Predictor(fits["uniform"]), sample.covariates)
        print(table.round(3).to_string())
        print(f"Spearman correlation of the index orderings: {agreement:.4f}")

        if options.out:
            out = Path(options.out)
            out.mkdir(parents=True, exist_ok=True)
            for name, fit in fits.items():
                metadata = {"config": _resolved_config(effective, fit, search), "dataset": str(spec.path)}
                save_fit(fit, out / f"model_{name}.json", metadata)
            table.to_csv(out / "index_estimates.csv")
        return 0


class Context:
    """
    Maps subcommand names to commands and runs them.

    :ivar event_dispatcher: Dispatcher for progress events of long-running commands.
    """

    def __init__(self, event_dispatcher: Optional[EventDispatcher] = None):
        event_dispatcher = event_dispatcher or EventDispatcher()
        validate_instance_type("event_dispatcher", event_dispatcher, EventDispatcher)
        self.event_dispatcher = event_dispatcher
        self._commands: Dict[str, Command] = {}
        self.event_dispatcher.add_listener(REPLICATE_FINISHED, _log_replicate)
        self.event_dispatcher.add_listener(REPLICATE_FAILED, _log_failure)
        self.event_dispatcher.add_listener(CELL_REGRESSED, _log_cell)

    def map_command(self, name: str, command: Command) -> None:
        validate_non_empty_string("name", name)
        validate_instance_type("command", command, Command)
        self._commands[name] = command

    def run(self, name: str, options: argparse.Namespace) -> int:
        """Runs a mapped command; DsimError subclasses become exit codes with a message on the log."""
        if name not in self._commands:
            logger.error(f"Unknown command {name!r}")
            return 1
        try:
            return self._commands[name].execute(options)
        except DsimError as e:
            logger.error(f"{name}: {e}")
            return exit_code(e)


def _log_replicate(event: Event) -> None:
    result = event.data
    logger.debug(f"Replicate n={result.n} rep={result.rep} of {result.scenario.theta_label} finished")


def _log_failure(event: Event) -> None:
    result = event.data
    logger.warning(f"Replicate n={result.n} rep={result.rep} of {result.scenario.theta_label} failed: {result.error}")


def _log_cell(event: Event) -> None:
    row = event.data
    logger.info(f"{row.q}/{row.noise}/{row.theta0}/{row.measure}: slope={row.slope:.3f} ({row.stderr:.3f})")


def build_context() -> Context:
    context = Context()
    context.map_command("fit", FitCommand(context))
    context.map_command("predict", PredictCommand(context))
    context.map_command("rates", RatesCommand(context))
    context.map_command("simulate", SimulateCommand(context))
    context.map_command("houseprice", HousePriceCommand(context))
    return context
