"""
src/dsim/simulate/runner.py
The convergence rate experiment: scenarios x weighting choices x sample sizes x replicates.

Replicates are independent tasks that run in worker processes; results come back in
submission order and are reduced into one rate table in the calling process.
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import pandas as pd

from dsim.core.events import CELL_REGRESSED, REPLICATE_FAILED, REPLICATE_FINISHED, Event, EventDispatcher
from dsim.estimation.index_opt import SearchConfig, fit_dsim
from dsim.exceptions import DsimConfigurationError, DsimInsufficientDataError
from dsim.simulate.measures import DEFAULT_MC_DRAWS, MEASURES, ErrorTriple, errors
from dsim.simulate.rates import rate_regression
from dsim.simulate.scenarios import NOISE_KINDS, STUDY_THETAS, Q_CHOICES, SimScenario, generate

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["q", "noise", "theta0", "measure", "slope", "stderr", "reps", "n_min", "n_max"]
RAW_COLUMNS = ["q", "noise", "theta0", "n", "rep", "index", "cdf", "bundled", "error"]

# Constants c in err = c * n^(-rate) for the injected errors.
INJECTED_CONSTANTS = {"index": 1.0, "cdf": 0.5, "bundled": 0.25}


@dataclass(frozen=True)
class ExperimentConfig:
    """
    The experiment grid.

    :ivar thetas: True index angles; each entry fixes the dimension as len + 1.
    :ivar noises: Noise distributions.
    :ivar q_choices: Weighting measures.
    :ivar sample_sizes: Sample sizes n, at least one.
    :ivar reps: Replicates per sample size.
    :ivar seed: Root seed of all random streams.
    :ivar mc_draws: Monte Carlo draws per error integral.
    :ivar search: Settings of the index search.
    :ivar workers: Worker processes for the replicates.
    :ivar injected_rate: If set, skip fitting and use err = c * n^(-injected_rate).
    """

    thetas: Tuple[Tuple[float, ...], ...] = ((math.pi / 4,),)
    noises: Tuple[str, ...] = ("exponential",)
    q_choices: Tuple[str, ...] = ("empirical",)
    sample_sizes: Tuple[int, ...] = (256, 512, 1024, 2048)
    reps: int = 20
    seed: int = 2024
    mc_draws: int = DEFAULT_MC_DRAWS
    search: SearchConfig = field(default_factory=SearchConfig)
    workers: int = 1
    injected_rate: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "thetas", tuple(tuple(float(a) for a in theta) for theta in self.thetas))
        object.__setattr__(self, "noises", tuple(self.noises))
        object.__setattr__(self, "q_choices", tuple(self.q_choices))
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        if not self.thetas or not self.noises or not self.q_choices or not self.sample_sizes:
            raise DsimConfigurationError("experiment grid expects at least one theta, noise, q_choice and n")
        for noise in self.noises:
            if noise not in NOISE_KINDS:
                raise DsimConfigurationError(f"noises expects values in {NOISE_KINDS}, but got {noise!r}")
        for choice in self.q_choices:
            if choice not in Q_CHOICES:
                raise DsimConfigurationError(f"q_choices expects values in {Q_CHOICES}, but got {choice!r}")
        if any(n < 2 for n in self.sample_sizes):
            raise DsimConfigurationError(f"sample_sizes expects values of at least 2, but got {self.sample_sizes}")
        if self.reps < 1:
            raise DsimConfigurationError(f"reps expects a positive integer, but got {self.reps}")
        if self.mc_draws < 1:
            raise DsimConfigurationError(f"mc_draws expects a positive integer, but got {self.mc_draws}")
        if self.workers < 1:
            raise DsimConfigurationError(f"workers expects a positive integer, but got {self.workers}")
        if self.injected_rate is not None and not math.isfinite(self.injected_rate):
            raise DsimConfigurationError(f"injected_rate expects a finite number, but got {self.injected_rate}")

    @classmethod
    def full_scale(cls, **overrides: Any) -> "ExperimentConfig":
        """All six index settings, both noises and all weightings, n = 2^8..2^13, 100 reps."""
        settings: Dict[str, Any] = dict(
            thetas=STUDY_THETAS[2] + STUDY_THETAS[3],
            noises=NOISE_KINDS,
            q_choices=Q_CHOICES,
            sample_sizes=tuple(2 ** m for m in range(8, 14)),
            reps=100,
        )
        settings.update(overrides)
        return cls(**settings)

    @classmethod
    def from_dict(cls, config: Mapping[str, Any]) -> "ExperimentConfig":
        """Builds a config from its JSON form; ``search`` is a mapping of SearchConfig fields."""
        if not isinstance(config, Mapping):
            raise DsimConfigurationError(f"experiment config expects a JSON object, but got {type(config).__name__}")
        settings = dict(config)
        unknown = set(settings) - set(cls.__dataclass_fields__)
        if unknown:
            raise DsimConfigurationError(f"experiment config has unknown keys {sorted(unknown)}")
        try:
            if "search" in settings:
                search = dict(settings["search"])
                if search.get("grid_sizes") is not None:
                    search["grid_sizes"] = tuple(search["grid_sizes"])
                settings["search"] = SearchConfig(**search)
            return cls(**settings)
        except (TypeError, ValueError) as e:
            raise DsimConfigurationError(f"invalid experiment config: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def scenarios(self) -> List[SimScenario]:
        return [
            SimScenario.from_angles(theta, noise=noise, q_choice=choice, seed=self.seed)
            for choice in self.q_choices
            for noise in self.noises
            for theta in self.thetas
        ]

    @property
    def cell_count(self) -> int:
        return len(self.q_choices) * len(self.noises) * len(self.thetas)


@dataclass(frozen=True)
class ReplicateResult:
    scenario: SimScenario
    n: int
    rep: int
    errors: Optional[ErrorTriple] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.errors is not None


@dataclass(frozen=True)
class RateRow:
    q: str
    noise: str
    theta0: str
    measure: str
    slope: float
    stderr: float
    reps: int
    n_min: int
    n_max: int
    insufficient: bool = False


@dataclass(frozen=True)
class RateReport:
    """
    Result of run_table.

    :ivar rows: One row per (weighting, noise, theta0, error measure).
    :ivar replicates: Every replicate in grid order, failed ones included.
    :ivar config: The configuration that produced the report.
    """

    rows: Tuple[RateRow, ...]
    replicates: Tuple[ReplicateResult, ...]
    config: ExperimentConfig

    @property
    def insufficient_cells(self) -> List[RateRow]:
        return [row for row in self.rows if row.insufficient]

    @property
    def failures(self) -> List[ReplicateResult]:
        return [result for result in self.replicates if not result.ok]

    def table(self) -> pd.DataFrame:
        frame = pd.DataFrame([asdict(row) for row in self.rows], columns=TABLE_COLUMNS + ["insufficient"])
        return frame[TABLE_COLUMNS]

    def raw_errors(self) -> pd.DataFrame:
        records = []
        for result in self.replicates:
            values = result.errors.as_dict() if result.ok else dict.fromkeys(MEASURES, math.nan)
            records.append(
                {
                    "q": result.scenario.q_choice,
                    "noise": result.scenario.noise,
                    "theta0": result.scenario.theta_label,
                    "n": result.n,
                    "rep": result.rep,
                    **values,
                    "error": result.error or "",
                }
            )
        return pd.DataFrame(records, columns=RAW_COLUMNS)

    def averages(self) -> pd.DataFrame:
        """Unweighted mean slope per (weighting, error measure) over all regressed cells."""
        table = self.table().dropna(subset=["slope"])
        return table.groupby(["q", "measure"], sort=False)["slope"].mean().reset_index(name="mean_slope")

    def write(self, path: Union[str, Path]) -> List[Path]:
        """
        Writes the rate table to path and side-cars next to it: ``<stem>_errors.csv``,
        ``<stem>_averages.csv`` and ``<stem>_config.json``.
        """
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        written = [
            target,
            target.with_name(f"{target.stem}_errors.csv"),
            target.with_name(f"{target.stem}_averages.csv"),
            target.with_name(f"{target.stem}_config.json"),
        ]
        self.table().to_csv(written[0], index=False)
        self.raw_errors().to_csv(written[1], index=False)
        self.averages().to_csv(written[2], index=False)
        written[3].write_text(json.dumps(self.config.to_dict(), indent=2))
        logger.info(f"Wrote rate table with {len(self.rows)} rows to {target}")
        return written


def _run_replicate(task: Tuple[SimScenario, int, int, ExperimentConfig]) -> ReplicateResult:
    scn, n, rep, cfg = task
    if cfg.injected_rate is not None:
        values = {measure: c * n ** (-cfg.injected_rate) for measure, c in INJECTED_CONSTANTS.items()}
        return ReplicateResult(scn, n, rep, ErrorTriple(values["index"], values["cdf"], values["bundled"]))
    try:
        sample = generate(scn, n, rep)
        model = fit_dsim(sample, scn.weighting(), cfg.search)
        triple = errors(model, scn, cfg.mc_draws, scn.rng("errors", n, rep))
        return ReplicateResult(scn, n, rep, triple)
    except Exception as e:
        logger.error(f"Replicate n={n} rep={rep} of {scn.theta_label}/{scn.noise}/{scn.q_choice} failed: {e}", exc_info=True)
        return ReplicateResult(scn, n, rep, error=f"{type(e).__name__}: {e}")


def _tasks(cfg: ExperimentConfig) -> Iterable[Tuple[SimScenario, int, int, ExperimentConfig]]:
    for scn in cfg.scenarios():
        for n in cfg.sample_sizes:
            for rep in range(cfg.reps):
                yield scn, n, rep, cfg


def _regress(scn: SimScenario, results: List[ReplicateResult], cfg: ExperimentConfig) -> List[RateRow]:
    rows = []
    for measure in MEASURES:
        errs: Dict[int, List[float]] = {}
        for result in results:
            if result.ok:
                errs.setdefault(result.n, []).append(result.errors.as_dict()[measure])
        base = dict(
            q=scn.q_choice,
            noise=scn.noise,
            theta0=scn.theta_label,
            measure=measure,
            reps=cfg.reps,
            n_min=min(cfg.sample_sizes),
            n_max=max(cfg.sample_sizes),
        )
        try:
            estimate = rate_regression(errs)
            rows.append(RateRow(slope=estimate.slope, stderr=estimate.stderr, **base))
        except DsimInsufficientDataError as e:
            logger.warning(f"No rate for {scn.theta_label}/{scn.noise}/{scn.q_choice}/{measure}: {e}")
            rows.append(RateRow(slope=math.nan, stderr=math.nan, insufficient=True, **base))
    return rows


def run_table(cfg: ExperimentConfig, dispatcher: Optional[EventDispatcher] = None) -> RateReport:
    """
    Runs every replicate of the grid, scores it and regresses the errors per cell.

    A failed replicate is recorded in the report and left out of the regression.
    """
    dispatcher = dispatcher or EventDispatcher()
    tasks = list(_tasks(cfg))
    logger.info(f"Running {len(tasks)} replicates in {cfg.cell_count} cells with {cfg.workers} worker(s)")

    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            results = list(executor.map(_run_replicate, tasks))
    else:
        results = [_run_replicate(task) for task in tasks]

    by_cell: Dict[SimScenario, List[ReplicateResult]] = {}
    for result in results:
        by_cell.setdefault(result.scenario, []).append(result)
        if result.ok:
            dispatcher.dispatch(Event(REPLICATE_FINISHED, result))
        else:
            dispatcher.dispatch(Event(REPLICATE_FAILED, result))

    rows: List[RateRow] = []
    for scn, cell in by_cell.items():
        cell_rows = _regress(scn, cell, cfg)
        rows.extend(cell_rows)
        for row in cell_rows:
            dispatcher.dispatch(Event(CELL_REGRESSED, row))
        logger.info(f"Cell {scn.theta_label}/{scn.noise}/{scn.q_choice} done, {sum(not r.ok for r in cell)} failed")
    return RateReport(tuple(rows), tuple(results), cfg)
