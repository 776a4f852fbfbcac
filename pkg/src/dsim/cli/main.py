"""
src/dsim/cli/main.py
Entry point of the ``dsim`` command.
"""

import argparse
import logging
import sys
from typing import List, Optional

from dsim.cli import config as cli_config
from dsim.cli.commands import HOUSE_PRICE_UNIFORM, build_context, exit_code
from dsim.exceptions import DsimError

logger = logging.getLogger(__name__)


def _global_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=None, help="root seed of all random streams")
    parent.add_argument("--threads", type=int, default=None, help="worker threads or processes")
    parent.add_argument("--q", default=None, help="weighting measure: 'empirical', JSON text or a JSON file")
    parent.add_argument("--grid", default=None, help="grid sizes per angle, e.g. 40 or 20,40")
    parent.add_argument("--refine", dest="refine", action="store_true", default=None, help="refine the best grid nodes")
    parent.add_argument("--no-refine", dest="refine", action="store_false", help="skip the local refinement")
    parent.add_argument("--tie-tol", type=float, default=None, help="tolerance for merging index values")
    parent.add_argument("--out", default=None, help="output path")
    parent.add_argument("--config", default=None, help="JSON file with defaults for the flags above")
    parent.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    return parent


def _dataset_flags(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--data", required=required, help="CSV file")
    parser.add_argument("--delimiter", default=",", help="CSV field delimiter")
    parser.add_argument("--no-header", action="store_true", help="the CSV has no header row")


def build_parser() -> argparse.ArgumentParser:
    parent = _global_flags()
    parser = argparse.ArgumentParser(prog="dsim", description="Distributional single index model estimator")
    subparsers = parser.add_subparsers(dest="command", required=True)

    fit = subparsers.add_parser("fit", parents=[parent], help="fit a model to a CSV dataset")
    _dataset_flags(fit)
    fit.add_argument("--response", required=True, help="response column")
    fit.add_argument("--covariates", required=True, help="comma separated covariate columns")

    predict = subparsers.add_parser("predict", parents=[parent], help="predict from a fitted model")
    predict.add_argument("--model", required=True, help="model JSON written by fit")
    predict.add_argument("--x", action="append", help="comma separated covariate vector; may be repeated")
    _dataset_flags(predict, required=False)
    predict.add_argument("--covariates", default=None, help="covariate columns of --data, all by default")
    predict.add_argument("--taus", default=None, help="comma separated quantile levels in (0, 1)")
    predict.add_argument("--ys", default=None, help="comma separated responses at which to evaluate the CDF")

    rates = subparsers.add_parser("rates", parents=[parent], help="run the convergence rate experiment")
    rates.add_argument("--reps", type=int, default=None, help="replicates per sample size")
    rates.add_argument("--sizes", default=None, help="comma separated sample sizes")
    rates.add_argument("--noises", default=None, help="gaussian and/or exponential")
    rates.add_argument("--q-choices", default=None, help="empirical, uniform and/or truncated")
    rates.add_argument("--thetas", default=None, help="angle tuples separated by '/', e.g. 0.785/1.047;1.047")
    rates.add_argument("--mc-draws", type=int, default=None, help="Monte Carlo draws per error integral")
    rates.add_argument("--inject-rate", type=float, default=None, help="skip fitting, use err = c * n^-rate")
    rates.add_argument("--full-scale", action="store_true", help="all settings, n = 2^8..2^13, 100 replicates")

    simulate = subparsers.add_parser("simulate", parents=[parent], help="write a simulated sample to CSV")
    simulate.add_argument("--theta", required=True, help="angles of the true index, separated by ';' or ','")
    simulate.add_argument("--noise", choices=("gaussian", "exponential"), default="gaussian")
    simulate.add_argument("--n", type=int, required=True, help="sample size")
    simulate.add_argument("--rep", type=int, default=0, help="replicate number")

    houseprice = subparsers.add_parser("houseprice", parents=[parent], help="fit the house price dataset")
    _dataset_flags(houseprice)
    houseprice.add_argument("--response", default=None, help="response column")
    houseprice.add_argument("--covariates", default=None, help="comma separated covariate columns")
    houseprice.add_argument("--uniform-a", type=float, default=HOUSE_PRICE_UNIFORM[0], help="left end of the uniform Q")
    houseprice.add_argument("--uniform-b", type=float, default=HOUSE_PRICE_UNIFORM[1], help="right end of the uniform Q")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    options = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if options.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        file_config = cli_config.load_config_file(options.config)
        flags = {
            "seed": options.seed,
            "threads": options.threads,
            "q": options.q,
            "grid": options.grid,
            "refine": options.refine,
            "tie_tol": options.tie_tol,
        }
        options.effective = cli_config.merge(cli_config.DEFAULTS, file_config, flags)
        options.explicit = cli_config.explicit_keys(file_config, flags)
    except DsimError as e:
        logger.error(str(e))
        return exit_code(e)
    return build_context().run(options.command, options)


if __name__ == "__main__":
    sys.exit(main())
