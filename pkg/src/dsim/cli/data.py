"""
src/dsim/cli/data.py
Reading samples and covariate rows from CSV files.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from dsim.core.sample import Sample
from dsim.exceptions import DsimConfigurationError, DsimDataError, DsimDegenerateDataError

logger = logging.getLogger(__name__)

# Column names of the public real estate valuation dataset.
HOUSE_PRICE_RESPONSE = "Y house price of unit area"
HOUSE_PRICE_COVARIATES = (
    "X4 number of convenience stores",
    "X2 house age",
    "X1 transaction date",
    "X3 distance to the nearest MRT station",
)


@dataclass(frozen=True)
class DatasetSpec:
    """
    Location and layout of a CSV dataset.

    Without a header, columns are referred to by their 0-based position written as text.
    """

    path: Union[str, Path]
    response_col: str
    covariate_cols: Tuple[str, ...]
    delimiter: str = ","
    header: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "covariate_cols", tuple(str(col) for col in self.covariate_cols))
        if not self.covariate_cols:
            raise DsimConfigurationError("covariate_cols expects at least one column name")
        if self.response_col in self.covariate_cols:
            raise DsimConfigurationError(f"response column {self.response_col!r} is also listed as a covariate")
        if len(set(self.covariate_cols)) != len(self.covariate_cols):
            raise DsimConfigurationError(f"covariate_cols expects distinct names, but got {self.covariate_cols}")
        if len(self.delimiter) != 1:
            raise DsimConfigurationError(f"delimiter expects a single character, but got {self.delimiter!r}")


def read_table(path: Union[str, Path], delimiter: str = ",", header: bool = True) -> pd.DataFrame:
    source = Path(path)
    try:
        frame = pd.read_csv(source, sep=delimiter, header=0 if header else None, dtype=str, skipinitialspace=True)
    except FileNotFoundError as e:
        raise DsimDataError(f"dataset {source} does not exist") from e
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DsimDataError(f"cannot parse dataset {source}: {e}") from e
    frame.columns = [str(col).strip() for col in frame.columns]
    return frame


def numeric_columns(frame: pd.DataFrame, columns: Sequence[str], source: str = "dataset") -> np.ndarray:
    """
    Parses the given columns as floats, shape (rows, len(columns)).

    Raises:
        DsimDataError: Naming the first missing column or the first non-numeric cell by
            its 1-based data row and its column.
    """
    for col in columns:
        if col not in frame.columns:
            raise DsimDataError(f"{source} has no column {col!r}; available columns are {list(frame.columns)}")
    values = np.empty((len(frame), len(columns)))
    for j, col in enumerate(columns):
        parsed = pd.to_numeric(frame[col], errors="coerce").to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(parsed))
        if bad.size:
            row = int(bad[0])
            raise DsimDataError(
                f"{source} row {row + 1}, column {col!r}: cannot parse {frame[col].iloc[row]!r} as a finite number"
            )
        values[:, j] = parsed
    return values


def load_dataset(spec: DatasetSpec) -> Sample:
    """Reads the response and the covariates of a dataset into a Sample."""
    frame = read_table(spec.path, spec.delimiter, spec.header)
    source = str(spec.path)
    covariates = numeric_columns(frame, spec.covariate_cols, source)
    responses = numeric_columns(frame, [spec.response_col], source)[:, 0]
    if responses.size == 0:
        raise DsimDegenerateDataError(f"{source} contains no data rows")
    logger.info(f"Loaded {responses.size} rows with {covariates.shape[1]} covariate(s) from {source}")
    return Sample(covariates, responses)


def require_fittable(sample: Sample) -> Sample:
    """
    Raises:
        DsimDegenerateDataError: If the sample has fewer than two rows or a constant response.
    """
    if sample.n < 2:
        raise DsimDegenerateDataError(f"fitting expects at least 2 observations, but got {sample.n}")
    if np.all(sample.responses == sample.responses[0]):
        raise DsimDegenerateDataError("fitting expects a non-constant response")
    return sample


def load_rows(
    path: Union[str, Path], columns: Optional[Sequence[str]] = None, delimiter: str = ",", header: bool = True
) -> np.ndarray:
    """Covariate rows for prediction; all columns are used when none are named."""
    frame = read_table(path, delimiter, header)
    names: List[str] = list(columns) if columns else list(frame.columns)
    return numeric_columns(frame, names, str(path))


def parse_vector(text: str, name: str = "value") -> np.ndarray:
    """Parses a comma separated list of numbers."""
    try:
        values = np.array([float(part) for part in text.split(",") if part.strip()])
    except ValueError as e:
        raise DsimDataError(f"{name} expects comma separated numbers, but got {text!r}") from e
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise DsimDataError(f"{name} expects finite comma separated numbers, but got {text!r}")
    return values
