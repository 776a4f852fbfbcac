"""
src/dsim/simulate/rates.py
Convergence rates from errors observed over a range of sample sizes.
"""

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple

import numpy as np
from scipy import stats

from dsim.exceptions import DsimArgumentError, DsimInsufficientDataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RateEstimate:
    """
    Slope of log(err) against -log(n) with its standard error.

    :ivar slope: Estimated exponent beta in err ~ c * n^(-beta).
    :ivar stderr: Standard error of the slope.
    :ivar points: Number of (n, error) pairs in the regression.
    :ivar dropped: Number of zero errors left out.
    :ivar n_values: Distinct sample sizes used.
    """

    slope: float
    stderr: float
    points: int
    dropped: int
    n_values: Tuple[int, ...]


def rate_regression(errs: Mapping[int, Sequence[float]]) -> RateEstimate:
    """
    Ordinary least squares of log(err) on -log(n), pooled over replicates.

    Raises:
        DsimArgumentError: On a non-positive n or a negative or non-finite error.
        DsimInsufficientDataError: If fewer than two distinct n keep a positive error.
    """
    log_n, log_err = [], []
    dropped = 0
    used = set()
    for n, values in sorted(errs.items()):
        if int(n) < 1:
            raise DsimArgumentError(f"sample size expects a positive integer, but got {n}")
        for value in values:
            value = float(value)
            if not math.isfinite(value) or value < 0:
                raise DsimArgumentError(f"errors expect finite non-negative values, but got {value} at n={n}")
            if value == 0:
                dropped += 1
                continue
            log_n.append(-math.log(n))
            log_err.append(math.log(value))
            used.add(int(n))
    if dropped:
        logger.warning(f"Dropped {dropped} zero error(s) from the rate regression")
    if len(used) < 2:
        raise DsimInsufficientDataError(
            f"rate regression expects at least 2 distinct sample sizes with positive errors, but got {len(used)}"
        )

    result = stats.linregress(np.array(log_n), np.array(log_err))
    stderr = float(result.stderr) if math.isfinite(result.stderr) else 0.0
    return RateEstimate(float(result.slope), stderr, len(log_err), dropped, tuple(sorted(used)))
