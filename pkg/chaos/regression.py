"""
Least-squares lines with Student-t confidence intervals.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.stats import linregress, t

from utils.exceptions import EmptyWindowError


@dataclass
class RegressionResult:
    slope: float
    intercept: float
    slope_ci: Tuple[float, float]
    intercept_ci: Tuple[float, float]
    p_value: float
    r_value: float
    samples: int

    @property
    def significant(self) -> bool:
        """Slope CI excludes zero."""
        low, high = self.slope_ci
        return low > 0 or high < 0

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_ci": list(self.slope_ci),
            "intercept_ci": list(self.intercept_ci),
            "p_value": self.p_value,
            "r_value": self.r_value,
            "samples": self.samples,
        }


def fit_line(x: Sequence[float], y: Sequence[float], what: str = "regression", confidence: float = 0.95) -> RegressionResult:
    """
    linregress plus two-sided intervals on n - 2 degrees of freedom.

    Raises:
        EmptyWindowError: fewer than three points
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise EmptyWindowError(what, int(x.size))

    fit = linregress(x, y)
    quantile = t.ppf(0.5 + confidence / 2, x.size - 2)
    slope_half = quantile * fit.stderr
    intercept_half = quantile * fit.intercept_stderr
    p_value = float(fit.pvalue) if np.isfinite(fit.pvalue) else 0.0
    return RegressionResult(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        slope_ci=(float(fit.slope - slope_half), float(fit.slope + slope_half)),
        intercept_ci=(float(fit.intercept - intercept_half), float(fit.intercept + intercept_half)),
        p_value=p_value,
        r_value=float(fit.rvalue),
        samples=int(x.size),
    )
