"""
Box-counting dimension of planar point clouds and Grassberger-Procaccia
correlation sums of delay-embedded series.
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from chaos.regression import RegressionResult, fit_line
from utils.exceptions import DegenerateGeometryError, EmptyWindowError, ParameterError
from utils.logging_config import log_function_call

logger = logging.getLogger(__name__)

MIN_BOX_POINTS = 1000
MIN_CORRELATION_LENGTH = 2000


@dataclass
class BoxCount:
    """Occupied cells per grid; `cells` is the number of cells per axis."""

    cells: np.ndarray
    counts: np.ndarray
    used: np.ndarray
    fit: RegressionResult

    @property
    def dimension(self) -> float:
        return self.fit.slope

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "scales_used": int(self.used.sum()), **self.fit.to_dict()}

    def to_csv(self, path: Path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["cells_per_axis", "box_size", "count", "used"])
            for n, count, used in zip(self.cells, self.counts, self.used):
                writer.writerow([int(n), repr(1.0 / n), int(count), int(used)])


def _unit_square(points: np.ndarray) -> np.ndarray:
    """Centre the cloud in a square of side its largest extent, scaled to [0, 1]."""
    low, high = points.min(axis=0), points.max(axis=0)
    extent = float(np.max(high - low))
    if extent == 0:
        raise DegenerateGeometryError("All points coincide; box counting is undefined")
    return (points - (low + high) / 2) / extent + 0.5


def box_counting(
    points: np.ndarray,
    n_scales: int = 20,
    ratio: float = math.sqrt(2.0),
    saturation_fraction: float = 0.1,
) -> BoxCount:
    """
    Slope of log(occupied cells) against log(1/box size).

    Grids have ceil(2 ratio^k) cells per axis, k = 0..n_scales-1, so every
    grid tiles the unit square exactly. Grids with at least
    `saturation_fraction` * N occupied cells are left out of the fit.

    Raises:
        ParameterError: fewer than 1000 points, n_scales < 10 or ratio <= 1
        DegenerateGeometryError: all points identical
        EmptyWindowError: fewer than three unsaturated scales
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ParameterError("points", points.shape, "an (N, 2) array")
    if points.shape[0] < MIN_BOX_POINTS:
        raise ParameterError("points", points.shape[0], f">= {MIN_BOX_POINTS} points")
    if n_scales < 10:
        raise ParameterError("n_scales", n_scales, "n_scales >= 10")
    if not ratio > 1:
        raise ParameterError("ratio", ratio, "ratio > 1")

    unit = _unit_square(points)
    cells = np.unique(np.ceil(2 * ratio ** np.arange(n_scales) - 1e-9).astype(np.int64))
    counts = np.empty(cells.size, dtype=np.int64)
    for k, n in enumerate(cells):
        index = np.minimum((unit * n).astype(np.int64), n - 1)
        counts[k] = np.unique(index[:, 0] * n + index[:, 1]).size

    used = counts < saturation_fraction * points.shape[0]
    if used.sum() < 3:
        raise EmptyWindowError("box counting scales", int(used.sum()))
    fit = fit_line(np.log(cells[used]), np.log(counts[used]), "box counting")
    logger.debug(f"Box counting: dimension {fit.slope:.5f} over {int(used.sum())} scales")
    return BoxCount(cells=cells, counts=counts, used=used, fit=fit)


def delay_embedding(series: Sequence[float], m: int, tau: int = 1, length: Optional[int] = None) -> np.ndarray:
    """Rows (x_n, x_{n+tau}, ..., x_{n+(m-1)tau}); `length` fixes the row count."""
    series = np.asarray(series, dtype=float)
    count = series.size - (m - 1) * tau
    if length is not None:
        count = min(count, length)
    if count < 2:
        raise ParameterError("m", m, f"embedding of a series of length {series.size}")
    return np.column_stack([series[j * tau: j * tau + count] for j in range(m)])


@dataclass
class CorrelationEstimate:
    """
    Correlation sums C_m(r) and the D2, K2 fits.

    `sums[i, j]` is C for m_values[i] and radii[j]; `slopes` maps m to the
    D2 fit of that embedding dimension.
    """

    m_values: List[int]
    radii: np.ndarray
    sums: np.ndarray
    D2: float
    K2: float
    tau: int
    slopes: Dict[int, RegressionResult] = field(default_factory=dict)
    windows: Dict[int, Tuple[float, float]] = field(default_factory=dict)
    entropy_radius: Optional[float] = None
    vectors: int = 0

    @property
    def entropy_sign_flag(self) -> bool:
        """True when the entropy fit came out negative."""
        return self.K2 < 0

    def to_dict(self) -> dict:
        return {
            "D2": self.D2,
            "K2": self.K2,
            "K2_negative": self.entropy_sign_flag,
            "tau": self.tau,
            "vectors": self.vectors,
            "entropy_radius": self.entropy_radius,
            "slopes": {str(m): fit.slope for m, fit in self.slopes.items()},
            "windows": {str(m): list(w) for m, w in self.windows.items()},
        }

    def to_csv(self, path: Path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["m", "r", "C"])
            for i, m in enumerate(self.m_values):
                for j, r in enumerate(self.radii):
                    writer.writerow([m, repr(float(r)), repr(float(self.sums[i, j]))])


def _correlation_sums(vectors: np.ndarray, radii: np.ndarray) -> np.ndarray:
    distances = np.sort(pdist(vectors, metric="chebyshev"))
    return np.searchsorted(distances, radii, side="right") / distances.size


@log_function_call
def correlation_dimension(
    series: Sequence[float],
    m_values: Sequence[int] = range(1, 16),
    tau: int = 1,
    radii: Optional[Sequence[float]] = None,
    n_radii: int = 20,
    max_vectors: int = 3000,
    entropy_m_values: Optional[Sequence[int]] = range(1, 12),
    upper_bound: float = 0.5,
    min_pairs: int = 10,
    max_workers: int = 4,
) -> CorrelationEstimate:
    """
    Grassberger-Procaccia estimate of the correlation dimension and entropy.

    Every embedding dimension uses the same vectors count, thinned to at most
    `max_vectors` by a fixed stride; distances use the maximum norm. For each
    m the scaling window is the set of radii with at least `min_pairs` pairs
    and C <= `upper_bound`; D2 is the mean slope over the upper third of
    `m_values`. K2 = -(slope of ln C_m(r*) in m)/tau at the geometric centre
    r* of the largest m's window.

    Raises:
        ParameterError: series shorter than 2000 or non-positive tau
        EmptyWindowError: no embedding dimension has a three-point window
    """
    series = np.asarray(series, dtype=float)
    if series.size < MIN_CORRELATION_LENGTH:
        raise ParameterError("series", series.size, f"length >= {MIN_CORRELATION_LENGTH}")
    if tau < 1:
        raise ParameterError("tau", tau, "tau >= 1")
    m_values = sorted(int(m) for m in m_values)
    m_max = m_values[-1]
    count = series.size - (m_max - 1) * tau
    stride = max(1, math.ceil(count / max_vectors))

    spread = float(series.max() - series.min())
    if radii is None:
        scale = spread if spread > 0 else 1.0
        radii = np.geomspace(1e-3 * scale, 0.5 * scale, n_radii)
    radii = np.asarray(radii, dtype=float)

    def run(m: int) -> np.ndarray:
        vectors = delay_embedding(series, m, tau, count)[::stride]
        return _correlation_sums(vectors, radii)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        sums = np.array(list(executor.map(run, m_values)))
    vectors = len(range(0, count, stride))
    pairs = vectors * (vectors - 1) / 2

    if spread == 0:
        logger.info("Constant series: C_m(r) = 1 for every r > 0")
        return CorrelationEstimate(m_values, radii, sums, D2=0.0, K2=0.0, tau=tau, vectors=vectors)

    estimate = CorrelationEstimate(m_values, radii, sums, D2=math.nan, K2=math.nan, tau=tau, vectors=vectors)
    for i, m in enumerate(m_values):
        window = (sums[i] * pairs >= min_pairs) & (sums[i] <= upper_bound)
        if window.sum() < 3:
            continue
        estimate.slopes[m] = fit_line(np.log(radii[window]), np.log(sums[i, window]), f"D2 fit m={m}")
        estimate.windows[m] = (float(radii[window][0]), float(radii[window][-1]))
    if not estimate.slopes:
        raise EmptyWindowError("correlation scaling window", 0)

    fitted = sorted(estimate.slopes)
    upper = [m for m in fitted if m >= m_values[0] + 2 * (m_max - m_values[0]) / 3] or fitted[-1:]
    estimate.D2 = float(np.mean([estimate.slopes[m].slope for m in upper]))

    low, high = estimate.windows[fitted[-1]]
    r_star = math.sqrt(low * high)
    estimate.entropy_radius = r_star
    j = int(np.argmin(np.abs(np.log(radii) - math.log(r_star))))
    entropy_ms = [m for m in (entropy_m_values or m_values) if m in m_values]
    rows = [m_values.index(m) for m in entropy_ms if sums[m_values.index(m), j] > 0]
    if len(rows) >= 3:
        fit = fit_line([m_values[r] for r in rows], np.log(sums[rows, j]), "K2 fit")
        estimate.K2 = -fit.slope / tau
        if estimate.K2 < 0:
            logger.warning(f"Correlation entropy estimate is negative: K2 = {estimate.K2:.4g}")
    logger.info(f"Correlation dimension D2 = {estimate.D2:.4g}, entropy K2 = {estimate.K2:.4g}")
    return estimate
