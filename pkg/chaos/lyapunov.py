"""
Exponential separation of nearby trajectories.

Each coordinate is perturbed by h in turn; ln |s_i(t) - s~_i(t)| is regressed on
t and the slope estimates the largest Lyapunov exponent seen by that
coordinate.
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy as np

from chaos.regression import RegressionResult, fit_line
from dynamics.integrator import IntegratorConfig, Trajectory, integrate
from utils.exceptions import EmptyWindowError, ParameterError
from utils.logging_config import log_function_call

logger = logging.getLogger(__name__)

PLATEAU_FRACTION = 0.1


def separation_window(times: np.ndarray, log_distance: np.ndarray, fraction: Optional[float]) -> np.ndarray:
    """
    Mask of the samples fitted for one coordinate.

    The plateau is the median of the last 10% of the series (saturation for a
    growing separation, the noise floor for a shrinking one). The window runs
    from the start until the log-distance first covers `fraction` of the way
    to the plateau; `fraction=None` keeps every finite sample.
    """
    finite = np.isfinite(log_distance)
    if fraction is None:
        return finite
    if not 0 < fraction <= 1:
        raise ParameterError("window_fraction", fraction, "0 < fraction <= 1")
    values = log_distance[finite]
    if values.size < 3:
        return finite
    tail = values[-max(1, int(PLATEAU_FRACTION * values.size)):]
    start, plateau = values[0], float(np.median(tail))
    target = start + fraction * (plateau - start)
    crossed = (log_distance >= target) if plateau >= start else (log_distance <= target)
    crossed &= finite
    stop = int(np.argmax(crossed)) if crossed.any() else log_distance.size - 1
    mask = finite.copy()
    mask[stop + 1:] = False
    return mask


@dataclass
class LyapunovEstimate:
    h: float
    times: np.ndarray = field(repr=False)
    log_distance: Dict[str, np.ndarray] = field(repr=False)
    fits: Dict[str, RegressionResult] = field(default_factory=dict)
    windows: Dict[str, tuple] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "coordinates": {
                name: {**fit.to_dict(), "window": list(self.windows[name])}
                for name, fit in self.fits.items()
            },
        }

    def to_csv(self, path: Path):
        names = list(self.log_distance)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["t", *(f"log_d_{name}" for name in names)])
            for k, t in enumerate(self.times):
                writer.writerow([repr(float(t)), *(repr(float(self.log_distance[n][k])) for n in names)])


@log_function_call
def lyapunov_regression(
    model,
    s0: Sequence[float],
    h: float = 1e-4,
    T: float = 2000.0,
    dt: float = 0.1,
    window_fraction: Optional[float] = 0.6,
    coordinates: Optional[Sequence[str]] = None,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    max_workers: int = 4,
) -> LyapunovEstimate:
    """
    Per-coordinate slopes of ln |difference| between s0 and s0 + h e_i.

    Coordinates whose difference stays exactly zero (invariant faces) are
    reported without a fit.

    Raises:
        ParameterError: h <= 0
        EmptyWindowError: the separation saturates before three samples
    """
    if not h > 0:
        raise ParameterError("h", h, "h > 0")
    base = model.check_state(s0)
    names = list(coordinates or model.coordinate_names)
    cfg = IntegratorConfig(t_span=(0.0, T), rel_tol=rel_tol, abs_tol=abs_tol, sample_dt=dt)

    def run(index: int) -> Trajectory:
        start = base.copy()
        if index >= 0:
            start[index] += h
        return integrate(model, start, cfg)

    indices = [-1] + [model.coordinate_names.index(name) for name in names]
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        reference, *perturbed = list(executor.map(run, indices))

    estimate = LyapunovEstimate(h=h, times=reference.times, log_distance={})
    for name, index, traj in zip(names, indices[1:], perturbed):
        distance = np.abs(traj.states[:, index] - reference.states[:, index])
        with np.errstate(divide="ignore"):
            log_distance = np.where(distance > 0, np.log(distance), -np.inf)
        estimate.log_distance[name] = log_distance
        mask = separation_window(reference.times, log_distance, window_fraction)
        if not np.any(np.isfinite(log_distance)):
            logger.info(f"Coordinate {name}: trajectories coincide, no fit")
            continue
        if mask.sum() < 3:
            raise EmptyWindowError(f"Lyapunov window for {name}", int(mask.sum()))
        times = reference.times[mask]
        estimate.fits[name] = fit_line(times, log_distance[mask], f"Lyapunov fit for {name}")
        estimate.windows[name] = (float(times[0]), float(times[-1]))
        logger.debug(f"{name}: slope {estimate.fits[name].slope:.6g} on [{times[0]:.4g}, {times[-1]:.4g}]")
    return estimate
