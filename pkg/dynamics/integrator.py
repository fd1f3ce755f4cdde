"""
Adaptive integration of population models.

The driver steps scipy's DOP853 (embedded 8(5,3) Runge-Kutta pair) by hand so
that every accepted step can be checked for sign and finiteness before the
next one starts. Output is sampled on a uniform grid through each step's
dense interpolant.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import DOP853, trapezoid

from utils.exceptions import (
    EmptyWindowError,
    IntegrationError,
    NegativeStateError,
    NonFiniteStateError,
    ParameterError,
)

logger = logging.getLogger(__name__)


@dataclass
class IntegratorConfig:
    """Tolerances, horizon and output sampling of one integration."""

    t_span: Tuple[float, float]
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = math.inf
    sample_dt: float = 0.1

    def __post_init__(self):
        t0, t1 = self.t_span
        if not t1 > t0:
            raise ParameterError("t_span", self.t_span, "t1 > t0")
        for name in ("rel_tol", "abs_tol"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ParameterError(name, value, "0 < tol < 1")
        if not self.max_step > 0:
            raise ParameterError("max_step", self.max_step, "max_step > 0")
        if not self.sample_dt > 0:
            raise ParameterError("sample_dt", self.sample_dt, "sample_dt > 0")

    @classmethod
    def from_settings(cls, settings: Dict[str, Any], t_span: Tuple[float, float], **overrides) -> "IntegratorConfig":
        """Build from the `integrator` section of the application config."""
        values = {
            "rel_tol": settings.get("rel_tol", 1e-9),
            "abs_tol": settings.get("abs_tol", 1e-12),
            "max_step": settings.get("max_step", math.inf),
            "sample_dt": settings.get("sample_dt", 0.1),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(t_span=tuple(t_span), **values)

    def halved(self) -> "IntegratorConfig":
        return IntegratorConfig(
            t_span=self.t_span, rel_tol=self.rel_tol / 2, abs_tol=self.abs_tol / 2,
            max_step=self.max_step, sample_dt=self.sample_dt,
        )


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    nfev: int = 0
    clamped: int = 0


@dataclass
class Trajectory:
    """Uniformly sampled solution; `states` has one row per sample time."""

    times: np.ndarray
    states: np.ndarray
    stats: StepStats = field(default_factory=StepStats)
    coordinate_names: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[0] != self.times.size:
            raise ValueError("states must have one row per sample time")
        if not self.coordinate_names:
            self.coordinate_names = tuple(f"s{i}" for i in range(self.states.shape[1]))

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def column(self, name: str) -> np.ndarray:
        return self.states[:, self.coordinate_names.index(name)]

    def window(self, burn_in_fraction: float = 0.0) -> "Trajectory":
        """Samples after the first `burn_in_fraction` of the time span."""
        if not 0 <= burn_in_fraction < 1:
            raise ParameterError("burn_in_fraction", burn_in_fraction, "0 <= f < 1")
        t0, t1 = self.times[0], self.times[-1]
        mask = self.times >= t0 + burn_in_fraction * (t1 - t0)
        return Trajectory(self.times[mask], self.states[mask], self.stats, self.coordinate_names)

    def to_csv(self, path: Path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["t", *self.coordinate_names])
            for t, row in zip(self.times, self.states):
                writer.writerow([repr(float(t)), *(repr(float(v)) for v in row)])


def _sample_grid(t_span: Tuple[float, float], dt: float) -> np.ndarray:
    t0, t1 = t_span
    count = int(math.floor((t1 - t0) / dt + 1e-9))
    grid = t0 + dt * np.arange(count + 1)
    if t1 - grid[-1] > 1e-9 * max(1.0, abs(t1)):
        grid = np.append(grid, t1)
    return grid


def integrate(model, s0: Sequence[float], cfg: IntegratorConfig) -> Trajectory:
    """
    Integrate `model` from `s0` over `cfg.t_span`.

    Negative components no larger than `abs_tol` in magnitude are clamped to
    zero after each accepted step; larger undershoots abort the run.

    Raises:
        NegativeStateError, NonFiniteStateError, IntegrationError
    """
    y0 = model.check_state(s0)
    if np.any(y0 < 0):
        raise ParameterError("s0", tuple(y0), "non-negative populations")

    t0, t1 = cfg.t_span
    solver = DOP853(
        model, t0, y0, t1,
        rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.max_step,
    )
    grid = _sample_grid(cfg.t_span, cfg.sample_dt)
    samples = np.empty((grid.size, y0.size))
    samples[0] = y0
    next_sample = 1
    stats = StepStats()

    while solver.status == "running":
        nfev_before = solver.nfev
        message = solver.step()
        if solver.status == "failed":
            raise IntegrationError(f"Step failed: {message}", t=solver.t)

        attempts = max(1, round((solver.nfev - nfev_before) / solver.n_stages))
        stats.accepted += 1
        stats.rejected += attempts - 1

        if not np.all(np.isfinite(solver.y)):
            raise NonFiniteStateError(solver.t)

        if next_sample < grid.size and grid[next_sample] <= solver.t:
            dense = solver.dense_output()
            stop = np.searchsorted(grid, solver.t, side="right")
            values = dense(grid[next_sample:stop])
            samples[next_sample:stop] = values.T
            next_sample = stop

        lowest = solver.y.min()
        if lowest < 0:
            if lowest < -cfg.abs_tol:
                raise NegativeStateError(solver.t, float(lowest), cfg.abs_tol)
            solver.y = np.maximum(solver.y, 0.0)
            solver.f = solver.fun(solver.t, solver.y)
            stats.clamped += 1

    if next_sample < grid.size:
        samples[next_sample:] = solver.y

    negative = samples < 0
    if np.any(samples[negative] < -cfg.abs_tol):
        worst = np.unravel_index(np.argmin(samples), samples.shape)
        raise NegativeStateError(float(grid[worst[0]]), float(samples[worst]), cfg.abs_tol)
    samples[negative] = 0.0

    stats.nfev = solver.nfev
    logger.debug(
        f"Integrated {type(model).__name__} on [{t0}, {t1}]: "
        f"{stats.accepted} steps, {stats.rejected} rejected, {stats.nfev} evaluations"
    )
    return Trajectory(grid, samples, stats, tuple(model.coordinate_names))


def time_average(traj: Trajectory, burn_in_fraction: float = 0.0) -> np.ndarray:
    """Trapezoidal time mean of every coordinate after the burn-in."""
    window = traj.window(burn_in_fraction)
    if window.times.size < 2:
        raise EmptyWindowError("time average", window.times.size)
    span = window.times[-1] - window.times[0]
    return trapezoid(window.states, window.times, axis=0) / span


def persistence_margin(
    traj: Trajectory,
    burn_in_fraction: float = 0.0,
    coordinates: Optional[Sequence[int]] = None,
) -> float:
    """Smallest coordinate value after the burn-in; > 0 is evidence of persistence."""
    window = traj.window(burn_in_fraction)
    states = window.states if coordinates is None else window.states[:, list(coordinates)]
    return float(states.min()) if states.size else 0.0
