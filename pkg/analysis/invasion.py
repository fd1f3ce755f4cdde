"""
Invasion of a resident prey-predator pair by a second prey.

The resident pair (x, z) is a predator-prey system with crowding. The invader
y grows at the rate r2 - alpha21 x - q2 z while rare, so it establishes when
r2 exceeds the time mean of alpha21 x + q2 z on the resident attractor.
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from analysis.bazykin import cardano_root
from analysis.isoclines import predator_prey_face
from dynamics.integrator import IntegratorConfig, Trajectory, integrate, time_average
from models.bazykin import BazykinModel
from models.prey import TwoPreyModel
from utils.exceptions import NoPositiveEquilibriumError, ParameterError
from utils.logging_config import log_function_call, log_processing_progress

logger = logging.getLogger(__name__)

OUTCOMES = ("coexistence", "predator_extinct", "invader_extinct", "only_invader", "resident_prey_extinct")


def resident_submodel(model: TwoPreyModel) -> BazykinModel:
    """The (x, z) system with the invader absent."""
    p = model.params()
    return BazykinModel(r=p.r1, K=p.K1, q=p.q1, a=p.a1, c=p.c1, mu=p.mu, m=p.m)


@dataclass
class InvasionThreshold:
    x_tilde: float
    z_tilde: float
    r2_min: float
    r2: float
    cardano: Optional[float] = None
    alternatives: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def invades(self) -> bool:
        return self.r2 > self.r2_min

    def to_dict(self) -> dict:
        return {
            "x_tilde": self.x_tilde,
            "z_tilde": self.z_tilde,
            "r2_min": self.r2_min,
            "r2": self.r2,
            "invades": self.invades,
            "cardano": self.cardano,
            "alternatives": [list(a) for a in self.alternatives],
        }


def invasion_threshold(
    model: TwoPreyModel,
    s0: Optional[Sequence[float]] = None,
    cfg: Optional[IntegratorConfig] = None,
) -> InvasionThreshold:
    """
    Smallest invader growth rate that lets y establish at the resident equilibrium.

    When the resident pair has several positive equilibria, the one reached
    from the (x, z) part of `s0` is used and the rest are reported.

    Raises:
        NoPositiveEquilibriumError: the resident pair has no positive equilibrium
    """
    p = model.params()
    resident = resident_submodel(model)
    points = predator_prey_face(p.r1, p.K1, p.q1, p.a1, p.c1, p.mu, p.m)
    if not points:
        raise NoPositiveEquilibriumError("Resident prey-predator pair has no positive equilibrium")

    chosen = points[0]
    if len(points) > 1:
        if s0 is None:
            logger.warning(f"{len(points)} resident equilibria and no initial state; using the smallest")
        else:
            start = np.asarray(s0, dtype=float)[[0, 2]]
            config = cfg or IntegratorConfig(t_span=(0.0, 2000.0), sample_dt=1.0)
            final = integrate(resident, start, config).final_state
            chosen = min(points, key=lambda pt: float(np.linalg.norm(final - np.array(pt))))

    x, z = chosen
    r2_min = p.alpha21 * x + (p.r1 * p.q2 / p.q1) * (1 - x / p.K1) * (1 + p.a1 * x)
    substituted = p.alpha21 * x + p.q2 * z
    if abs(r2_min - substituted) > 1e-9 * max(1.0, abs(r2_min)):
        logger.warning(f"Threshold forms disagree: {r2_min!r} vs {substituted!r}")

    cardano = cardano_root(resident) if p.m > 0 and p.a1 > 0 else None
    return InvasionThreshold(
        x_tilde=x,
        z_tilde=z,
        r2_min=r2_min,
        r2=p.r2,
        cardano=cardano,
        alternatives=[pt for pt in points if pt != chosen],
    )


@dataclass
class FluctuatingThreshold:
    direct: float
    substituted: float
    mean_x: float
    mean_z: float

    @property
    def relative_gap(self) -> float:
        return abs(self.direct - self.substituted) / max(abs(self.direct), 1e-300)

    def to_dict(self) -> dict:
        return {
            "r2_min": self.direct,
            "r2_min_substituted": self.substituted,
            "mean_x": self.mean_x,
            "mean_z": self.mean_z,
            "relative_gap": self.relative_gap,
        }


def invasion_threshold_fluctuating(
    model: TwoPreyModel, traj: Trajectory, burn_in_fraction: float = 0.0,
) -> FluctuatingThreshold:
    """
    Invasion threshold on a non-stationary resident orbit.

    `traj` is a trajectory of the resident (x, z) system. The direct form is
    alpha21 <x> + q2 <z>; the substituted form replaces z by its prey-isocline
    value, which is exact only at an equilibrium.

    Raises:
        EmptyWindowError: fewer than two samples after burn-in
    """
    p = model.params()
    if traj.states.shape[1] != 2:
        raise ParameterError("traj", traj.states.shape, "a two-column (x, z) trajectory")
    mean_x, mean_z = time_average(traj, burn_in_fraction)

    window = traj.window(burn_in_fraction)
    x = window.states[:, 0]
    shape = Trajectory(window.times, ((1 - x / p.K1) * (1 + p.a1 * x))[:, None])
    mean_shape = float(time_average(shape)[0])

    return FluctuatingThreshold(
        direct=float(p.alpha21 * mean_x + p.q2 * mean_z),
        substituted=float(p.alpha21 * mean_x + (p.r1 * p.q2 / p.q1) * mean_shape),
        mean_x=float(mean_x),
        mean_z=float(mean_z),
    )


@dataclass
class OutcomeLabel:
    label: str
    final_state: np.ndarray
    distances: Tuple[float, float, float]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "final_state": [float(v) for v in self.final_state],
            "dist_x": self.distances[0],
            "dist_y": self.distances[1],
            "dist_z": self.distances[2],
        }


def label_state(state: Sequence[float], extinct_eps: float) -> str:
    """Outcome of a state at the settling time by which coordinates fall below extinct_eps."""
    x, y, z = (v < extinct_eps for v in state)
    if z:
        return "predator_extinct"
    if not x and not y:
        return "coexistence"
    if x and not y:
        return "only_invader"
    if y and not x:
        return "invader_extinct"
    return "resident_prey_extinct"


def classify_outcome(
    model: TwoPreyModel,
    s0: Sequence[float],
    T: float = 100.0,
    extinct_eps: float = 1e-3,
    cfg: Optional[IntegratorConfig] = None,
) -> OutcomeLabel:
    """
    Integrate to T and label the state by its extinct coordinates.

    The distance to each face is the absolute value of that coordinate.

    Raises:
        ParameterError: T <= 0
        IntegrationError: the integration fails
    """
    if not T > 0:
        raise ParameterError("T", T, "T > 0")
    config = cfg or IntegratorConfig(t_span=(0.0, T), sample_dt=T)
    if config.t_span != (0.0, T):
        config = IntegratorConfig(
            t_span=(0.0, T), rel_tol=config.rel_tol, abs_tol=config.abs_tol,
            max_step=config.max_step, sample_dt=min(config.sample_dt, T),
        )
    final = integrate(model, s0, config).final_state
    return OutcomeLabel(
        label=label_state(final, extinct_eps),
        final_state=final,
        distances=tuple(float(abs(v)) for v in final),
    )


@dataclass
class SweepCell:
    K2: float
    a2: float
    outcome: OutcomeLabel

    def row(self) -> list:
        d = self.outcome.distances
        return [repr(self.K2), repr(self.a2), self.outcome.label, repr(d[0]), repr(d[1]), repr(d[2])]


@dataclass
class SweepResult:
    K2_values: np.ndarray
    a2_values: np.ndarray
    cells: List[SweepCell]

    def labels(self) -> np.ndarray:
        """Label matrix with one row per K2 value."""
        grid = np.array([c.outcome.label for c in self.cells], dtype=object)
        return grid.reshape(self.K2_values.size, self.a2_values.size)

    def counts(self) -> dict:
        labels = [c.outcome.label for c in self.cells]
        return {name: labels.count(name) for name in OUTCOMES}

    def to_csv(self, path: Path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["K2", "a2", "label", "dist_x", "dist_y", "dist_z"])
            for cell in self.cells:
                writer.writerow(cell.row())


@log_function_call
def sweep(
    model: TwoPreyModel,
    K2_range: Tuple[float, float],
    a2_range: Tuple[float, float],
    grid: Tuple[int, int],
    s0: Sequence[float],
    T: float = 100.0,
    extinct_eps: float = 1e-3,
    max_workers: int = 4,
    cfg: Optional[IntegratorConfig] = None,
) -> SweepResult:
    """
    Outcome labels over a (K2, a2) grid, row-major with K2 as the row.

    A 1 x 1 grid evaluates the lower corner of both ranges. Cells run on a
    thread pool; results are placed by index so the order never depends on
    completion order.
    """
    rows, cols = grid
    if rows < 1 or cols < 1:
        raise ParameterError("grid", grid, "at least 1 x 1")
    K2_values = np.linspace(*K2_range, rows) if rows > 1 else np.array([K2_range[0]])
    a2_values = np.linspace(*a2_range, cols) if cols > 1 else np.array([a2_range[0]])
    tasks = [(K2, a2) for K2 in K2_values for a2 in a2_values]
    cells: List[Optional[SweepCell]] = [None] * len(tasks)

    def run(index: int) -> int:
        K2, a2 = tasks[index]
        cell_model = model.with_updates(K2=float(K2), a2=float(a2))
        outcome = classify_outcome(cell_model, s0, T, extinct_eps, cfg)
        cells[index] = SweepCell(float(K2), float(a2), outcome)
        return index

    total = len(tasks)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        for done, _ in enumerate(executor.map(run, range(total)), start=1):
            log_processing_progress(done, total, logger)

    return SweepResult(K2_values, a2_values, cells)
