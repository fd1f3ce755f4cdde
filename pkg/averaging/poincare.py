"""
Numerical return map around an equilibrium with a rotating eigenpair.

The section is the half-plane xi1 = 0, xi0 > 0 in the eigen-coordinates
xi = Q^-1 (s - E), Q = [Re w, Im w, ...]. Near E the pair block is
[[eps, omega], [-omega, eps]], so orbits cross it with xi1 decreasing.
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from analysis.equilibria import RESIDUAL_TOL, polish
from averaging.averaged import OrbitPrediction, cylindrical_rates
from bifurcation.normal_form import eigenbasis
from utils.exceptions import IntegrationError, NoReturnError, NotAnEquilibriumError, ParameterError

logger = logging.getLogger(__name__)

MIN_RETURNS = 3


@dataclass
class PoincareResult:
    """
    Returns to the section and what they converge to.

    `status` is "cycle" when the return amplitudes settle at a positive value
    and "equilibrium" when they collapse onto E. `multiplier` is the ratio of
    successive amplitude increments at a cycle and of successive amplitudes
    at a focus.
    """

    status: str
    center: np.ndarray
    return_times: np.ndarray
    amplitudes: np.ndarray
    fixed_point: float
    period: float
    multiplier: float
    multiplier_resolved: bool
    linear_period: float
    theta_violations: float
    crossings: np.ndarray = field(repr=False, default=None)

    @property
    def stable(self) -> bool:
        return self.status == "equilibrium" or abs(self.multiplier) < 1

    @property
    def period_ratio(self) -> float:
        return self.period / self.linear_period

    def agrees_with(self, prediction: OrbitPrediction) -> Optional[bool]:
        """Whether a found cycle has the predicted stability; None without a cycle."""
        if self.status != "cycle":
            return None
        return self.stable == prediction.stable

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "center": [float(v) for v in self.center],
            "returns": int(self.amplitudes.size),
            "fixed_point": self.fixed_point,
            "period": self.period,
            "linear_period": self.linear_period,
            "multiplier": self.multiplier,
            "multiplier_resolved": self.multiplier_resolved,
            "stable": self.stable,
            "theta_violations": self.theta_violations,
        }

    def to_csv(self, path: Path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            names = [f"s{i}" for i in range(self.crossings.shape[1])]
            writer.writerow(["k", "t", "amplitude", *names])
            for k, (t, a, s) in enumerate(zip(self.return_times, self.amplitudes, self.crossings)):
                writer.writerow([k, repr(float(t)), repr(float(a)), *(repr(float(v)) for v in s)])


def _aitken(a: np.ndarray) -> float:
    """Fixed point of a geometric sequence from its last three terms."""
    d1, d2 = a[-2] - a[-3], a[-1] - a[-2]
    denominator = d2 - d1
    if denominator == 0:
        return float(a[-1])
    return float(a[-1] - d2 * d2 / denominator)


def _ratio(values: np.ndarray, floor: float) -> Optional[float]:
    usable = [values[k + 1] / values[k] for k in range(values.size - 1) if abs(values[k]) > floor]
    return float(np.median(usable)) if usable else None


def _start(center: np.ndarray, direction: np.ndarray, offset: float) -> np.ndarray:
    step = offset * max(1.0, float(np.linalg.norm(center))) * direction / np.linalg.norm(direction)
    for s0 in (center + step, center - step):
        if np.all(s0 >= 0):
            return s0
    raise ParameterError("start_offset", offset, "a start point in the non-negative orthant")


def poincare_validate(
    model,
    center: Optional[Sequence[float]] = None,
    s0: Optional[Sequence[float]] = None,
    horizon: float = 2000.0,
    n_iterates: int = 20,
    start_offset: float = 0.05,
    collapse_fraction: float = 1e-3,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    sample_dt: float = 0.1,
) -> PoincareResult:
    """
    Integrate until `horizon` and analyse the returns to the section at `center`.

    `center` defaults to the family's fixed equilibrium; `s0` to a point
    `start_offset` away along Re w. The last `n_iterates` returns decide the
    status, period and multiplier.

    Raises:
        NoReturnError: no rotating pair at the equilibrium, or fewer than three returns
        NotAnEquilibriumError: `center` is not an equilibrium
        IntegrationError: the solver fails
    """
    if not horizon > 0:
        raise ParameterError("horizon", horizon, "horizon > 0")
    if n_iterates < MIN_RETURNS:
        raise ParameterError("n_iterates", n_iterates, f">= {MIN_RETURNS}")

    if center is None:
        if not hasattr(model, "equilibrium"):
            raise ParameterError("center", None, f"an equilibrium of {model.family}")
        center = model.equilibrium
    E = polish(model, center)
    residual = model.residual(E)
    if residual > RESIDUAL_TOL:
        raise NotAnEquilibriumError(E, residual, RESIDUAL_TOL)

    Q, eigenvalues, has_pair = eigenbasis(model.jacobian(E), center_eps=1e-9)
    if not has_pair:
        raise NoReturnError(f"Spectrum {eigenvalues} at {tuple(E)} has no rotating pair; orbits do not return")
    omega = float(eigenvalues[0].imag)
    Qinv = np.linalg.inv(Q)

    start = model.check_state(s0) if s0 is not None else _start(E, Q[:, 0], start_offset)

    def section(t, s):
        return Qinv[1] @ (s - E)

    section.direction = -1

    grid = np.arange(0.0, horizon, sample_dt)
    sol = solve_ivp(
        model, (0.0, horizon), start,
        method="DOP853", rtol=rel_tol, atol=abs_tol,
        events=section, t_eval=grid,
    )
    if sol.status == -1:
        raise IntegrationError(f"Return-map integration failed: {sol.message}")

    crossings = np.reshape(sol.y_events[0], (-1, E.size))
    keep = (crossings - E) @ Qinv[0] > 0
    times = sol.t_events[0][keep]
    crossings = crossings[keep]
    if times.size < MIN_RETURNS:
        raise NoReturnError(f"Only {times.size} returns to the section within t={horizon:g}")

    amplitudes = np.linalg.norm(crossings - E, axis=1)
    window = amplitudes[-n_iterates:]
    fixed_point = _aitken(window)
    collapsed = (
        window[-1] < collapse_fraction * amplitudes[0]
        or fixed_point < collapse_fraction * amplitudes[0]
    )
    floor = 1e3 * rel_tol * float(np.max(window))
    if collapsed:
        status = "equilibrium"
        fixed_point = 0.0
        multiplier = _ratio(window, floor)
    else:
        status = "cycle"
        multiplier = _ratio(np.diff(window), floor)
    resolved = multiplier is not None
    if not resolved:
        multiplier = 0.0
        logger.debug("Return amplitudes converged below resolution; multiplier set to 0")

    _, _, _, theta_dot = cylindrical_rates(model, sol.y.T, E)
    finite = theta_dot[np.isfinite(theta_dot)]
    violations = float(np.mean(finite <= 0)) if finite.size else 0.0
    if violations > 0:
        logger.info(f"theta' <= 0 on {violations:.1%} of samples")

    result = PoincareResult(
        status=status,
        center=E,
        return_times=times,
        amplitudes=amplitudes,
        fixed_point=fixed_point,
        period=float(np.mean(np.diff(times[-n_iterates:]))),
        multiplier=multiplier,
        multiplier_resolved=resolved,
        linear_period=2 * math.pi / omega,
        theta_violations=violations,
        crossings=crossings,
    )
    logger.info(
        f"Return map: {status}, {amplitudes.size} returns, period {result.period:.6g}, "
        f"multiplier {multiplier:.6g}"
    )
    return result


def validate_many(model, starts: Sequence[Sequence[float]], max_workers: int = 4, **kwargs) -> List[PoincareResult]:
    """poincare_validate from several start points; results keep the input order."""
    starts = [np.asarray(s, dtype=float) for s in starts]
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(lambda s: poincare_validate(model, s0=s, **kwargs), starts))
