"""
Closed-form connections along the prey axes of the two-prey system.

On the x axis (y = z = 0) the field is logistic, so
psi(t) = K1/(1 - c exp(-r1 t)), c in (0, 1), is an exact orbit ending at
(K1, 0, 0); the y axis is the same with (r2, K2).
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from models.prey import TwoPreyDynamics
from utils.exceptions import ParameterError, UnsupportedModelError

AXES = {"x": 0, "y": 1}


def logistic_arc(r: float, K: float, c: float, t: np.ndarray, coefficient: float = 1.0):
    """Values and time derivatives of coefficient * K/(1 - c e^{-r t})."""
    e = c * np.exp(-r * t)
    value = coefficient * K / (1 - e)
    derivative = -coefficient * K * r * e / (1 - e) ** 2
    return value, derivative


@dataclass
class HeteroclinicCheck:
    axis: str
    c: float
    coefficient: float
    residual: float
    samples: int

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "c": self.c,
            "coefficient": self.coefficient,
            "residual": self.residual,
            "samples": self.samples,
        }


def heteroclinic_residual(
    model,
    c: float,
    t_grid: Sequence[float],
    axis: str = "x",
    coefficient: float = 1.0,
) -> HeteroclinicCheck:
    """
    max over t_grid of |F(psi(t)) - psi'(t)| for the arc on `axis`.

    `coefficient` scales the candidate; any value other than 1 is not an orbit.

    Raises:
        UnsupportedModelError: not a two-prey family
        ParameterError: c outside (0, 1), unknown axis, or t_grid with t < 0
    """
    if not isinstance(model, TwoPreyDynamics):
        raise UnsupportedModelError("heteroclinic", getattr(model, "family", type(model).__name__))
    if not 0 < c < 1:
        raise ParameterError("c", c, "0 < c < 1")
    if axis not in AXES:
        raise ParameterError("axis", axis, f"one of {sorted(AXES)}")
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0 or np.any(t < 0):
        raise ParameterError("t_grid", "negative or empty", "t >= 0")

    p = model.params()
    index = AXES[axis]
    r, K = (p.r1, p.K1) if index == 0 else (p.r2, p.K2)
    value, derivative = logistic_arc(r, K, c, t, coefficient)

    residual = 0.0
    for v, dv in zip(value, derivative):
        s = np.zeros(3)
        s[index] = v
        error = model.vector_field(s)
        error[index] -= dv
        residual = max(residual, float(np.max(np.abs(error))))
    return HeteroclinicCheck(axis=axis, c=c, coefficient=coefficient, residual=residual, samples=int(t.size))
