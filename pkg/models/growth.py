"""
Per-capita resource growth functions g(x) with g(K) = 0.

The resource equation of the competition model is x' = r x g(x) - ..., so
besides g itself the model needs the flux x g(x) and its derivative
g(x) + x g'(x), whose limit at x = 0 (beta) enters the origin Jacobian.
"""

import math
from typing import Literal

import numpy as np
import sympy as sp
from pydantic import BaseModel, ConfigDict, Field, model_validator

from utils.exceptions import GrowthLimitError, ParameterError

GrowthKind = Literal["logistic", "richards", "gompertz", "gompertz_modified", "schoner"]


def _log(value):
    return sp.log(value) if isinstance(value, sp.Basic) else math.log(value)


class GrowthFunction(BaseModel):
    """Tagged growth function; the carrying capacity K is its only parameter."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: GrowthKind = Field("logistic", description="Growth law")
    K: float = Field(..., gt=0, description="Carrying capacity")

    @model_validator(mode="after")
    def _check_gompertz(self):
        # ln K is the normaliser; K <= 1 makes g non-decreasing
        if self.kind == "gompertz" and self.K <= 1:
            raise ValueError("gompertz growth requires K > 1")
        return self

    def _check_domain(self, x):
        if isinstance(x, sp.Basic):
            return
        if self.kind == "gompertz" and x <= 0:
            raise ParameterError("x", x, "x > 0 for gompertz growth")
        if x < 0:
            raise ParameterError("x", x, "x >= 0")

    def __call__(self, x):
        """Evaluate g(x)."""
        self._check_domain(x)
        K = self.K
        if self.kind == "logistic":
            return 1 - x / K
        if self.kind == "richards":
            return 1 - (x / K) ** 2
        if self.kind == "gompertz":
            return _log(K / x) / _log(K)
        if self.kind == "gompertz_modified":
            return _log((K + 1) / (x + 1)) / _log(K + 1)
        return ((K + 1) / (x + 1) - 1) / K

    def derivative(self, x):
        """Evaluate g'(x)."""
        self._check_domain(x)
        K = self.K
        if self.kind == "logistic":
            return -1 / K
        if self.kind == "richards":
            return -2 * x / K ** 2
        if self.kind == "gompertz":
            return -1 / (x * _log(K))
        if self.kind == "gompertz_modified":
            return -1 / ((x + 1) * _log(K + 1))
        return -(K + 1) / (K * (x + 1) ** 2)

    @property
    def beta(self) -> float:
        """Limit of g(x) + x g'(x) as x -> 0+."""
        if self.kind == "gompertz":
            raise GrowthLimitError(self.kind, "limit of g(x) + x g'(x) at x = 0")
        return 1.0

    def flux(self, x):
        """x g(x), continuous at 0 for every kind."""
        if not isinstance(x, sp.Basic) and x == 0:
            return 0.0
        return x * self(x)

    def flux_derivative(self, x):
        """d/dx [x g(x)] = g(x) + x g'(x)."""
        if not isinstance(x, sp.Basic) and x == 0:
            return self.beta
        return self(x) + x * self.derivative(x)

    def is_strictly_decreasing(self, samples: int = 200) -> bool:
        """Sampled finite-difference check of monotonicity on (0, K]."""
        grid = np.linspace(self.K / samples, self.K, samples)
        values = np.array([self(x) for x in grid])
        return bool(np.all(np.diff(values) < 0))


def eval_growth(g: GrowthFunction, x: float) -> float:
    return float(g(x))
