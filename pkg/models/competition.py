"""
Resource with n consumers that compete among themselves.

    x'   = x (r g(x) - sum_i q_i y_i)
    y_i' = y_i (c_i q_i x - mu_i - sum_j m_ij y_j)

Capture is linear in x (constant capture rate per consumer).
"""

from typing import List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from models.base import PopulationModel
from models.growth import GrowthFunction


class CompetitionModel(PopulationModel, BaseModel):
    """Resource + n competing consumers with a general growth function."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    family: Literal["competition"] = "competition"
    r: PositiveFloat = Field(..., description="Intrinsic growth rate of the resource")
    growth: GrowthFunction = Field(..., description="Per-capita growth law, carries K")
    q: List[PositiveFloat] = Field(..., min_length=1, description="Capture rates")
    c: List[PositiveFloat] = Field(..., min_length=1, description="Conversion efficiencies")
    mu: List[PositiveFloat] = Field(..., min_length=1, description="Mortalities")
    M: List[List[float]] = Field(..., description="Competition matrix m_ij")

    @model_validator(mode="after")
    def _check_shapes(self):
        n = len(self.q)
        if len(self.c) != n or len(self.mu) != n:
            raise ValueError("q, c and mu must have the same length")
        if len(self.M) != n or any(len(row) != n for row in self.M):
            raise ValueError(f"M must be {n}x{n}")
        for i, row in enumerate(self.M):
            for j, value in enumerate(row):
                if i == j and value <= 0:
                    raise ValueError(f"m_{i + 1}{j + 1} must be > 0")
                if i != j and value < 0:
                    raise ValueError(f"m_{i + 1}{j + 1} must be >= 0")
        return self

    @property
    def n(self) -> int:
        return len(self.q)

    @property
    def K(self) -> float:
        return self.growth.K

    @property
    def dimension(self) -> int:
        return self.n + 1

    @property
    def coordinate_names(self) -> Tuple[str, ...]:
        return ("x",) + tuple(f"y{i + 1}" for i in range(self.n))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.M, dtype=float)

    @property
    def kappa(self) -> np.ndarray:
        """kappa_i = c_i q_i."""
        return np.array(self.c) * np.array(self.q)

    def rhs(self, s, p):
        x, ys = s[0], s[1:]
        n = len(p.q)
        capture = sum(p.q[i] * ys[i] for i in range(n))
        out = [p.r * p.growth.flux(x) - x * capture]
        for i in range(n):
            crowding = sum(p.M[i][j] * ys[j] for j in range(n))
            out.append(ys[i] * (p.c[i] * p.q[i] * x - p.mu[i] - crowding))
        return out

    def jacobian(self, s) -> np.ndarray:
        state = self.check_state(s)
        x, ys = state[0], state[1:]
        q = np.array(self.q)
        M = self.matrix
        jac = np.zeros((self.dimension, self.dimension))
        jac[0, 0] = self.r * self.growth.flux_derivative(x) - q @ ys
        jac[0, 1:] = -q * x
        jac[1:, 0] = self.kappa * ys
        jac[1:, 1:] = -M * ys[:, None]
        jac[1:, 1:] += np.diag(self.kappa * x - np.array(self.mu) - M @ ys)
        return jac
