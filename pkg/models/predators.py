"""
One logistic prey with two Holling type II predators.

    x' = x (r (1 - x/K) - q1 y/(1 + a1 x) - q2 z/(1 + a2 x))
    y' = y (c1 q1 x/(1 + a1 x) - mu1 - m1 y)
    z' = z (c2 q2 x/(1 + a2 x) - mu2 - m2 z)
"""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, model_validator

from models.base import PopulationModel


class TwoPredatorDynamics(PopulationModel):
    """Right-hand side and Jacobian shared by the raw and the rescaled records."""

    def rhs(self, s, p):
        x, y, z = s
        f1 = p.q1 / (1 + p.a1 * x)
        f2 = p.q2 / (1 + p.a2 * x)
        return [
            x * (p.r * (1 - x / p.K) - f1 * y - f2 * z),
            y * (p.c1 * f1 * x - p.mu1 - p.m1 * y),
            z * (p.c2 * f2 * x - p.mu2 - p.m2 * z),
        ]

    def jacobian(self, s) -> np.ndarray:
        x, y, z = self.check_state(s)
        p = self.params()
        d1 = 1 + p.a1 * x
        d2 = 1 + p.a2 * x
        return np.array([
            [p.r * (1 - 2 * x / p.K) - p.q1 * y / d1 ** 2 - p.q2 * z / d2 ** 2,
             -p.q1 * x / d1,
             -p.q2 * x / d2],
            [p.c1 * p.q1 * y / d1 ** 2, p.c1 * p.q1 * x / d1 - p.mu1 - 2 * p.m1 * y, 0.0],
            [p.c2 * p.q2 * z / d2 ** 2, 0.0, p.c2 * p.q2 * x / d2 - p.mu2 - 2 * p.m2 * z],
        ])

    def time_factor(self, s, p):
        x = s[0]
        return (1 + p.a1 * x) * (1 + p.a2 * x)


class TwoPredatorModel(TwoPredatorDynamics, BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    family: Literal["two_predator"] = "two_predator"
    r: PositiveFloat
    K: PositiveFloat
    q1: PositiveFloat
    q2: PositiveFloat
    a1: NonNegativeFloat = Field(..., description="Handling time of predator y")
    a2: NonNegativeFloat = Field(..., description="Handling time of predator z")
    c1: PositiveFloat
    c2: PositiveFloat
    mu1: PositiveFloat
    mu2: PositiveFloat
    m1: PositiveFloat
    m2: PositiveFloat

    def swapped(self) -> "TwoPredatorModel":
        """Same system with the roles of y and z exchanged."""
        data = self.model_dump()
        for a, b in (("q1", "q2"), ("a1", "a2"), ("c1", "c2"), ("mu1", "mu2"), ("m1", "m2")):
            data[a], data[b] = data[b], data[a]
        return TwoPredatorModel(**data)


class RescaledTwoPredatorModel(TwoPredatorDynamics, BaseModel):
    """
    Rescaled two-predator system with the positive equilibrium pinned at (1, 1, 1).

    q2 = a1 = a2 = c1 = c2 = m1 = 1, r = K(q1 + 1)/(2(K - 1)), mu1 = (q1 - 2)/2
    and mu2 = 1/2 - m2. Hopf thresholds put m2 on either side of [0, 1/2],
    so m2 is unrestricted and mu2 may be negative. The polynomial time factor
    is 1 + x, which clears every denominator since a1 = a2 = 1.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    family: Literal["two_predator_rescaled"] = "two_predator_rescaled"
    K: float = Field(..., gt=1)
    q1: float = Field(..., gt=2)
    m2: float

    def derive(self, p):
        p.r = p.K * (p.q1 + 1) / (2 * (p.K - 1))
        p.mu1 = (p.q1 - 2) / 2
        p.mu2 = (1 - 2 * p.m2) / 2
        p.q2 = p.a1 = p.a2 = p.c1 = p.c2 = p.m1 = 1
        return p

    def time_factor(self, s, p):
        return 1 + s[0]

    @property
    def equilibrium(self) -> np.ndarray:
        return np.ones(3)

    def to_general(self) -> TwoPredatorModel:
        """Equivalent raw record; only valid while 0 < m2 < 1/2."""
        p = self.params()
        return TwoPredatorModel(
            r=p.r, K=p.K, q1=p.q1, q2=1.0, a1=1.0, a2=1.0, c1=1.0, c2=1.0,
            mu1=p.mu1, mu2=p.mu2, m1=1.0, m2=p.m2,
        )
