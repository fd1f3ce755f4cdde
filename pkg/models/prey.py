"""
Two competing prey sharing one Holling type II predator, and its rescaled forms.

    x' = x (r1 (1 - x/K1) - alpha12 y - q1 z/(1 + a1 x))
    y' = y (r2 (1 - y/K2) - alpha21 x - q2 z/(1 + a2 y))
    z' = z (c1 q1 x/(1 + a1 x) + c2 q2 y/(1 + a2 y) - mu - m z)
"""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, model_validator

from models.base import PopulationModel


class TwoPreyDynamics(PopulationModel):

    def rhs(self, s, p):
        x, y, z = s
        f1 = p.q1 / (1 + p.a1 * x)
        f2 = p.q2 / (1 + p.a2 * y)
        return [
            x * (p.r1 * (1 - x / p.K1) - p.alpha12 * y - f1 * z),
            y * (p.r2 * (1 - y / p.K2) - p.alpha21 * x - f2 * z),
            z * (p.c1 * f1 * x + p.c2 * f2 * y - p.mu - p.m * z),
        ]

    def jacobian(self, s) -> np.ndarray:
        x, y, z = self.check_state(s)
        p = self.params()
        d1 = 1 + p.a1 * x
        d2 = 1 + p.a2 * y
        return np.array([
            [p.r1 * (1 - 2 * x / p.K1) - p.alpha12 * y - p.q1 * z / d1 ** 2,
             -p.alpha12 * x,
             -p.q1 * x / d1],
            [-p.alpha21 * y,
             p.r2 * (1 - 2 * y / p.K2) - p.alpha21 * x - p.q2 * z / d2 ** 2,
             -p.q2 * y / d2],
            [p.c1 * p.q1 * z / d1 ** 2,
             p.c2 * p.q2 * z / d2 ** 2,
             p.c1 * p.q1 * x / d1 + p.c2 * p.q2 * y / d2 - p.mu - 2 * p.m * z],
        ])

    def time_factor(self, s, p):
        x, y = s[0], s[1]
        return (1 + p.a1 * x) * (1 + p.a2 * y)

    def response(self, x: float, y: float):
        """Functional responses p1(x), p2(y)."""
        p = self.params()
        return p.q1 * x / (1 + p.a1 * x), p.q2 * y / (1 + p.a2 * y)


class TwoPreyModel(TwoPreyDynamics, BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    family: Literal["two_prey"] = "two_prey"
    r1: PositiveFloat
    r2: PositiveFloat
    K1: PositiveFloat
    K2: PositiveFloat
    q1: PositiveFloat
    q2: PositiveFloat
    a1: NonNegativeFloat
    a2: NonNegativeFloat
    c1: PositiveFloat
    c2: PositiveFloat
    mu: PositiveFloat
    m: NonNegativeFloat = Field(..., description="Intraspecific competition of the predator")
    alpha12: NonNegativeFloat = Field(0.0, description="Effect of y on x")
    alpha21: NonNegativeFloat = Field(0.0, description="Effect of x on y")

    def with_updates(self, **changes) -> "TwoPreyModel":
        return TwoPreyModel(**{**self.model_dump(), **changes})


class RescaledTwoPreyModel(TwoPreyDynamics, BaseModel):
    """
    Two-prey system rescaled so that (1/4, 1/4, 1) is an equilibrium.

    q1, q2 and mu are solved from the equilibrium equations.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    family: Literal["two_prey_rescaled"] = "two_prey_rescaled"
    r1: PositiveFloat
    r2: PositiveFloat
    K1: float = Field(..., gt=0.25)
    K2: float = Field(..., gt=0.25)
    a1: NonNegativeFloat
    a2: NonNegativeFloat
    c1: PositiveFloat
    c2: PositiveFloat
    m: NonNegativeFloat
    alpha12: NonNegativeFloat = 0.0
    alpha21: NonNegativeFloat = 0.0

    def derive(self, p):
        p.q1 = (p.r1 * (1 - 1 / (4 * p.K1)) - p.alpha12 / 4) * (1 + p.a1 / 4)
        p.q2 = (p.r2 * (1 - 1 / (4 * p.K2)) - p.alpha21 / 4) * (1 + p.a2 / 4)
        p.mu = p.c1 * p.q1 / (4 + p.a1) + p.c2 * p.q2 / (4 + p.a2) - p.m
        return p

    @model_validator(mode="after")
    def _check_derived(self):
        p = self.params()
        if p.q1 <= 0 or p.q2 <= 0:
            raise ValueError("capture rates solved for the (1/4, 1/4, 1) equilibrium must be positive")
        if p.mu <= 0:
            raise ValueError("solved mortality mu must be positive")
        return self

    @property
    def equilibrium(self) -> np.ndarray:
        return np.array([0.25, 0.25, 1.0])


class CanonicalTwoPreyModel(TwoPreyDynamics, BaseModel):
    """
    Rescaled two-prey system with K1 = c2 = a1 = a2 = 1 and alpha = 0.

    q1 = 15 r1/16, q2 = 5 r2 (4 K2 - 1)/(16 K2) and
    mu = 3 c1 r1/16 + r2 (4 K2 - 1)/(16 K2) - m, so (1/4, 1/4, 1) is an
    equilibrium. m is any real number that keeps mu positive.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    family: Literal["two_prey_canonical"] = "two_prey_canonical"
    r1: PositiveFloat
    r2: PositiveFloat
    K2: float = Field(..., gt=0.25)
    c1: PositiveFloat
    m: float

    def derive(self, p):
        p.K1 = p.c2 = p.a1 = p.a2 = 1
        p.alpha12 = p.alpha21 = 0
        p.q1 = 15 * p.r1 / 16
        p.q2 = 5 * p.r2 * (4 * p.K2 - 1) / (16 * p.K2)
        p.mu = 3 * p.c1 * p.r1 / 16 + p.r2 * (4 * p.K2 - 1) / (16 * p.K2) - p.m
        return p

    @model_validator(mode="after")
    def _check_mortality(self):
        if self.params().mu <= 0:
            raise ValueError("m must satisfy m < 3 c1 r1/16 + r2 (4 K2 - 1)/(16 K2)")
        return self

    def time_factor(self, s, p):
        # clears both the 16 and the K2 denominators
        return 256 * p.K2 * (1 + s[0]) * (1 + s[1])

    @property
    def equilibrium(self) -> np.ndarray:
        return np.array([0.25, 0.25, 1.0])

    def with_updates(self, **changes) -> "CanonicalTwoPreyModel":
        return CanonicalTwoPreyModel(**{**self.model_dump(), **changes})


class SymmetricTwoPreyModel(PopulationModel, BaseModel):
    """
    Two prey with a shared-handling functional response.

        x' = x (r1 (2 - x) - 3 r1 z/(1 + x + y))
        y' = y (r2 (2 - y) - 3 r2 z/(1 + x + y))
        z' = z (3 c1 (r1 x + r2 y)/(1 + x + y) - (c1 (r1 + r2) - m) - m z)

    Multiplying by 1 + x + y gives the polynomial form; (1, 1, 1) is an
    equilibrium for every parameter choice.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    family: Literal["two_prey_symmetric"] = "two_prey_symmetric"
    r1: PositiveFloat
    r2: PositiveFloat
    c1: PositiveFloat
    m: float

    def derive(self, p):
        p.mu = p.c1 * (p.r1 + p.r2) - p.m
        return p

    @model_validator(mode="after")
    def _check_mortality(self):
        if self.params().mu <= 0:
            raise ValueError("m must satisfy m < c1 (r1 + r2)")
        return self

    def rhs(self, s, p):
        x, y, z = s
        d = 1 + x + y
        return [
            x * (p.r1 * (2 - x) - 3 * p.r1 * z / d),
            y * (p.r2 * (2 - y) - 3 * p.r2 * z / d),
            z * (3 * p.c1 * (p.r1 * x + p.r2 * y) / d - p.mu - p.m * z),
        ]

    def jacobian(self, s) -> np.ndarray:
        x, y, z = self.check_state(s)
        p = self.params()
        d = 1 + x + y
        weighted = p.r1 * x + p.r2 * y
        return np.array([
            [p.r1 * (2 - 2 * x) - 3 * p.r1 * z / d + 3 * p.r1 * x * z / d ** 2,
             3 * p.r1 * x * z / d ** 2,
             -3 * p.r1 * x / d],
            [3 * p.r2 * y * z / d ** 2,
             p.r2 * (2 - 2 * y) - 3 * p.r2 * z / d + 3 * p.r2 * y * z / d ** 2,
             -3 * p.r2 * y / d],
            [3 * p.c1 * z * (p.r1 * d - weighted) / d ** 2,
             3 * p.c1 * z * (p.r2 * d - weighted) / d ** 2,
             3 * p.c1 * weighted / d - p.mu - 2 * p.m * z],
        ])

    def time_factor(self, s, p):
        return 1 + s[0] + s[1]

    @property
    def equilibrium(self) -> np.ndarray:
        return np.ones(3)
