"""
Predator-prey system with Holling type II response and predator crowding.

    x' = x (r (1 - x/K) - q y/(1 + a x))
    y' = y (c q x/(1 + a x) - mu - m y)

m = 0 is the classical Rosenzweig-MacArthur limit.
"""

from typing import ClassVar, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat

from models.base import PopulationModel


class BazykinModel(PopulationModel, BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    dimension: ClassVar[int] = 2
    coordinate_names: ClassVar[Tuple[str, ...]] = ("x", "y")

    family: Literal["bazykin"] = "bazykin"
    r: PositiveFloat
    K: PositiveFloat
    q: NonNegativeFloat
    a: NonNegativeFloat
    c: PositiveFloat
    mu: PositiveFloat
    m: NonNegativeFloat = Field(..., description="Predator crowding; 0 allowed")

    def rhs(self, s, p):
        x, y = s
        f = p.q / (1 + p.a * x)
        return [
            x * (p.r * (1 - x / p.K) - f * y),
            y * (p.c * f * x - p.mu - p.m * y),
        ]

    def jacobian(self, s) -> np.ndarray:
        x, y = self.check_state(s)
        d = 1 + self.a * x
        return np.array([
            [self.r * (1 - 2 * x / self.K) - self.q * y / d ** 2, -self.q * x / d],
            [self.c * self.q * y / d ** 2, self.c * self.q * x / d - self.mu - 2 * self.m * y],
        ])

    def time_factor(self, s, p):
        return 1 + p.a * s[0]

    def with_updates(self, **changes) -> "BazykinModel":
        return BazykinModel(**{**self.model_dump(), **changes})
