"""
Absorbing sets from a linear Lyapunov-like functional.

For each family a positive weight vector w is chosen so that predation terms
cancel in W = w . s; then W' + phi W <= rho for every phi up to the smallest
mortality, and every orbit eventually enters {W <= rho/phi}.
"""

from dataclasses import dataclass
from functools import singledispatch
from typing import Sequence

import numpy as np

from models.bazykin import BazykinModel
from models.competition import CompetitionModel
from models.predators import TwoPredatorDynamics
from models.prey import SymmetricTwoPreyModel, TwoPreyDynamics
from utils.exceptions import ParameterError, UnsupportedModelError


@dataclass(frozen=True)
class AbsorbingBound:
    weights: np.ndarray
    phi: float
    rho: float

    @property
    def bound(self) -> float:
        return self.rho / self.phi

    def functional(self, states: np.ndarray) -> np.ndarray:
        """W evaluated on one state or on a stack of states."""
        return np.asarray(states) @ self.weights

    def to_dict(self) -> dict:
        return {
            "weights": [float(w) for w in self.weights],
            "phi": float(self.phi),
            "rho": float(self.rho),
            "bound": float(self.bound),
        }


def _check_phi(phi: float, mortalities: Sequence[float]):
    ceiling = min(mortalities)
    if not 0 < phi <= ceiling:
        raise ParameterError("phi", phi, f"0 < phi <= {ceiling:.6g}")


def _check_crowding(*values: float):
    if any(v < 0 for v in values):
        raise ParameterError("m", min(values), "m >= 0 for an absorbing bound")


def _logistic_source(r: float, K: float, phi: float) -> float:
    """max over x >= 0 of (r + phi) x - r x^2/K."""
    return K * (r + phi) ** 2 / (4 * r)


@singledispatch
def absorbing_bound(model, phi: float) -> AbsorbingBound:
    raise UnsupportedModelError("absorbing_bound", getattr(model, "family", type(model).__name__))


@absorbing_bound.register
def _(model: CompetitionModel, phi: float) -> AbsorbingBound:
    if model.growth.kind != "logistic":
        raise UnsupportedModelError("absorbing_bound", f"competition/{model.growth.kind}")
    _check_phi(phi, model.mu)
    weights = np.concatenate([[1.0], 1.0 / np.array(model.c)])
    return AbsorbingBound(weights, phi, _logistic_source(model.r, model.K, phi))


@absorbing_bound.register
def _(model: TwoPredatorDynamics, phi: float) -> AbsorbingBound:
    p = model.params()
    _check_crowding(p.m1, p.m2)
    _check_phi(phi, (p.mu1, p.mu2))
    weights = np.array([1.0, 1.0 / p.c1, 1.0 / p.c2])
    return AbsorbingBound(weights, phi, _logistic_source(p.r, p.K, phi))


@absorbing_bound.register
def _(model: TwoPreyDynamics, phi: float) -> AbsorbingBound:
    p = model.params()
    _check_crowding(p.m)
    _check_phi(phi, (p.mu,))
    rho = p.c1 * _logistic_source(p.r1, p.K1, phi) + p.c2 * _logistic_source(p.r2, p.K2, phi)
    return AbsorbingBound(np.array([p.c1, p.c2, 1.0]), phi, rho)


@absorbing_bound.register
def _(model: SymmetricTwoPreyModel, phi: float) -> AbsorbingBound:
    p = model.params()
    _check_crowding(p.m)
    _check_phi(phi, (p.mu,))
    # prey growth r_i x (2 - x) is logistic with rate 2 r_i and capacity 2
    rho = p.c1 * (_logistic_source(2 * p.r1, 2.0, phi) + _logistic_source(2 * p.r2, 2.0, phi))
    return AbsorbingBound(np.array([p.c1, p.c1, 1.0]), phi, rho)


@absorbing_bound.register
def _(model: BazykinModel, phi: float) -> AbsorbingBound:
    _check_crowding(model.m)
    _check_phi(phi, (model.mu,))
    rho = model.c * _logistic_source(model.r, model.K, phi)
    return AbsorbingBound(np.array([model.c, 1.0]), phi, rho)
