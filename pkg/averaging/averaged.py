"""
First-order averaging of the linear part at a zero-Hopf equilibrium.

With the equilibrium moved to the origin and x = rho cos(theta),
y = rho sin(theta), the linear field gives

    rho' = x' cos(theta) + y' sin(theta) =: F1(theta; rho, z)
    z'   =: F2(theta; rho, z)

Taking theta as the independent variable and averaging F1, F2 over a period
gives a planar system whose simple zero at (rho, z) = (0, 0) marks a periodic
orbit; the signs of its Jacobian decide the orbit's stability.

The symmetric two-prey family is rejected: at its printed (c1, m) the
nonzero eigenvalues are a real pair, so there is no rotation to average.
"""

import logging
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson

from bifurcation.thresholds import BifurcationPoint, zero_hopf_ch4, zero_hopf_symmetric
from models.prey import CanonicalTwoPreyModel, SymmetricTwoPreyModel
from utils.exceptions import DegenerateGeometryError, ParameterError, TheoremPreconditionError, UnsupportedModelError

logger = logging.getLogger(__name__)

QUADRATURE_TOL = 1e-8
DEGENERATE_TOL = 1e-10


@singledispatch
def linear_part(model) -> np.ndarray:
    """Matrix whose cylindrical form is averaged."""
    raise UnsupportedModelError("average", getattr(model, "family", type(model).__name__))


@linear_part.register
def _(model: CanonicalTwoPreyModel) -> np.ndarray:
    return model.jacobian(model.equilibrium)


@singledispatch
def closed_form(model) -> Tuple[float, float]:
    raise UnsupportedModelError("average", getattr(model, "family", type(model).__name__))


@closed_form.register
def _(model: CanonicalTwoPreyModel) -> Tuple[float, float]:
    return (-model.r1 + model.r2 * (2 - 3 / model.K2)) / 20, -model.m


@singledispatch
def zero_hopf_reference(model) -> BifurcationPoint:
    raise UnsupportedModelError("average", getattr(model, "family", type(model).__name__))


@zero_hopf_reference.register
def _(model: CanonicalTwoPreyModel) -> BifurcationPoint:
    return zero_hopf_ch4(model.r1, model.r2, model.K2)


@zero_hopf_reference.register
def _(model: SymmetricTwoPreyModel) -> BifurcationPoint:
    return zero_hopf_symmetric(model.r1, model.r2)


@singledispatch
def require_rotation(model):
    """Raise when the family's zero-Hopf reference point has no complex pair."""


@require_rotation.register
def _(model: SymmetricTwoPreyModel):
    point = zero_hopf_symmetric(model.r1, model.r2)
    if point.kind != "zero-hopf":
        raise TheoremPreconditionError(
            f"complex pair at (c1, m) = (2/3, -2 (r1 + r2)/3); the spectrum there is "
            f"{{0, +-{abs(point.pair):.6g}}}, a zero-saddle"
        )


def zero_hopf_distance(model) -> float:
    """Largest relative deviation of (c1, m) from the family's zero-Hopf values."""
    reference = zero_hopf_reference(model).params
    gaps = [
        abs(getattr(model, name) - reference[name]) / max(abs(reference[name]), 1e-12)
        for name in ("c1", "m")
    ]
    return max(gaps)


def _integrands(L: np.ndarray, theta: np.ndarray, rho: float, z: float) -> Tuple[np.ndarray, np.ndarray]:
    cos, sin = np.cos(theta), np.sin(theta)
    v = np.vstack([rho * cos, rho * sin, np.full_like(theta, z)])
    dx, dy, dz = L @ v
    return dx * cos + dy * sin, dz


@dataclass
class AveragedSystem:
    """
    Averaged planar field f(rho, z) = jacobian @ (rho, z).

    `jacobian` comes from quadrature; `closed_form` holds the analytic
    diagonal for comparison.
    """

    family: str
    jacobian: np.ndarray
    closed_form: Tuple[float, float]
    linear: np.ndarray = field(repr=False)
    nodes: int = 1025
    distance: Optional[float] = None

    @property
    def f1_rho_coefficient(self) -> float:
        return float(self.jacobian[0, 0])

    @property
    def f2_z_coefficient(self) -> float:
        return float(self.jacobian[1, 1])

    @property
    def quadrature_gap(self) -> float:
        diagonal = np.diag(self.jacobian)
        return float(np.max(np.abs(diagonal - np.asarray(self.closed_form))))

    @property
    def off_diagonal(self) -> float:
        return float(max(abs(self.jacobian[0, 1]), abs(self.jacobian[1, 0])))

    def f1(self, rho: float, z: float) -> float:
        return float(self.jacobian[0] @ (rho, z))

    def f2(self, rho: float, z: float) -> float:
        return float(self.jacobian[1] @ (rho, z))

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "f1_rho_coefficient": self.f1_rho_coefficient,
            "f2_z_coefficient": self.f2_z_coefficient,
            "closed_form": list(self.closed_form),
            "quadrature_gap": self.quadrature_gap,
            "off_diagonal": self.off_diagonal,
            "nodes": self.nodes,
            "zero_hopf_distance": self.distance,
        }


def average(
    model,
    require_near: bool = True,
    tolerance: float = 0.01,
    nodes: int = 1025,
) -> AveragedSystem:
    """
    Average the cylindrical linear field of a two-prey zero-Hopf family.

    Args:
        model: CanonicalTwoPreyModel
        require_near: reject (c1, m) further than `tolerance` (relative) from
            the zero-Hopf values; with False the distance is not computed
        nodes: Simpson nodes on [0, 2 pi], odd

    Raises:
        UnsupportedModelError: other families
        ParameterError: parameters too far from the zero-Hopf point, or bad nodes
        TheoremPreconditionError: the rates admit no zero-Hopf point, or the
            family's zero-Hopf point is a zero-saddle
    """
    require_rotation(model)
    L = linear_part(model)
    if nodes < 3 or nodes % 2 == 0:
        raise ParameterError("nodes", nodes, "odd and >= 3")

    distance = None
    if require_near:
        distance = zero_hopf_distance(model)
        if distance > tolerance:
            raise ParameterError(
                "(c1, m)", (model.c1, model.m),
                f"relative distance {distance:.3g} to the zero-Hopf point <= {tolerance}",
            )

    theta = np.linspace(0.0, 2 * np.pi, nodes)
    jacobian = np.empty((2, 2))
    for column, (rho, z) in enumerate(((1.0, 0.0), (0.0, 1.0))):
        F1, F2 = _integrands(L, theta, rho, z)
        jacobian[0, column] = simpson(F1, x=theta) / (2 * np.pi)
        jacobian[1, column] = simpson(F2, x=theta) / (2 * np.pi)

    result = AveragedSystem(
        family=model.family,
        jacobian=jacobian,
        closed_form=closed_form(model),
        linear=L,
        nodes=nodes,
        distance=distance,
    )
    scale = max(1.0, float(np.max(np.abs(result.closed_form))))
    if result.quadrature_gap > QUADRATURE_TOL * scale:
        logger.warning(
            f"Averaged coefficients {np.diag(jacobian)} differ from closed form "
            f"{result.closed_form} by {result.quadrature_gap:.3e}"
        )
    return result


@dataclass
class OrbitPrediction:
    exists: bool
    stable: bool
    averaged: AveragedSystem
    rate_condition: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "exists": self.exists,
            "stable": self.stable,
            "rate_condition": self.rate_condition,
            "averaged": self.averaged.to_dict(),
        }


@singledispatch
def _rate_condition(model) -> Optional[bool]:
    return None


@_rate_condition.register
def _(model: CanonicalTwoPreyModel) -> Optional[bool]:
    return model.r1 > model.r2 * (2 - 3 / model.K2)


def periodic_orbit_prediction(
    model,
    require_near: bool = True,
    tolerance: float = 0.01,
    nodes: int = 1025,
) -> OrbitPrediction:
    """
    Periodic orbit near the equilibrium and its stability from the averaged Jacobian.

    The orbit exists when both averaged coefficients are nonzero and is stable
    exactly when both are negative. `rate_condition` is r1 > r2 (2 - 3/K2)
    for the canonical family, the sign condition on the rho coefficient alone.

    Raises:
        DegenerateGeometryError: an averaged coefficient vanishes
    """
    averaged = average(model, require_near=require_near, tolerance=tolerance, nodes=nodes)
    scale = max(1.0, float(np.max(np.abs(averaged.linear))))
    coefficients = (averaged.f1_rho_coefficient, averaged.f2_z_coefficient)
    if min(abs(c) for c in coefficients) < DEGENERATE_TOL * scale:
        raise DegenerateGeometryError(
            f"Averaged Jacobian diag{coefficients} is singular; no isolated periodic orbit"
        )
    stable = all(c < 0 for c in coefficients)
    prediction = OrbitPrediction(True, stable, averaged, _rate_condition(model))
    logger.info(
        f"{model.family}: averaged diag({coefficients[0]:.6g}, {coefficients[1]:.6g}) "
        f"-> {'stable' if stable else 'unstable'} periodic orbit"
    )
    return prediction


def cylindrical_rates(
    model,
    states: np.ndarray,
    center: Sequence[float],
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    rho, theta, rho' and theta' of the (x, y) projection around `center`.

    Uses the full vector field, rho' = x' cos + y' sin and
    theta' = (y' cos - x' sin)/rho; theta' is nan where rho = 0.
    """
    states = np.atleast_2d(np.asarray(states, dtype=float))
    offsets = states[:, :2] - np.asarray(center, dtype=float)[:2]
    rho = np.hypot(offsets[:, 0], offsets[:, 1])
    theta = np.arctan2(offsets[:, 1], offsets[:, 0])
    rates = np.array([model.vector_field(s)[:2] for s in states])
    cos, sin = np.cos(theta), np.sin(theta)
    rho_dot = rates[:, 0] * cos + rates[:, 1] * sin
    with np.errstate(divide="ignore", invalid="ignore"):
        theta_dot = np.where(rho > 0, (rates[:, 1] * cos - rates[:, 0] * sin) / rho, np.nan)
    return rho, theta, rho_dot, theta_dot
