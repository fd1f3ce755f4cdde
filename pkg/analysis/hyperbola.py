"""
Geometry of the conic where the two prey isocline surfaces meet.

Eliminating the predator from the two prey equations leaves

    q2 (r1 (1 - x/K1) - alpha12 y)(1 + a1 x) = q1 (r2 (1 - y/K2) - alpha21 x)(1 + a2 y)

a hyperbola in the (x, y) plane. Its intersections with the axes and the
branch they lie on decide where positive equilibria can appear.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from analysis.isoclines import lv_competition_point
from models.prey import TwoPreyDynamics
from utils.exceptions import DegenerateGeometryError

logger = logging.getLogger(__name__)

ON_CURVE_TOL = 1e-9

CASES = ("no-Y-intersection", "P0P2-same-branch", "P0P1-same-branch")


@dataclass
class Conic:
    """A x^2 + B xy + C y^2 + D x + E y + F = 0."""

    A: float
    B: float
    C: float
    D: float
    E: float
    F: float

    def __call__(self, x: float, y: float) -> float:
        return self.A * x * x + self.B * x * y + self.C * y * y + self.D * x + self.E * y + self.F

    @property
    def discriminant(self) -> float:
        return self.B ** 2 - 4 * self.A * self.C

    @property
    def determinant(self) -> float:
        """Determinant of the 3x3 symmetric matrix; zero for a line pair."""
        return float(np.linalg.det(np.array([
            [self.A, self.B / 2, self.D / 2],
            [self.B / 2, self.C, self.E / 2],
            [self.D / 2, self.E / 2, self.F],
        ])))

    def scale(self) -> float:
        return max(abs(v) for v in (self.A, self.B, self.C, self.D, self.E, self.F)) or 1.0

    @property
    def degenerate(self) -> bool:
        s = self.scale()
        return self.discriminant <= 1e-12 * s * s or abs(self.determinant) <= 1e-12 * s ** 3

    @property
    def center(self) -> np.ndarray:
        return np.linalg.solve(
            np.array([[2 * self.A, self.B], [self.B, 2 * self.C]]),
            -np.array([self.D, self.E]),
        )

    def branch(self, point: Tuple[float, float]) -> int:
        """
        +1 or -1 according to the branch of the hyperbola containing `point`.

        In principal axes through the center the curve reads
        l1 u^2 + l2 v^2 = -F(center) with l1 > 0 > l2; the branches are the
        two half-planes u > 0, u < 0 when -F(center) > 0, otherwise v > 0, v < 0.
        """
        if self.degenerate:
            raise DegenerateGeometryError("Branches are undefined for a degenerate conic")
        c = self.center
        values, vectors = np.linalg.eigh(np.array([[self.A, self.B / 2], [self.B / 2, self.C]]))
        # eigh sorts ascending: values[1] > 0 > values[0]
        level = -self(c[0], c[1])
        axis = vectors[:, 1] if level > 0 else vectors[:, 0]
        return 1 if float(axis @ (np.asarray(point) - c)) > 0 else -1


def isocline_conic(model: TwoPreyDynamics) -> Conic:
    p = model.params()
    return Conic(
        A=-p.q2 * p.a1 * p.r1 / p.K1,
        B=-p.q2 * p.a1 * p.alpha12 + p.q1 * p.a2 * p.alpha21,
        C=p.q1 * p.a2 * p.r2 / p.K2,
        D=p.q2 * (p.a1 * p.r1 - p.r1 / p.K1) + p.q1 * p.alpha21,
        E=-p.q2 * p.alpha12 - p.q1 * (p.a2 * p.r2 - p.r2 / p.K2),
        F=p.q2 * p.r1 - p.q1 * p.r2,
    )


def _positive_real_roots(coefficients) -> List[float]:
    coefficients = np.trim_zeros(np.asarray(coefficients, dtype=float), "f")
    if coefficients.size < 2:
        return []
    roots = np.roots(coefficients)
    real = [float(r.real) for r in roots if abs(r.imag) <= 1e-12 * max(1.0, abs(r.real))]
    return sorted(r for r in real if r > 0)


def x_axis_quadratic(model: TwoPreyDynamics) -> np.ndarray:
    """Coefficients of the quadratic whose positive root is x_H."""
    p = model.params()
    return np.array([
        p.a1 * p.q2 * p.r1,
        (1 - p.a1 * p.K1) * p.q2 * p.r1 - p.K1 * p.q1 * p.alpha21,
        p.K1 * (p.q1 * p.r2 - p.q2 * p.r1),
    ])


def y_axis_quadratic(model: TwoPreyDynamics) -> np.ndarray:
    """Coefficients of the quadratic whose positive roots are the ordinates of P0 and P2."""
    p = model.params()
    return np.array([
        p.a2 * p.q1 * p.r2,
        (1 - p.a2 * p.K2) * p.q1 * p.r2 - p.K2 * p.q2 * p.alpha12,
        p.K2 * (p.q2 * p.r1 - p.q1 * p.r2),
    ])


@dataclass
class HyperbolaGeometry:
    conic: Conic
    P: Optional[Tuple[float, float]]
    P_positive: bool
    P1: Optional[Tuple[float, float]] = None
    P0: Optional[Tuple[float, float]] = None
    P2: Optional[Tuple[float, float]] = None
    degenerate: bool = False
    case: Optional[str] = None
    residuals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def point(v):
            return None if v is None else [float(v[0]), float(v[1])]

        return {
            "coefficients": [self.conic.A, self.conic.B, self.conic.C, self.conic.D, self.conic.E, self.conic.F],
            "P": point(self.P),
            "P_positive": self.P_positive,
            "P1": point(self.P1),
            "P0": point(self.P0),
            "P2": point(self.P2),
            "degenerate": self.degenerate,
            "case": self.case,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }


def hyperbola(model: TwoPreyDynamics) -> HyperbolaGeometry:
    """
    Axis intersections, competition point and case of the isocline hyperbola.

    The case is decided only under the ordering r1/q1 >= r2/q2 (which puts
    exactly one intersection on the positive x axis); otherwise `case` is None.
    """
    p = model.params()
    conic = isocline_conic(model)
    geometry = HyperbolaGeometry(conic=conic, P=None, P_positive=False, degenerate=conic.degenerate)

    lv = lv_competition_point(p.r1, p.K1, p.r2, p.K2, p.alpha12, p.alpha21)
    if lv is not None:
        geometry.P = lv
        geometry.P_positive = lv[0] > 0 and lv[1] > 0

    x_roots = _positive_real_roots(x_axis_quadratic(model))
    inside = [x for x in x_roots if x < p.K1]
    if x_roots:
        geometry.P1 = ((inside or x_roots)[0], 0.0)

    y_roots = _positive_real_roots(y_axis_quadratic(model))
    if len(y_roots) >= 2:
        geometry.P0, geometry.P2 = (0.0, y_roots[0]), (0.0, y_roots[-1])
    elif len(y_roots) == 1:
        geometry.P2 = (0.0, y_roots[0])

    scale = conic.scale()
    for name in ("P", "P1", "P0", "P2"):
        point = getattr(geometry, name)
        if point is not None:
            residual = abs(conic(*point)) / scale
            geometry.residuals[name] = residual
            if residual > ON_CURVE_TOL:
                logger.warning(f"{name}={point} misses the isocline conic by {residual:.3e}")

    if geometry.degenerate:
        logger.warning("Isocline conic is degenerate; case not classified")
        return geometry
    if p.r1 * p.q2 < p.r2 * p.q1:
        logger.info("r1/q1 < r2/q2: case classification assumes the opposite ordering")
        return geometry

    if geometry.P0 is None:
        geometry.case = "no-Y-intersection"
    elif conic.branch(geometry.P0) == conic.branch(geometry.P2):
        geometry.case = "P0P2-same-branch"
    else:
        geometry.case = "P0P1-same-branch"
        if geometry.P1 is not None and conic.branch(geometry.P0) != conic.branch(geometry.P1):
            logger.warning("P0 lies on neither the branch of P2 nor that of P1")
    return geometry
