"""
Resource with competing consumers: equilibrium, its sensitivity to the
competition matrix, and a global stability certificate.

The positive equilibrium reduces to a scalar balance

    h(x) = q M^{-1} (x kappa - mu) - r g(x) = 0,    y* = M^{-1} (x* kappa - mu)

with kappa_i = c_i q_i. Indices of competition coefficients are 1-based, as
in m_ij.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from analysis.isoclines import resource_roots, subset_balance
from models.competition import CompetitionModel
from utils.exceptions import DegenerateGeometryError, NoPositiveEquilibriumError, ParameterError

logger = logging.getLogger(__name__)

ROOT_SAMPLES = 400


def balance_vector(M: Sequence[Sequence[float]], q: Sequence[float]) -> np.ndarray:
    """
    Solve M alpha = q; entries may be negative.

    Raises:
        ParameterError: M is singular
    """
    matrix = np.asarray(M, dtype=float)
    try:
        return np.linalg.solve(matrix, np.asarray(q, dtype=float))
    except np.linalg.LinAlgError as e:
        raise ParameterError("M", matrix.tolist(), "det(M) != 0") from e


@dataclass
class ResourceRoot:
    x: float
    y: np.ndarray

    @property
    def positive(self) -> bool:
        return bool(self.x > 0 and np.all(self.y > 0))

    def to_dict(self) -> dict:
        return {"x": self.x, "y": [float(v) for v in self.y], "positive": self.positive}


@dataclass
class ResourceEquilibrium:
    x_star: float
    y_star: np.ndarray
    roots: List[ResourceRoot] = field(default_factory=list)

    @property
    def state(self) -> np.ndarray:
        return np.concatenate([[self.x_star], self.y_star])

    def to_dict(self) -> dict:
        return {
            "x_star": self.x_star,
            "y_star": [float(v) for v in self.y_star],
            "roots": [r.to_dict() for r in self.roots],
        }


def _check_invertible(model: CompetitionModel):
    if abs(np.linalg.det(model.matrix)) < 1e-14:
        raise ParameterError("M", model.M, "det(M) != 0")


def resource_equilibrium(model: CompetitionModel, samples: int = ROOT_SAMPLES) -> ResourceEquilibrium:
    """
    Positive equilibrium from the roots of the balance function on (0, K].

    Every root is reported with its consumer vector; the first one with all
    consumers positive is the equilibrium.

    Raises:
        ParameterError: M is singular
        NoPositiveEquilibriumError: no root gives positive consumers
    """
    _check_invertible(model)
    h, y_of = subset_balance(model, range(model.n))
    roots = [ResourceRoot(x, y_of(x)) for x in resource_roots(h, model.K, samples)]
    for root in roots:
        if root.positive:
            return ResourceEquilibrium(root.x, root.y, roots)
    raise NoPositiveEquilibriumError(
        f"Balance function has {len(roots)} root(s) on (0, K] and none with all consumers positive"
    )


def balance_derivative(model: CompetitionModel, x: float) -> float:
    """h'(x) = q M^{-1} kappa - r g'(x)."""
    row = np.linalg.solve(model.matrix.T, np.array(model.q))
    return float(row @ model.kappa - model.r * model.growth.derivative(x))


def _check_index(model: CompetitionModel, i: int, j: int):
    for name, value in (("i", i), ("j", j)):
        if not 1 <= value <= model.n:
            raise ParameterError(name, value, f"1 <= {name} <= {model.n}")


def sensitivity(model: CompetitionModel, i: int, j: int, equilibrium: Optional[ResourceEquilibrium] = None) -> float:
    """
    Derivative of the resource equilibrium x* with respect to m_ij.

    Differentiating h(x*; M) = 0 gives (q M^{-1})_i y_j* / h'(x*).

    Raises:
        DegenerateGeometryError: h'(x*) = 0
    """
    _check_index(model, i, j)
    eq = equilibrium or resource_equilibrium(model)
    slope = balance_derivative(model, eq.x_star)
    if abs(slope) < 1e-14:
        raise DegenerateGeometryError(f"h'(x*) vanishes at x*={eq.x_star:.9g}")
    row = np.linalg.solve(model.matrix.T, np.array(model.q))
    return float(row[i - 1] * eq.y_star[j - 1] / slope)


def sensitivity_matrix(model: CompetitionModel) -> np.ndarray:
    eq = resource_equilibrium(model)
    n = model.n
    return np.array([[sensitivity(model, i, j, eq) for j in range(1, n + 1)] for i in range(1, n + 1)])


def with_entry(model: CompetitionModel, i: int, j: int, value: float) -> CompetitionModel:
    M = [list(row) for row in model.M]
    M[i - 1][j - 1] = value
    return CompetitionModel(**{**model.model_dump(), "M": M})


def finite_difference_sensitivity(model: CompetitionModel, i: int, j: int, delta: float = 1e-5) -> float:
    """Central difference of x* under m_ij +/- delta; one-sided second order at m_ij < delta."""
    _check_index(model, i, j)
    m = model.M[i - 1][j - 1]
    if m - delta < 0:
        x0, x1, x2 = (resource_equilibrium(with_entry(model, i, j, m + k * delta)).x_star for k in range(3))
        return (-3 * x0 + 4 * x1 - x2) / (2 * delta)
    forward = resource_equilibrium(with_entry(model, i, j, m + delta)).x_star
    backward = resource_equilibrium(with_entry(model, i, j, m - delta)).x_star
    return (forward - backward) / (2 * delta)


def symmetrized_matrix(M: Sequence[Sequence[float]], c: Sequence[float]) -> np.ndarray:
    """L_c(M): entries (m_ij/c_i + m_ji/c_j)/2, diagonal m_ii/c_i."""
    weighted = np.asarray(M, dtype=float) / np.asarray(c, dtype=float)[:, None]
    return (weighted + weighted.T) / 2


@dataclass
class StabilityCertificate:
    Lc: np.ndarray
    min_eigenvalue: float
    am_gm: Optional[bool] = None

    @property
    def positive_definite(self) -> bool:
        return self.min_eigenvalue > 0

    def to_dict(self) -> dict:
        return {
            "positive_definite": self.positive_definite,
            "min_eigenvalue": self.min_eigenvalue,
            "Lc": self.Lc.tolist(),
            "am_gm": self.am_gm,
        }


def global_stability_certificate(model: CompetitionModel) -> StabilityCertificate:
    """
    Positive definiteness of L_c(M), which makes the positive equilibrium
    globally stable when it exists. For two consumers the equivalent
    inequality (c2 m12 + c1 m21)/2 < sqrt(c1 m11 c2 m22) is also evaluated.
    """
    Lc = symmetrized_matrix(model.M, model.c)
    smallest = float(np.linalg.eigvalsh(Lc).min())
    am_gm = None
    if model.n == 2:
        (m11, m12), (m21, m22) = model.M
        c1, c2 = model.c
        am_gm = (c2 * m12 + c1 * m21) / 2 < math.sqrt(c1 * m11 * c2 * m22)
        if am_gm != (smallest > 0):
            logger.warning(f"Two-consumer inequality ({am_gm}) disagrees with the eigenvalue test ({smallest:.3e})")
    return StabilityCertificate(Lc=Lc, min_eigenvalue=smallest, am_gm=am_gm)


@dataclass
class ThirdConsumerInvasion:
    lhs: float
    rhs: float
    Lc: np.ndarray
    min_eigenvalue: float

    @property
    def holds(self) -> bool:
        return self.lhs > self.rhs

    @property
    def consistent(self) -> bool:
        return self.holds == (self.min_eigenvalue > 0)

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "min_eigenvalue": self.min_eigenvalue,
            "consistent": self.consistent,
        }


def third_consumer_invasion(
    model: CompetitionModel, c3: float, m13: float, m31: float, m23: float, m32: float, m33: float,
) -> ThirdConsumerInvasion:
    """
    Whether a third consumer keeps the stability certificate of a two-consumer
    community: the determinant condition of the extended L_c(M), written so
    that intraspecific competition m33 and the cross terms appear explicitly.
    """
    if model.n != 2:
        raise ParameterError("n", model.n, "exactly two resident consumers")
    if not (c3 > 0 and m33 > 0):
        raise ParameterError("c3, m33", (c3, m33), "c3 > 0 and m33 > 0")
    (m11, m12), (m21, m22) = model.M
    c1, c2 = model.c
    u = m12 / c1 + m21 / c2
    v = m13 / c1 + m31 / c3
    w = m23 / c2 + m32 / c3
    lhs = 4 * m11 * m22 / (c1 * c2) - u ** 2
    rhs = c3 / m33 * (m11 / c1 * w ** 2 + m22 / c2 * v ** 2 - u * v * w)

    M3 = [[m11, m12, m13], [m21, m22, m23], [m31, m32, m33]]
    Lc = symmetrized_matrix(M3, [c1, c2, c3])
    return ThirdConsumerInvasion(lhs=lhs, rhs=rhs, Lc=Lc, min_eigenvalue=float(np.linalg.eigvalsh(Lc).min()))


@dataclass
class CoexistenceVerdict:
    member: bool
    reasons: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"member": self.member, "reasons": self.reasons}


def coexistence_membership(model: CompetitionModel) -> CoexistenceVerdict:
    """
    Pointwise test for the stable coexistence region: a positive equilibrium,
    every sensitivity positive, and a positive definite L_c(M).
    """
    reasons = []
    try:
        eq = resource_equilibrium(model)
    except ParameterError:
        return CoexistenceVerdict(False, ["competition matrix is singular"])
    except NoPositiveEquilibriumError:
        return CoexistenceVerdict(False, ["no positive equilibrium"])

    n = model.n
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            try:
                value = sensitivity(model, i, j, eq)
            except DegenerateGeometryError:
                reasons.append("h'(x*) = 0")
                break
            if not value > 0:
                reasons.append(f"dx*/dm{i}{j} = {value:.6g} <= 0")

    if not global_stability_certificate(model).positive_definite:
        reasons.append("L_c(M) is not positive definite")
    return CoexistenceVerdict(not reasons, reasons)


@dataclass
class LyapunovFunction:
    """
    V(s) = (x - x* - x* ln(x/x*)) + sum_i (y_i - y_i* - y_i* ln(y_i/y_i*))/c_i

    on the open positive orthant; V' <= 0 along orbits when L_c(M) is positive
    definite and the growth law is decreasing.
    """

    model: CompetitionModel
    equilibrium: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate([[1.0], 1 / np.array(self.model.c)])

    def value(self, s: Sequence[float]) -> float:
        s = self.model.check_state(s)
        e = self.equilibrium
        return float(self.weights @ (s - e - e * np.log(s / e)))

    def derivative(self, s: Sequence[float]) -> float:
        s = self.model.check_state(s)
        gradient = self.weights * (1 - self.equilibrium / s)
        return float(gradient @ self.model.vector_field(s))


def lyapunov_function(model: CompetitionModel) -> LyapunovFunction:
    return LyapunovFunction(model, resource_equilibrium(model).state)


def sweep_competition(
    model: CompetitionModel,
    entries: Tuple[Tuple[int, int], Tuple[int, int]],
    values: Tuple[Sequence[float], Sequence[float]],
) -> List[dict]:
    """
    Equilibrium over a grid of two competition coefficients, row-major.

    Cells without a positive equilibrium carry x_star None.
    """
    (i1, j1), (i2, j2) = entries
    rows = []
    for v1 in values[0]:
        for v2 in values[1]:
            cell = with_entry(with_entry(model, i1, j1, v1), i2, j2, v2)
            row = {f"m{i1}{j1}": float(v1), f"m{i2}{j2}": float(v2)}
            try:
                eq = resource_equilibrium(cell)
                row.update({"x_star": eq.x_star, **{f"y{k + 1}": float(y) for k, y in enumerate(eq.y_star)}})
            except NoPositiveEquilibriumError:
                row.update({"x_star": None})
            rows.append(row)
    return rows
