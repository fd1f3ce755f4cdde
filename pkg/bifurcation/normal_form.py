"""
Normal-form coefficients at an equilibrium.

The field is polynomialised by its time factor, expanded to cubic order
around the equilibrium with sympy, and rewritten in an eigenbasis of the
Jacobian. The first Lyapunov coefficient and the quadratic approximation of
a one-dimensional center manifold are read off the transformed coefficients.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from analysis.equilibria import RESIDUAL_TOL
from models.predators import RescaledTwoPredatorModel
from utils.exceptions import DegenerateGeometryError, NotAnEquilibriumError, ParameterError
from utils.logging_config import log_function_call

logger = logging.getLogger(__name__)

L1_CONVENTIONS = ("tabulated", "frequency", "unit")


@singledispatch
def eigenvector_anchor(model) -> int:
    """Index of the eigenvector component scaled to 1 in the change of basis."""
    return -1


@eigenvector_anchor.register
def _(model: RescaledTwoPredatorModel) -> int:
    return 0


def time_scale(model, point: Sequence[float]) -> float:
    return model.polynomial_factor(point)


def _field_expressions(model, polynomial: bool):
    if polynomial:
        return model.symbolic_field()
    syms = sp.symbols(model.coordinate_names, real=True)
    return syms, list(model.rhs(syms, model.params(exact=True)))


def taylor_tensors(exprs, syms, point: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    First, second and third derivative tensors of `exprs` at `point`.

    T2[i, j, k] is d2 F_i / dx_j dx_k; both higher tensors are fully symmetric
    in their derivative indices.
    """
    n = len(syms)
    at = dict(zip(syms, (sp.Float(float(v), 30) for v in point)))
    J = np.zeros((n, n))
    T2 = np.zeros((n, n, n))
    T3 = np.zeros((n, n, n, n))
    for i, expr in enumerate(exprs):
        for j in range(n):
            first = sp.diff(expr, syms[j])
            J[i, j] = float(first.subs(at))
            for k in range(j, n):
                second = sp.diff(first, syms[k])
                value = float(second.subs(at))
                for a, b in {(j, k), (k, j)}:
                    T2[i, a, b] = value
                for l in range(k, n):
                    third = float(sp.diff(second, syms[l]).subs(at))
                    for a, b, c in set(itertools.permutations((j, k, l))):
                        T3[i, a, b, c] = third
    return J, T2, T3


def _normalised(v: np.ndarray, anchor: int = -1) -> np.ndarray:
    """Scale so component `anchor` is 1, or the first nonzero one when it vanishes."""
    scale = np.max(np.abs(v))
    if abs(v[anchor]) > 1e-10 * scale:
        return v / v[anchor]
    k = int(np.flatnonzero(np.abs(v) > 1e-10 * scale)[0])
    return v / v[k]


def eigenbasis(
    J: np.ndarray,
    center_eps: float,
    anchor: int = -1,
    orientation: int = 1,
) -> Tuple[np.ndarray, np.ndarray, bool]:
    """
    Change-of-basis matrix and the eigenvalues in its column order.

    With a complex pair the first two columns are Re w and Im w of the
    eigenvector of the pair member whose imaginary part has the sign of
    `orientation`, so the pair block is [[eps, omega], [-omega, eps]] with
    omega of that sign. Without one, center directions come first and the
    rest follow by increasing real part. Every column has component `anchor`
    equal to 1.
    """
    if orientation not in (1, -1):
        raise ParameterError("orientation", orientation, "1 or -1")
    values, vectors = np.linalg.eig(J)
    scale = max(1.0, float(np.max(np.abs(values))))
    has_pair = bool(np.any(values.imag > center_eps * scale))

    if has_pair:
        k = int(np.argmax(orientation * values.imag))
        w = _normalised(vectors[:, k], anchor)
        others = [i for i in range(values.size) if abs(values[i].imag) <= center_eps * scale]
        columns = [w.real, w.imag] + [_normalised(vectors[:, i].real, anchor) for i in others]
        ordered = np.array([values[k], values[k].conjugate(), *values[others]])
    else:
        real = values.real
        order = sorted(range(values.size), key=lambda i: (abs(real[i]) > center_eps * scale, real[i]))
        columns = [_normalised(vectors[:, i].real, anchor) for i in order]
        ordered = values[order]

    Q = np.column_stack(columns)
    if Q.shape[1] != J.shape[0] or np.linalg.cond(Q) > 1e12:
        raise DegenerateGeometryError("Jacobian is defective; no eigenbasis")
    return Q, ordered, has_pair


@dataclass
class NormalFormData:
    """Taylor data in original and eigen coordinates."""

    location: np.ndarray
    polynomial: bool
    scale: float
    jacobian: np.ndarray
    quadratic: np.ndarray
    cubic: np.ndarray
    Q: np.ndarray
    eigenvalues: np.ndarray
    has_pair: bool
    transformed_jacobian: np.ndarray
    transformed_quadratic: np.ndarray
    transformed_cubic: np.ndarray
    coordinate_names: Tuple[str, ...] = ()
    phi: Optional[Tuple[float, float, float]] = None

    @property
    def block_residual(self) -> float:
        """Distance of Q^-1 J Q from its expected block form, relative to |J|."""
        D = self.transformed_jacobian
        off = D.copy()
        start = 0
        if self.has_pair:
            off[:2, :2] = 0.0
            start = 2
            pair_error = max(abs(D[0, 0] - D[1, 1]), abs(D[0, 1] + D[1, 0]))
        else:
            pair_error = 0.0
        for i in range(start, D.shape[0]):
            off[i, i] = 0.0
        return float(max(np.max(np.abs(off)), pair_error) / max(1.0, np.max(np.abs(D))))

    def monomials(self, component: int, degree: int = 2, tol: float = 1e-12) -> Dict[str, float]:
        """Coefficients of the transformed field component by monomial, e.g. {"x*y": -1.02}."""
        if degree not in (2, 3):
            raise ParameterError("degree", degree, "2 or 3")
        tensor = self.transformed_quadratic if degree == 2 else self.transformed_cubic
        names = self.coordinate_names or tuple(f"s{i}" for i in range(self.Q.shape[0]))
        result = {}
        for idx in itertools.combinations_with_replacement(range(len(names)), degree):
            multiplicity = len(set(itertools.permutations(idx)))
            value = tensor[(component, *idx)] * multiplicity / math.factorial(degree)
            if abs(value) > tol:
                label = "*".join(
                    f"{names[i]}^{idx.count(i)}" if idx.count(i) > 1 else names[i]
                    for i in sorted(set(idx))
                )
                result[label] = float(value)
        return result

    def field(self, xi: Sequence[float], model) -> np.ndarray:
        """Full transformed field Q^-1 F(E + Q xi), in the same time scale as the coefficients."""
        s = self.location + self.Q @ np.asarray(xi, dtype=float)
        F = model.vector_field(s)
        if self.polynomial:
            F = F * model.polynomial_factor(s)
        return np.linalg.solve(self.Q, F)

    def to_dict(self) -> dict:
        return {
            "location": [float(v) for v in self.location],
            "polynomial": self.polynomial,
            "scale": self.scale,
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.eigenvalues],
            "Q": self.Q.tolist(),
            "block_residual": self.block_residual,
            "quadratic": [self.monomials(i, 2) for i in range(self.Q.shape[0])],
            "phi": list(self.phi) if self.phi is not None else None,
        }


@log_function_call
def diagonalize_at_equilibrium(
    model,
    point: Sequence[float],
    polynomial: bool = True,
    center_eps: float = 1e-6,
    orientation: int = 1,
) -> NormalFormData:
    """
    Translate, polynomialise and rewrite the field in an eigenbasis at `point`.

    Raises:
        NotAnEquilibriumError: the field does not vanish at `point`
        DegenerateGeometryError: defective Jacobian
    """
    location = model.check_state(point)
    residual = model.residual(location)
    if residual > RESIDUAL_TOL:
        raise NotAnEquilibriumError(location, residual, RESIDUAL_TOL)

    syms, exprs = _field_expressions(model, polynomial)
    J, T2, T3 = taylor_tensors(exprs, syms, location)
    Q, eigenvalues, has_pair = eigenbasis(J, center_eps, eigenvector_anchor(model), orientation)
    Qinv = np.linalg.inv(Q)

    data = NormalFormData(
        location=location,
        polynomial=polynomial,
        scale=time_scale(model, location) if polynomial else 1.0,
        jacobian=J,
        quadratic=T2,
        cubic=T3,
        Q=Q,
        eigenvalues=eigenvalues,
        has_pair=has_pair,
        transformed_jacobian=Qinv @ J @ Q,
        transformed_quadratic=np.einsum("ia,abc,bj,ck->ijk", Qinv, T2, Q, Q),
        transformed_cubic=np.einsum("ia,abcd,bj,ck,dl->ijkl", Qinv, T3, Q, Q, Q),
        coordinate_names=tuple(model.coordinate_names),
    )
    if data.block_residual > 1e-8:
        logger.warning(f"Eigenbasis block residual {data.block_residual:.3e}")
    return data


@dataclass
class LyapunovCoefficient:
    l1: float
    omega: float
    delta: Optional[float]
    convention: str
    data: NormalFormData = field(repr=False)

    @property
    def criticality(self) -> str:
        if self.l1 == 0:
            return "undecided"
        return "supercritical" if self.l1 < 0 else "subcritical"

    def to_dict(self) -> dict:
        return {
            "l1": self.l1,
            "omega": self.omega,
            "delta": self.delta,
            "convention": self.convention,
            "criticality": self.criticality,
            "phi": list(self.data.phi) if self.data.phi is not None else None,
        }


def _center_manifold_matrix(omega: float, hz: float, convention: str) -> np.ndarray:
    """Inverse of the phi system times Delta; the tabulated form has a zero (3, 2) entry."""
    tail = 0.0 if convention == "tabulated" else 2 * omega * hz
    return np.array([
        [2 * omega ** 2 + hz ** 2, -2 * omega * hz, 2 * omega ** 2],
        [omega * hz, hz ** 2, -omega * hz],
        [2 * omega ** 2, tail, 2 * omega ** 2 + hz ** 2],
    ])


@log_function_call
def first_lyapunov_coefficient(
    model,
    point: Sequence[float],
    convention: str = "tabulated",
    polynomial: bool = True,
) -> LyapunovCoefficient:
    """
    First Lyapunov coefficient at a Hopf equilibrium.

    In the eigenbasis the rotation plane is (x, y) and, in three dimensions,
    z is the real direction. The center manifold
    z = phi_xx x^2/2 + phi_xy x y + phi_yy y^2/2 enters the cubic terms;
    its coefficients come from a 3x3 system with determinant
    Delta = h_z (h_z^2 + 4 omega^2).

    Conventions:
        tabulated: basis from the eigenvalue with negative imaginary part,
            omega read as |omega| throughout, quadratic bracket over omega
            and the center-manifold inverse with its (3, 2) entry zero.
            The regression coefficient tables follow this form.
        frequency: basis from the eigenvalue with positive imaginary part and
            the quadratic bracket over omega; the textbook coefficient.
        unit: as frequency with the quadratic bracket unweighted.

    Raises:
        ParameterError: unknown convention
        DegenerateGeometryError: omega ~ 0 or Delta ~ 0
    """
    if convention not in L1_CONVENTIONS:
        raise ParameterError("convention", convention, f"one of {L1_CONVENTIONS}")
    orientation = -1 if convention == "tabulated" else 1
    data = diagonalize_at_equilibrium(model, point, polynomial, orientation=orientation)
    if not data.has_pair:
        raise DegenerateGeometryError("No complex eigenvalue pair; not a Hopf point")

    D, T2, T3 = data.transformed_jacobian, data.transformed_quadratic, data.transformed_cubic
    omega = float(D[0, 1])
    if abs(omega) < 1e-10 * max(1.0, np.max(np.abs(D))):
        raise DegenerateGeometryError("Frequency is zero; not a Hopf point")
    if convention == "tabulated":
        omega = abs(omega)

    def f(*idx):
        return T2[(0, *idx)] if len(idx) == 2 else T3[(0, *idx)]

    def g(*idx):
        return T2[(1, *idx)] if len(idx) == 2 else T3[(1, *idx)]

    cubic = f(0, 0, 0) + f(0, 1, 1) + g(0, 0, 1) + g(1, 1, 1)
    delta = None
    if D.shape[0] == 3:
        hz = float(D[2, 2])
        delta = hz * (hz ** 2 + 4 * omega ** 2)
        if abs(delta) < 1e-12 * max(1.0, abs(omega)) ** 3:
            raise DegenerateGeometryError("Center-manifold system is singular (Delta = 0)")
        source = -np.array([T2[2, 0, 0], T2[2, 0, 1], T2[2, 1, 1]])
        phi_xx, phi_xy, phi_yy = _center_manifold_matrix(omega, hz, convention) @ source / delta
        data.phi = (float(phi_xx), float(phi_xy), float(phi_yy))
        cubic += (
            3 * f(0, 2) * phi_xx
            + 2 * f(1, 2) * phi_xy + f(0, 2) * phi_yy
            + 2 * g(0, 2) * phi_xy + g(1, 2) * phi_xx
            + 3 * g(1, 2) * phi_yy
        )

    quadratic = (
        -f(0, 0) * f(0, 1) + g(1, 1) * g(0, 1) + g(0, 0) * g(0, 1)
        - f(1, 1) * f(0, 1) + f(0, 0) * g(0, 0) - f(1, 1) * g(1, 1)
    )
    weight = 1.0 if convention == "unit" else 1.0 / omega
    l1 = 3 * math.pi / (4 * omega) * (cubic + weight * quadratic)
    logger.debug(f"l1={l1:.9g} omega={omega:.6g} cubic={cubic:.6g} quadratic={quadratic:.6g}")
    return LyapunovCoefficient(l1=float(l1), omega=omega, delta=delta, convention=convention, data=data)


@dataclass
class CenterManifold:
    eigenvalues: np.ndarray
    coefficients: np.ndarray
    linear: np.ndarray
    quadratic: np.ndarray
    residuals: Dict[float, float]
    data: NormalFormData = field(repr=False)

    @property
    def residual_order(self) -> float:
        """Observed power of x in M_phi(x) from the two smallest sample radii."""
        radii = sorted(r for r in self.residuals if r > 0)
        small, large = radii[0], radii[1]
        return math.log(self.residuals[large] / self.residuals[small]) / math.log(large / small)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.eigenvalues],
            "coefficients": [float(v) for v in self.coefficients],
            "location": [float(v) for v in self.data.location],
            "linear": [float(v) for v in self.linear],
            "quadratic": [float(v) for v in self.quadratic],
            "residual_order": self.residual_order,
        }


@log_function_call
def center_manifold_quadratic(
    model,
    point: Sequence[float],
    center_eps: float = 1e-6,
    radii: Sequence[float] = (0.01, 0.02, 0.05, 0.1),
) -> CenterManifold:
    """
    Quadratic approximation y = H x^2 of a one-dimensional center manifold.

    In the eigenbasis x is the center direction with eigenvalue a and y the
    stable block B; matching x^2 terms gives (2a - B) H = g_xx/2. In original
    coordinates the manifold is E + q x + (Q_s H) x^2, reported as `linear`
    and `quadratic`. `residuals` holds |M_phi(x)| at +-r, maximised over sign.

    Raises:
        DegenerateGeometryError: the center subspace is not one-dimensional,
            or a non-center eigenvalue has nonnegative real part
    """
    data = diagonalize_at_equilibrium(model, point, center_eps=center_eps)
    values = data.eigenvalues
    scale = max(1.0, float(np.max(np.abs(values))))
    center = [i for i, v in enumerate(values) if abs(v.real) <= center_eps * scale]
    if len(center) != 1 or data.has_pair:
        raise DegenerateGeometryError(f"Center subspace has dimension {len(center)}, expected 1")
    if any(v.real >= 0 for i, v in enumerate(values) if i not in center):
        raise DegenerateGeometryError("Non-center eigenvalues are not all stable")

    D, T2 = data.transformed_jacobian, data.transformed_quadratic
    a = float(D[0, 0])
    B = D[1:, 1:]
    source = T2[1:, 0, 0] / 2
    H = np.linalg.solve(2 * a * np.eye(B.shape[0]) - B, source)

    def m_phi(x: float) -> float:
        xi = np.concatenate([[x], H * x * x])
        F = data.field(xi, model)
        return float(np.max(np.abs(2 * H * x * F[0] - F[1:])))

    residuals = {float(r): max(m_phi(r), m_phi(-r)) for r in radii}
    return CenterManifold(
        eigenvalues=values,
        coefficients=H,
        linear=data.Q[:, 0].copy(),
        quadratic=data.Q[:, 1:] @ H,
        residuals=residuals,
        data=data,
    )
