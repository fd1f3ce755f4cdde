"""
Equilibria of every model family: enumeration, polishing and classification.

Boundary equilibria come from the reduced systems on each face and positive
equilibria from isocline reductions of the interior equations. Every candidate
is polished by damped Newton on the coordinates it leaves free, so zero
coordinates stay exactly zero, and then classified from the spectrum of the
analytic Jacobian.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from analysis.isoclines import (
    lv_competition_point,
    predator_prey_face,
    predator_threshold,
    resource_roots,
    subset_balance,
    symmetric_face,
    two_predator_interior,
)
from models.bazykin import BazykinModel
from models.competition import CompetitionModel
from models.predators import TwoPredatorDynamics
from models.prey import SymmetricTwoPreyModel, TwoPreyDynamics
from utils.exceptions import (
    ConvergenceError,
    NotAnEquilibriumError,
    NumericalError,
    ParameterError,
    UnsupportedModelError,
)

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8


@dataclass
class EnergyThresholds:
    """
    Energy-efficiency thresholds keyed by coordinate name.

    For the competition family the key is the consumer; for the two-predator
    family the predator; for the two-prey family the prey the predator eats.
    A value of None means the consumer cannot persist at any prey density.
    """

    values: Dict[str, Optional[float]]

    @property
    def viable(self) -> Dict[str, bool]:
        return {name: value is not None for name, value in self.values.items()}

    def to_dict(self) -> dict:
        return {"values": dict(self.values), "viable": self.viable}


@dataclass
class EquilibriumReport:
    location: np.ndarray
    eigenvalues: np.ndarray
    type: str
    stable: str
    coordinate_names: Tuple[str, ...]
    characteristic: np.ndarray = field(default_factory=lambda: np.zeros(0))
    hurwitz: List[float] = field(default_factory=list)
    residual: float = 0.0
    label: str = ""

    @property
    def boundary_pattern(self) -> Tuple[str, ...]:
        """Names of the coordinates that vanish."""
        return tuple(name for name, v in zip(self.coordinate_names, self.location) if v == 0.0)

    @property
    def is_positive(self) -> bool:
        return bool(np.all(self.location > 0))

    @property
    def hyperbolic(self) -> bool:
        return self.type != "non-hyperbolic"

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "location": [float(v) for v in self.location],
            "boundary_pattern": list(self.boundary_pattern),
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.eigenvalues],
            "type": self.type,
            "stable": self.stable,
            "characteristic": [float(v) for v in self.characteristic],
            "hurwitz": [float(v) for v in self.hurwitz],
            "residual": float(self.residual),
        }


def routh_hurwitz(coefficients: Sequence[float]) -> List[float]:
    """
    Leading principal minors of the Hurwitz matrix of a0 s^n + a1 s^(n-1) + ... + an.

    With a0 > 0, all roots lie in the open left half-plane iff every returned
    determinant is positive. For a monic cubic s^3 + O2 s^2 + O1 s + O0 the
    list is (O2, O2 O1 - O0, O0 (O2 O1 - O0)).
    """
    a = np.asarray(coefficients, dtype=float)
    n = a.size - 1
    if n < 1:
        return []

    def coeff(k):
        return a[k] if 0 <= k <= n else 0.0

    H = np.array([[coeff(2 * (j + 1) - (i + 1)) for j in range(n)] for i in range(n)])
    return [float(np.linalg.det(H[:k, :k])) for k in range(1, n + 1)]


def _spectrum_type(eigenvalues: np.ndarray, eps: float) -> Tuple[str, str]:
    real = eigenvalues.real
    if np.any(real > eps):
        stable = "unstable"
    elif np.any(np.abs(real) <= eps):
        stable = "undecided"
    else:
        stable = "stable"

    if np.any(np.abs(real) <= eps):
        return "non-hyperbolic", stable

    complex_pair = np.any(np.abs(eigenvalues.imag) > eps)
    mixed = np.any(real > 0) and np.any(real < 0)
    if mixed:
        return ("saddle-focus" if complex_pair else "saddle"), stable
    return ("focus" if complex_pair else "node"), stable


def _sorted_spectrum(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    return values[np.lexsort((values.imag, values.real))]


def polish(model, point: Sequence[float], max_iter: int = 50, tol: float = 1e-13) -> np.ndarray:
    """
    Damped Newton refinement of an approximate equilibrium.

    Coordinates that are exactly zero are held fixed; the step on the free
    coordinates is halved until the residual decreases.

    Raises:
        ConvergenceError: residual still above RESIDUAL_TOL after max_iter steps
    """
    s = model.check_state(point).copy()
    free = np.flatnonzero(s != 0.0)
    residual = model.residual(s)
    if free.size == 0:
        return s

    for _ in range(max_iter):
        if residual < tol:
            break
        F = model.vector_field(s)[free]
        J = model.jacobian(s)[np.ix_(free, free)]
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        damping = 1.0
        while damping > 1e-6:
            trial = s.copy()
            trial[free] += damping * step
            trial_residual = model.residual(trial) if np.all(np.isfinite(trial)) else np.inf
            if trial_residual < residual:
                s, residual = trial, trial_residual
                break
            damping /= 2
        else:
            break

    if residual > RESIDUAL_TOL:
        raise ConvergenceError("Newton polish", max_iter, residual)
    return s


def classify(
    model,
    point: Sequence[float],
    hyperbolicity_eps: float = 1e-6,
    accept_tol: float = 1e-4,
    label: str = "",
    max_iter: int = 50,
) -> EquilibriumReport:
    """
    Spectrum, Routh-Hurwitz data and stability verdict at an equilibrium.

    `point` only needs to be an equilibrium to `accept_tol` (values copied from
    a table, say); it is polished before the Jacobian is evaluated.

    Raises:
        NotAnEquilibriumError: residual at `point` exceeds accept_tol
    """
    s = model.check_state(point)
    initial = model.residual(s)
    if initial > accept_tol:
        raise NotAnEquilibriumError(s, initial, accept_tol)
    try:
        s = polish(model, s, max_iter=max_iter)
    except ConvergenceError as e:
        raise NotAnEquilibriumError(s, initial, accept_tol) from e

    J = model.jacobian(s)
    eigenvalues = _sorted_spectrum(np.linalg.eigvals(J))
    characteristic = np.real(np.poly(J))
    kind, stable = _spectrum_type(eigenvalues, hyperbolicity_eps)
    return EquilibriumReport(
        location=s,
        eigenvalues=eigenvalues,
        type=kind,
        stable=stable,
        coordinate_names=tuple(model.coordinate_names),
        characteristic=characteristic,
        hurwitz=routh_hurwitz(characteristic),
        residual=model.residual(s),
        label=label,
    )


def merge_points(points: Sequence[np.ndarray], tol: float) -> List[np.ndarray]:
    merged: List[np.ndarray] = []
    for p in points:
        if all(np.max(np.abs(p - other)) > tol for other in merged):
            merged.append(np.asarray(p, dtype=float))
    return sorted(merged, key=tuple)


def _classify_all(
    model,
    candidates: Sequence[Tuple[str, np.ndarray]],
    hyperbolicity_eps: float,
    duplicate_tol: float,
    max_iter: int,
    failures: Optional[List[dict]],
) -> List[EquilibriumReport]:
    reports: List[EquilibriumReport] = []
    for label, point in candidates:
        try:
            report = classify(model, point, hyperbolicity_eps, accept_tol=1e-6, label=label, max_iter=max_iter)
        except NumericalError as e:
            logger.warning(f"Face {label or 'interior'} of {model.family}: {e}")
            if failures is not None:
                failures.append({"face": label, "error": str(e)})
            continue
        if all(np.max(np.abs(report.location - r.location)) > duplicate_tol for r in reports):
            reports.append(report)
    return sorted(reports, key=lambda r: tuple(r.location))


# Energy-efficiency thresholds

@singledispatch
def eee(model) -> EnergyThresholds:
    raise UnsupportedModelError("eee", getattr(model, "family", type(model).__name__))


@eee.register
def _(model: CompetitionModel) -> EnergyThresholds:
    names = model.coordinate_names[1:]
    return EnergyThresholds({
        name: mu / kappa for name, mu, kappa in zip(names, model.mu, model.kappa)
    })


@eee.register
def _(model: TwoPredatorDynamics) -> EnergyThresholds:
    p = model.params()
    return EnergyThresholds({
        "y": predator_threshold(p.q1, p.a1, p.c1, p.mu1),
        "z": predator_threshold(p.q2, p.a2, p.c2, p.mu2),
    })


@eee.register
def _(model: TwoPreyDynamics) -> EnergyThresholds:
    p = model.params()
    return EnergyThresholds({
        "x": predator_threshold(p.q1, p.a1, p.c1, p.mu),
        "y": predator_threshold(p.q2, p.a2, p.c2, p.mu),
    })


@eee.register
def _(model: BazykinModel) -> EnergyThresholds:
    return EnergyThresholds({"y": predator_threshold(model.q, model.a, model.c, model.mu)})


# Boundary candidates per family

@singledispatch
def boundary_candidates(model, samples: int) -> List[Tuple[str, np.ndarray]]:
    raise UnsupportedModelError("boundary_equilibria", getattr(model, "family", type(model).__name__))


@boundary_candidates.register
def _(model: CompetitionModel, samples: int) -> List[Tuple[str, np.ndarray]]:
    n = model.n
    candidates = [("E00", np.zeros(n + 1)), ("E0", np.concatenate([[model.K], np.zeros(n)]))]
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            candidates.extend(_competition_subset(model, subset, samples))
    return candidates


def _competition_subset(model: CompetitionModel, subset: Tuple[int, ...], samples: int):
    label = "E[" + ",".join(str(i + 1) for i in subset) + "]"
    try:
        h, y_of = subset_balance(model, subset)
    except np.linalg.LinAlgError:
        logger.warning(f"Singular competition block for consumers {label}")
        return []
    points = []
    for x in resource_roots(h, model.K, samples):
        ys = y_of(x)
        if x > 0 and np.all(ys > 0):
            state = np.zeros(model.n + 1)
            state[0] = x
            state[1 + np.array(subset)] = ys
            points.append((label, state))
    return points


def _predator_axis(p_mu: float, p_m: float) -> Optional[float]:
    """Predator-only equilibrium -mu/m; positive only for negative crowding."""
    if p_m < 0:
        return -p_mu / p_m
    return None


@boundary_candidates.register
def _(model: TwoPredatorDynamics, samples: int) -> List[Tuple[str, np.ndarray]]:
    p = model.params()
    candidates = [("E00", np.zeros(3)), ("E0", np.array([p.K, 0.0, 0.0]))]
    for x, y in predator_prey_face(p.r, p.K, p.q1, p.a1, p.c1, p.mu1, p.m1):
        candidates.append(("E1", np.array([x, y, 0.0])))
    for x, z in predator_prey_face(p.r, p.K, p.q2, p.a2, p.c2, p.mu2, p.m2):
        candidates.append(("E2", np.array([x, 0.0, z])))
    y_axis = _predator_axis(p.mu1, p.m1)
    z_axis = _predator_axis(p.mu2, p.m2)
    if y_axis is not None:
        candidates.append(("Ey", np.array([0.0, y_axis, 0.0])))
    if z_axis is not None:
        candidates.append(("Ez", np.array([0.0, 0.0, z_axis])))
    if y_axis is not None and z_axis is not None:
        candidates.append(("Eyz", np.array([0.0, y_axis, z_axis])))
    return candidates


@boundary_candidates.register
def _(model: TwoPreyDynamics, samples: int) -> List[Tuple[str, np.ndarray]]:
    p = model.params()
    candidates = [
        ("E0", np.zeros(3)),
        ("E1", np.array([p.K1, 0.0, 0.0])),
        ("E2", np.array([0.0, p.K2, 0.0])),
    ]
    lv = lv_competition_point(p.r1, p.K1, p.r2, p.K2, p.alpha12, p.alpha21)
    if lv is not None and lv[0] > 0 and lv[1] > 0:
        candidates.append(("E3", np.array([lv[0], lv[1], 0.0])))
    for y, z in predator_prey_face(p.r2, p.K2, p.q2, p.a2, p.c2, p.mu, p.m):
        candidates.append(("E4", np.array([0.0, y, z])))
    for x, z in predator_prey_face(p.r1, p.K1, p.q1, p.a1, p.c1, p.mu, p.m):
        candidates.append(("E5", np.array([x, 0.0, z])))
    z_axis = _predator_axis(p.mu, p.m)
    if z_axis is not None:
        candidates.append(("Ez", np.array([0.0, 0.0, z_axis])))
    return candidates


@boundary_candidates.register
def _(model: SymmetricTwoPreyModel, samples: int) -> List[Tuple[str, np.ndarray]]:
    p = model.params()
    candidates = [
        ("E0", np.zeros(3)),
        ("E1", np.array([2.0, 0.0, 0.0])),
        ("E2", np.array([0.0, 2.0, 0.0])),
        ("E3", np.array([2.0, 2.0, 0.0])),
    ]
    for u, z in symmetric_face(p.c1, p.mu, p.m, p.r2, False, samples):
        candidates.append(("E4", np.array([0.0, u, z])))
    for u, z in symmetric_face(p.c1, p.mu, p.m, p.r1, False, samples):
        candidates.append(("E5", np.array([u, 0.0, z])))
    z_axis = _predator_axis(p.mu, p.m)
    if z_axis is not None:
        candidates.append(("Ez", np.array([0.0, 0.0, z_axis])))
    return candidates


@boundary_candidates.register
def _(model: BazykinModel, samples: int) -> List[Tuple[str, np.ndarray]]:
    candidates = [("E00", np.zeros(2)), ("E0", np.array([model.K, 0.0]))]
    y_axis = _predator_axis(model.mu, model.m)
    if y_axis is not None:
        candidates.append(("Ey", np.array([0.0, y_axis])))
    return candidates


# Interior candidates per family

@singledispatch
def interior_candidates(model, grid_density: int) -> List[np.ndarray]:
    raise UnsupportedModelError("positive_equilibria", getattr(model, "family", type(model).__name__))


@interior_candidates.register
def _(model: CompetitionModel, grid_density: int) -> List[np.ndarray]:
    return [state for _, state in _competition_interior(model, grid_density ** 2)]


def _competition_interior(model: CompetitionModel, samples: int):
    full = tuple(range(model.n))
    try:
        h, y_of = subset_balance(model, full)
    except np.linalg.LinAlgError:
        logger.warning("Singular competition matrix; no interior equilibria computed")
        return []
    points = []
    for x in resource_roots(h, model.K, samples):
        ys = y_of(x)
        if x > 0 and np.all(ys > 0):
            points.append(("E*", np.concatenate([[x], ys])))
    return points


@interior_candidates.register
def _(model: TwoPredatorDynamics, grid_density: int) -> List[np.ndarray]:
    return two_predator_interior(model.params(), grid_density ** 2)


@interior_candidates.register
def _(model: TwoPreyDynamics, grid_density: int) -> List[np.ndarray]:
    return _two_prey_interior(model.params(), grid_density)


def _two_prey_interior(p, grid_density: int) -> List[np.ndarray]:
    """
    Grid-seeded Newton on the prey isoclines.

    Prey equations give z = f(x, y) and z = g(x, y); the predator equation
    closes the system. Cells of a grid on (0, K1) x (0, K2) whose corners see
    a sign change of both residuals seed a Newton solve.
    """
    from scipy.optimize import root

    def f(x, y):
        return (p.r1 * (1 - x / p.K1) - p.alpha12 * y) * (1 + p.a1 * x) / p.q1

    def g(x, y):
        return (p.r2 * (1 - y / p.K2) - p.alpha21 * x) * (1 + p.a2 * y) / p.q2

    def predator(x, y, z):
        return p.c1 * p.q1 * x / (1 + p.a1 * x) + p.c2 * p.q2 * y / (1 + p.a2 * y) - p.mu - p.m * z

    def residuals(v):
        x, y = v
        z = f(x, y)
        return np.array([z - g(x, y), predator(x, y, z)])

    xs = np.linspace(0.0, p.K1, grid_density + 1)
    ys = np.linspace(0.0, p.K2, grid_density + 1)
    values = np.array([[residuals((x, y)) for y in ys] for x in xs])

    seeds = []
    for i in range(grid_density):
        for j in range(grid_density):
            corners = values[i:i + 2, j:j + 2].reshape(4, 2)
            if all(corners[:, k].min() <= 0 <= corners[:, k].max() for k in range(2)):
                seeds.append(((xs[i] + xs[i + 1]) / 2, (ys[j] + ys[j + 1]) / 2))

    points = []
    for seed in seeds:
        solution = root(residuals, seed, method="hybr", options={"xtol": 1e-13})
        if not solution.success:
            continue
        x, y = solution.x
        z = f(x, y)
        if x > 0 and y > 0 and z > 0 and np.max(np.abs(residuals((x, y)))) < 1e-9:
            points.append(np.array([x, y, z]))
    return points


@interior_candidates.register
def _(model: SymmetricTwoPreyModel, grid_density: int) -> List[np.ndarray]:
    # prey equations force x = y in the interior
    p = model.params()
    return [
        np.array([u, u, z])
        for u, z in symmetric_face(p.c1, p.mu, p.m, p.r1 + p.r2, True, grid_density ** 2)
    ]


@interior_candidates.register
def _(model: BazykinModel, grid_density: int) -> List[np.ndarray]:
    m = model
    return [np.array(point) for point in predator_prey_face(m.r, m.K, m.q, m.a, m.c, m.mu, m.m)]


def boundary_equilibria(
    model,
    hyperbolicity_eps: float = 1e-6,
    grid_density: int = 16,
    duplicate_tol: float = 1e-7,
    max_iter: int = 50,
    failures: Optional[List[dict]] = None,
) -> List[EquilibriumReport]:
    """
    Classified equilibria with at least one zero coordinate, sorted by location.

    A face whose point cannot be polished or classified is logged, appended
    to `failures` when given, and skipped.
    """
    candidates = boundary_candidates(model, grid_density ** 2)
    return _classify_all(model, candidates, hyperbolicity_eps, duplicate_tol, max_iter, failures)


def positive_equilibria(
    model,
    grid_density: int = 16,
    hyperbolicity_eps: float = 1e-6,
    duplicate_tol: float = 1e-7,
    max_iter: int = 50,
) -> List[EquilibriumReport]:
    """Classified interior equilibria, sorted by location; possibly empty."""
    if grid_density < 8:
        raise ParameterError("grid_density", grid_density, "grid_density >= 8")
    points = merge_points(interior_candidates(model, grid_density), duplicate_tol)
    candidates = [(f"E*{i + 1}" if len(points) > 1 else "E*", point) for i, point in enumerate(points)]
    reports = _classify_all(model, candidates, hyperbolicity_eps, duplicate_tol, max_iter, None)
    return [r for r in reports if r.is_positive]
