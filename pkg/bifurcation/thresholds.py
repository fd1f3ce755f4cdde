"""
Closed-form Hopf and zero-Hopf thresholds.

Each threshold is returned as a BifurcationPoint carrying the parameters, the
equilibrium and the spectrum there; transversality and the first Lyapunov
coefficient are filled in by their own modules.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from analysis.isoclines import predator_threshold
from models.bazykin import BazykinModel
from models.predators import RescaledTwoPredatorModel
from models.prey import CanonicalTwoPreyModel, SymmetricTwoPreyModel
from utils.exceptions import DegenerateGeometryError, TheoremPreconditionError

logger = logging.getLogger(__name__)

SPECTRUM_TOL = 1e-7


def hopf_spectrum(J: np.ndarray) -> Tuple[float, complex]:
    """
    Split a 2x2 or 3x3 spectrum into its real eigenvalue and the pair eps + i omega.

    The pair is the one with the largest imaginary part; the real eigenvalue
    of a planar spectrum is reported as nan.

    Raises:
        DegenerateGeometryError: the spectrum has no complex pair
    """
    values = np.linalg.eigvals(np.asarray(J, dtype=float))
    k = int(np.argmax(values.imag))
    pair = complex(values[k])
    if not pair.imag > 0:
        raise DegenerateGeometryError(f"No complex eigenvalue pair in spectrum {values}")
    rest = np.delete(values, [k, int(np.argmin(values.imag))])
    nu = float(rest[0].real) if rest.size else math.nan
    return nu, pair


@dataclass
class BifurcationPoint:
    """A Hopf or zero-Hopf point of one model family."""

    kind: str
    parameter: str
    params: Dict[str, float]
    location: np.ndarray
    nu: float
    pair: complex
    routh_gap: float = 0.0
    transversality: Optional[float] = None
    l1: Optional[float] = None
    model: Any = field(default=None, repr=False)
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def omega(self) -> float:
        return float(self.pair.imag)

    @property
    def spectrum(self) -> List[complex]:
        if self.kind == "zero-saddle":
            return [complex(self.nu), self.pair, -self.pair]
        pair = [self.pair, self.pair.conjugate()]
        return pair if math.isnan(self.nu) else [complex(self.nu), *pair]

    @property
    def on_threshold(self) -> bool:
        if self.kind == "zero-saddle":
            return abs(self.nu) < SPECTRUM_TOL * max(1.0, abs(self.pair))
        centre = abs(self.pair.real)
        if self.kind == "zero-hopf":
            centre = max(centre, abs(self.nu))
        return centre < SPECTRUM_TOL * max(1.0, self.omega)

    @property
    def criticality(self) -> str:
        if self.l1 is None or self.l1 == 0:
            return "undecided"
        return "supercritical" if self.l1 < 0 else "subcritical"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parameter": self.parameter,
            "params": self.params,
            "location": [float(v) for v in self.location],
            "nu": None if math.isnan(self.nu) else self.nu,
            "omega": self.omega,
            "pair_real": float(self.pair.real),
            "routh_gap": self.routh_gap,
            "transversality": self.transversality,
            "l1": self.l1,
            "criticality": self.criticality,
            **self.extras,
        }


def _routh_gap(J: np.ndarray) -> float:
    """O2 O1 - O0 of the monic characteristic cubic, relative to its terms."""
    _, o2, o1, o0 = np.real(np.poly(J))
    return float((o2 * o1 - o0) / max(1.0, abs(o2 * o1), abs(o0)))


def _point(kind: str, parameter: str, model, J: np.ndarray, scale: float = 1.0, **extras) -> BifurcationPoint:
    J = scale * J
    nu, pair = hopf_spectrum(J)
    point = BifurcationPoint(
        kind=kind,
        parameter=parameter,
        params={k: float(v) for k, v in model.model_dump().items() if k != "family"},
        location=np.asarray(model.equilibrium, dtype=float),
        nu=nu,
        pair=pair,
        routh_gap=_routh_gap(J) if J.shape == (3, 3) else float(np.trace(J)),
        model=model,
        extras=extras,
    )
    if not point.on_threshold:
        logger.warning(f"{kind} spectrum off threshold: pair {pair}, nu {nu:.3e}")
    return point


def _ch3_quadratic(K: float, q1: float) -> np.ndarray:
    """O2 O1 - O0 at (1, 1, 1) of the rescaled two-predator system, as a quadratic in m2."""
    alpha = (K - 3) * (q1 + 1) / (4 * (K - 1))
    s = (q1 ** 2 + 1) / 8 - alpha
    gamma = alpha - q1 ** 2 / 8
    return np.array([
        1 - alpha,
        s + (1 - alpha) ** 2 + gamma,
        (1 - alpha) * s - 0.125,
    ])


def ch3_discriminant(K: float, q1: float) -> float:
    inner = (
        (K - 3) * q1 * (4 * (K * (K * (13 * K - 37) + 47) - 31) - (K - 3) * (K * (7 * K - 10) - 1) * q1)
        + 2 * K * (K * (-51 * (K - 4) * K - 322) + 140) + 154
    )
    tail = K * (17 * K - 30) + 9
    return q1 * (q1 * inner - 4 * (K - 3) ** 2 * tail) + tail ** 2


def _ch3_closed_form(K: float, q1: float, disc: float) -> Optional[Tuple[float, float]]:
    denominator = 8 * (K - 1) * ((K - 3) * q1 - 3 * K + 1)
    if denominator == 0:
        return None
    head = (K - 3) ** 2 * q1 ** 2 - 2 * (K - 3) * (3 * K - 1) * q1 + K * (11 * K - 10) + 3
    root = math.sqrt(disc)
    return (head - root) / denominator, (head + root) / denominator


def hopf_threshold_ch3(K: float, q1: float) -> BifurcationPoint:
    """
    Value of m2 at which (1, 1, 1) of the rescaled two-predator system has
    spectrum {nu, +-i omega}.

    The Hopf condition O2 O1 = O0 is quadratic in m2. A root qualifies when
    omega^2 = O1 > 0 and nu = alpha - 1 - m2 < 0; of the qualifying roots the
    largest is returned. The printed radical form of the same roots is
    checked against it.

    Raises:
        TheoremPreconditionError: K <= 1, q1 <= 2, a non-positive discriminant
            or no qualifying root
    """
    if not K > 1:
        raise TheoremPreconditionError("K > 1", K, 1.0)
    if not q1 > 2:
        raise TheoremPreconditionError("q1 > 2", q1, 2.0)
    disc = ch3_discriminant(K, q1)
    if not disc > 0:
        raise TheoremPreconditionError("discriminant > 0", disc, 0.0)

    a, b, c = _ch3_quadratic(K, q1)
    roots = np.roots([a, b, c]) if a != 0 else np.array([-c / b])
    alpha = (K - 3) * (q1 + 1) / (4 * (K - 1))
    admissible = [
        float(r.real) for r in roots
        if abs(r.imag) < 1e-12
        and (1 - alpha) * r.real + (q1 ** 2 + 1) / 8 - alpha > 0
        and alpha - 1 - r.real < 0
    ]
    if not admissible:
        raise TheoremPreconditionError("Hopf root with O1 > 0 and nu < 0")
    m2 = max(admissible)

    closed = _ch3_closed_form(K, q1, disc)
    if closed is not None and min(abs(m2 - v) for v in closed) > 1e-9 * max(1.0, abs(m2)):
        logger.warning(f"Printed closed form {closed} does not reproduce m2={m2!r}")

    model = RescaledTwoPredatorModel(K=K, q1=q1, m2=m2)
    return _point("hopf", "m2", model, model.jacobian(model.equilibrium), discriminant=disc)


def c1_bound(r1: float, r2: float, K2: float) -> float:
    """Upper limit on c1 below which the canonical two-prey Hopf threshold is positive."""
    return (
        r2 * (2 * K2 - 3)
        * (4 * r1 ** 2 * K2 ** 2 + 4 * r1 * r2 * K2 * (3 - 2 * K2) + 5 * r2 ** 2 * (1 - 4 * K2) ** 2)
        / (45 * r1 ** 3 * K2 ** 3)
    )


def _check_canonical_rates(r1: float, r2: float, K2: float):
    if not (r1 > 0 and r2 > 0):
        raise TheoremPreconditionError("r1, r2 > 0")
    if K2 * (r1 - 2 * r2) + 3 * r2 == 0:
        raise TheoremPreconditionError("K2 (r1 - 2 r2) + 3 r2 != 0", 0.0, 0.0)


def hopf_m0(r1: float, r2: float, K2: float, c1: float) -> float:
    radicand = (
        r1 ** 4 * K2 ** 4 * (4 - 45 * c1) ** 2
        + 2 * r1 ** 2 * r2 ** 2 * K2 ** 2 * (45 * c1 * (41 - 88 * K2 + 96 * K2 ** 2) + 32 * K2 * (1 + 8 * K2) - 124)
        + r2 ** 4 * (31 - 8 * K2 * (1 + 8 * K2)) ** 2
    )
    if radicand < 0:
        raise TheoremPreconditionError("m0 radicand >= 0", radicand, 0.0)
    numerator = (
        math.sqrt(radicand)
        + r2 ** 2 * (-96 * K2 ** 2 + 88 * K2 - 41)
        + 8 * r1 * r2 * K2 * (2 * K2 - 3)
        - r1 ** 2 * K2 ** 2 * (4 + 45 * c1)
    )
    return numerator / (80 * K2 * (K2 * (r1 - 2 * r2) + 3 * r2))


def canonical_coefficients(r1: float, r2: float, K2: float, c1: float, m: float) -> Tuple[float, float, float]:
    """(A, B, C) of l^3 - A l^2 + B l - C at (1/4, 1/4, 1): trace, minor sum, determinant."""
    A = ((2 - 3 / K2) * r2 - r1 - 10 * m) / 10
    B = (
        4 * r2 * K2 * (2 * K2 - 3) * (r1 + 10 * m)
        - 5 * (r1 * K2 ** 2 * (9 * c1 * r1 + 8 * m) + r2 ** 2 * (1 - 4 * K2) ** 2)
    ) / (400 * K2 ** 2)
    C = r1 * r2 * (K2 * (9 * c1 * r1 + 8 * m) * (2 * K2 - 3) - r2 * (1 - 4 * K2) ** 2) / (800 * K2 ** 2)
    return A, B, C


def hopf_threshold_ch4(r1: float, r2: float, K2: float, c1: float, strict: bool = True) -> BifurcationPoint:
    """
    Predator crowding m0 at which (1/4, 1/4, 1) of the canonical two-prey system
    has a purely imaginary pair.

    With strict=True, 0 < c1 < c1_bound and m0 > 0 are enforced. strict=False
    accepts any m0 that keeps the predator mortality positive; the coefficient
    tables cover such cells, including capacities K2 <= 3 r2/(2 r2 - r1) and
    c1 above the bound.

    Raises:
        TheoremPreconditionError: naming the first failed inequality
        DegenerateGeometryError: the spectrum at m0 has no complex pair
    """
    _check_canonical_rates(r1, r2, K2)
    bound = c1_bound(r1, r2, K2)
    if strict and not 0 < c1 < bound:
        raise TheoremPreconditionError("0 < c1 < c1_bound", c1, bound)

    m0 = hopf_m0(r1, r2, K2, c1)
    m_max = 3 * c1 * r1 / 16 + r2 * (4 * K2 - 1) / (16 * K2)
    if strict and not 0 < m0:
        raise TheoremPreconditionError("m0 > 0", m0, 0.0)
    if not m0 < m_max:
        raise TheoremPreconditionError("m0 < 3 c1 r1/16 + r2 (4 K2 - 1)/(16 K2)", m0, m_max)

    A, B, C = canonical_coefficients(r1, r2, K2, c1, m0)
    logger.debug(f"m0={m0:.9g}: A={A:.3e} B={B:.3e} C={C:.3e}, -AB-C={-A * B - C:.3e}")
    model = CanonicalTwoPreyModel(r1=r1, r2=r2, K2=K2, c1=c1, m=m0)
    return _point("hopf", "m", model, model.jacobian(model.equilibrium), c1_bound=bound, m0=m0)


def zero_hopf_ch4(r1: float, r2: float, K2: float) -> BifurcationPoint:
    """
    (c1, m) at which the canonical two-prey Jacobian has spectrum {0, +-i sqrt(B)}.

    Raises:
        TheoremPreconditionError: outside the region, or c1 <= 0, or B <= 0
    """
    if not (r1 > 0 and r2 > 0):
        raise TheoremPreconditionError("r1, r2 > 0")
    if not 2 * r2 > r1:
        raise TheoremPreconditionError("2 r2 > r1", 2 * r2, r1)
    k_min = 3 * r2 / (2 * r2 - r1)
    if not K2 > k_min:
        raise TheoremPreconditionError("K2 > 3 r2/(2 r2 - r1)", K2, k_min)

    c1 = (4 + r2 * (8 * K2 * (8 * K2 + 1) - 31) / (r1 * K2 * (2 * K2 - 3))) / 45
    m = r2 / 5 - r1 / 10 - 3 * r2 / (10 * K2)
    if not c1 > 0:
        raise TheoremPreconditionError("c1 > 0", c1, 0.0)
    A, B, C = canonical_coefficients(r1, r2, K2, c1, m)
    if not B > 0:
        raise TheoremPreconditionError("B > 0", B, 0.0)

    model = CanonicalTwoPreyModel(r1=r1, r2=r2, K2=K2, c1=c1, m=m)
    return _point(
        "zero-hopf", "(c1, m)", model, model.jacobian(model.equilibrium),
        A=A, B=B, C=C,
    )


def zero_hopf_symmetric(r1: float, r2: float) -> BifurcationPoint:
    """
    (c1, m) = (2/3, -2 (r1 + r2)/3) of the symmetric two-prey system.

    The spectrum is that of the polynomial form, the Jacobian times 1 + x + y.
    """
    c1 = 2.0 / 3.0
    m = -2.0 * (r1 + r2) / 3.0
    model = SymmetricTwoPreyModel(r1=r1, r2=r2, c1=c1, m=m)
    s = model.equilibrium
    return _point("zero-hopf", "(c1, m)", model, model.jacobian(s), scale=model.polynomial_factor(s))


@dataclass
class BazykinHopf:
    """Where the prey threshold y^b sits relative to the prey-isocline vertex."""

    vertex: float
    threshold: Optional[float]
    mu_critical: float
    point: BifurcationPoint

    @property
    def stable(self) -> Optional[bool]:
        if self.threshold is None:
            return None
        return self.threshold > self.vertex

    def to_dict(self) -> dict:
        return {
            "vertex": self.vertex,
            "threshold": self.threshold,
            "mu_critical": self.mu_critical,
            "stable": self.stable,
            "point": self.point.to_dict(),
        }


def bazykin_hopf(model: BazykinModel) -> BazykinHopf:
    """
    Hopf point of the crowding-free predator-prey system.

    The trace of the Jacobian at the positive equilibrium vanishes when the
    prey threshold mu/(c q - a mu) equals (K - 1/a)/2. The returned point is
    at the predator mortality that puts it there; `stable` reports which side
    of the vertex the given model lies on.

    Raises:
        TheoremPreconditionError: m != 0, or a K <= 1
    """
    if model.m != 0:
        raise TheoremPreconditionError("m = 0", model.m, 0.0)
    if not model.a * model.K > 1:
        raise TheoremPreconditionError("a K > 1", model.a * model.K, 1.0)

    vertex = (model.K - 1 / model.a) / 2
    mu_critical = model.c * model.q * vertex / (1 + model.a * vertex)
    critical = model.with_updates(mu=mu_critical)
    prey_level = model.r * (1 - vertex / model.K) * (1 + model.a * vertex) / model.q
    location = np.array([vertex, prey_level])
    J = critical.jacobian(location)

    omega = math.sqrt(max(float(np.linalg.det(J)), 0.0))
    point = BifurcationPoint(
        kind="hopf",
        parameter="mu",
        params={k: float(v) for k, v in critical.model_dump().items() if k != "family"},
        location=location,
        nu=math.nan,
        pair=complex(np.trace(J) / 2, omega),
        routh_gap=float(np.trace(J)),
        model=critical,
    )
    return BazykinHopf(
        vertex=vertex,
        threshold=predator_threshold(model.q, model.a, model.c, model.mu),
        mu_critical=mu_critical,
        point=point,
    )
