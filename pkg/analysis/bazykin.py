"""
Positive equilibria of the predator-prey system with predator crowding.

The prey coordinates of positive equilibria are the roots in (0, K) of a
cubic; a closed-form window in m gives three of them, and a Cardano
expression gives one root directly.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from analysis.equilibria import EquilibriumReport, boundary_equilibria, positive_equilibria
from analysis.isoclines import bazykin_cubic, predator_prey_face, predator_threshold
from models.bazykin import BazykinModel
from utils.exceptions import TheoremPreconditionError

logger = logging.getLogger(__name__)


@dataclass
class BazykinCubic:
    coefficients: np.ndarray
    roots: List[complex]
    prey_roots: List[float]
    cardano: Optional[float] = None

    @property
    def descartes_positive(self) -> bool:
        """Omega3 < 0 < Omega0 forces at least one positive real root."""
        return self.coefficients[0] < 0 < self.coefficients[3]

    def to_dict(self) -> dict:
        return {
            "coefficients": [float(c) for c in self.coefficients],
            "roots": [[float(r.real), float(r.imag)] for r in self.roots],
            "prey_roots": self.prey_roots,
            "cardano": self.cardano,
        }


@dataclass
class TripleWindow:
    m1: float
    epsilon: float
    m2: float

    @property
    def bounds(self) -> Tuple[float, float]:
        return max(self.m1 - self.epsilon, self.m2), self.m1 + self.epsilon

    def contains(self, m: float) -> bool:
        low, high = self.bounds
        return low < m < high

    def to_dict(self) -> dict:
        return {"m1": self.m1, "epsilon": self.epsilon, "m2": self.m2, "window": list(self.bounds)}


def cubic(model: BazykinModel) -> BazykinCubic:
    m = model
    coefficients = bazykin_cubic(m.r, m.K, m.q, m.a, m.c, m.mu, m.m)
    trimmed = np.trim_zeros(coefficients, "f")
    roots = [complex(r) for r in np.roots(trimmed)] if trimmed.size > 1 else []
    prey = sorted(x for x, _ in predator_prey_face(m.r, m.K, m.q, m.a, m.c, m.mu, m.m))
    return BazykinCubic(
        coefficients=coefficients,
        roots=sorted(roots, key=lambda z: (z.real, z.imag)),
        prey_roots=prey,
        cardano=cardano_root(model) if m.m > 0 and m.a > 0 else None,
    )


def cardano_root(model: BazykinModel) -> float:
    """
    One real root of the equilibrium cubic from the closed-form radical.

    With one real root the cube root of the radical is taken on the real
    line. With three real roots the principal branch is evaluated in
    trigonometric form, x = chi/(3A) - 2 sqrt(chi^2 - phi) cos(theta/3)/(3A).
    """
    r, K, q, a, c, mu, m = model.r, model.K, model.q, model.a, model.c, model.mu, model.m
    A = a ** 2 * m * r
    chi = a ** 2 * K * m * r - 2 * a * m * r
    phi = 3 * a ** 2 * m * r * (c * K * q ** 2 + m * r - 2 * a * K * m * r - a * K * q * mu)
    omega1 = a * mu * K * q - c * K * q ** 2 - m * r + 2 * a * K * m * r
    omega0 = mu * K * q + K * m * r
    psi = -(2 * chi ** 3 + 9 * A * chi * omega1 + 27 * A ** 2 * omega0)

    delta0 = chi ** 2 - phi
    discriminant = psi ** 2 - 4 * delta0 ** 3
    if discriminant < 0:
        theta = math.atan2(math.sqrt(-discriminant), psi)
        return (chi - 2 * math.sqrt(delta0) * math.cos(theta / 3)) / (3 * A)

    S = psi + math.sqrt(discriminant)
    if S == 0:
        S = psi - math.sqrt(discriminant)
    C = float(np.cbrt(S / 2))
    if C == 0:
        return chi / (3 * A)
    return (chi - C - delta0 / C) / (3 * A)


def triple_window(model: BazykinModel) -> TripleWindow:
    """
    Range of the crowding coefficient m with three positive equilibria.

    Raises:
        TheoremPreconditionError: c q - a mu <= 0 or K <= (8 c q + a mu)/(a (c q - a mu))
    """
    r, K, q, a, c, mu = model.r, model.K, model.q, model.a, model.c, model.mu
    margin = c * q - a * mu
    if margin <= 0:
        raise TheoremPreconditionError("c q - a mu > 0", c * q, a * mu)
    if a <= 0:
        raise TheoremPreconditionError("a > 0", a, 0.0)
    k_min = (8 * c * q + a * mu) / (a * margin)
    if not K > k_min:
        raise TheoremPreconditionError("K > (8 c q + a mu)/(a (c q - a mu))", K, k_min)

    aK = a * K
    m1 = (
        -2 * a ** 3 * c * mu * K ** 3 * q
        - 22 * a ** 2 * c * mu * K ** 2 * q
        + a ** 2 * mu ** 2 * K * (aK + 1) ** 2
        + c ** 2 * K * q ** 2 * (aK * (aK + 20) - 8)
        - 20 * a * c * mu * K * q
    ) / (8 * c * (1 + aK) ** 3 * r)
    radicand = (
        a * K ** 2 * (a * mu * K - c * K * q + mu)
        * (c * q * (8 - aK) + a * mu * (aK + 1)) ** 3
        / (c ** 2 * r ** 2 * (aK + 1) ** 6)
    )
    epsilon = math.sqrt(max(radicand, 0.0)) / 8
    m2 = 3 * K * q * margin / (a * K * r * (aK + 2) + r)
    return TripleWindow(m1=m1, epsilon=epsilon, m2=m2)


@dataclass
class GlobalStabilityFlags:
    threshold: Optional[float]
    exists: bool
    unique_local_attractor: bool
    global_attractor: bool

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "exists": self.exists,
            "unique_local_attractor": self.unique_local_attractor,
            "global_attractor": self.global_attractor,
        }


def bazykin_global_stability(model: BazykinModel) -> GlobalStabilityFlags:
    """
    Uniqueness and stability flags of the positive equilibrium.

    With 0 < y^b < K a positive equilibrium exists; with
    (K - 1/a)/2 <= y^b < K it is the only one and attracts locally. The
    Dulac conditions r < mu and q < (2 - a K (r - mu))/c make it global.
    """
    m = model
    yb = predator_threshold(m.q, m.a, m.c, m.mu)
    exists = yb is not None and 0 < yb < m.K
    vertex = (m.K - 1 / m.a) / 2 if m.a > 0 else -math.inf
    unique = exists and vertex <= yb
    dulac = m.r < m.mu and m.q < (2 - m.a * m.K * (m.r - m.mu)) / m.c
    return GlobalStabilityFlags(
        threshold=yb,
        exists=exists,
        unique_local_attractor=unique,
        global_attractor=unique and dulac,
    )


@dataclass
class BazykinAnalysis:
    cubic: BazykinCubic
    window: Optional[TripleWindow]
    flags: GlobalStabilityFlags
    positive: List[EquilibriumReport] = field(default_factory=list)
    boundary: List[EquilibriumReport] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "cubic": self.cubic.to_dict(),
            "window": self.window.to_dict() if self.window else None,
            "flags": self.flags.to_dict(),
            "positive": [r.to_dict() for r in self.positive],
            "boundary": [r.to_dict() for r in self.boundary],
        }


def bazykin_analysis(model: BazykinModel, grid_density: int = 16) -> BazykinAnalysis:
    """
    Cubic, triple-equilibrium window, flags and classified equilibria.

    Raises:
        TheoremPreconditionError: c q - a mu <= 0
    """
    m = model
    if m.c * m.q - m.a * m.mu <= 0:
        raise TheoremPreconditionError("c q - a mu > 0", m.c * m.q, m.a * m.mu)

    data = cubic(model)
    if data.cardano is not None:
        nearest = min((abs(r - data.cardano) for r in data.roots), default=math.inf)
        if nearest > 1e-6 * max(1.0, abs(data.cardano)):
            logger.warning(f"Cardano root {data.cardano:.9g} is not among the companion roots")

    try:
        window = triple_window(model)
    except TheoremPreconditionError as e:
        logger.debug(f"No triple-equilibrium window: {e}")
        window = None

    return BazykinAnalysis(
        cubic=data,
        window=window,
        flags=bazykin_global_stability(model),
        positive=positive_equilibria(model, grid_density=grid_density),
        boundary=boundary_equilibria(model, grid_density=grid_density),
    )
