"""
Existence and local stability results for two prey sharing a predator.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from analysis.equilibria import boundary_equilibria, routh_hurwitz
from analysis.isoclines import lv_competition_point
from models.prey import RescaledTwoPreyModel, TwoPreyDynamics
from utils.exceptions import TheoremPreconditionError

logger = logging.getLogger(__name__)


@dataclass
class ExistenceChain:
    """c1 p1(K1) < mu < c1 p1(x3) + c2 p2(y3) guarantees a positive equilibrium."""

    left: float
    mu: float
    right: float

    @property
    def holds(self) -> bool:
        return self.left < self.mu < self.right

    @property
    def broken(self) -> str:
        if self.holds:
            return ""
        return "left" if self.mu <= self.left else "right"

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "chain": [self.left, self.mu, self.right],
            "broken": self.broken or None,
        }


def _check_competition_point(p) -> Tuple[float, float]:
    if not p.r2 / p.K1 > p.alpha21:
        raise TheoremPreconditionError("r2/K1 > alpha21", p.r2 / p.K1, p.alpha21)
    if not p.r1 / p.K2 > p.alpha12:
        raise TheoremPreconditionError("r1/K2 > alpha12", p.r1 / p.K2, p.alpha12)
    return lv_competition_point(p.r1, p.K1, p.r2, p.K2, p.alpha12, p.alpha21)


def ch4_existence_check(model: TwoPreyDynamics) -> ExistenceChain:
    """
    Evaluate the mortality chain between the single-prey and two-prey supply.

    Raises:
        TheoremPreconditionError: r2/K1 <= alpha21 or r1/K2 <= alpha12
    """
    p = model.params()
    x3, y3 = _check_competition_point(p)
    p1 = lambda x: p.q1 * x / (1 + p.a1 * x)
    p2 = lambda y: p.q2 * y / (1 + p.a2 * y)
    chain = ExistenceChain(
        left=p.c1 * p1(p.K1),
        mu=p.mu,
        right=p.c1 * p1(x3) + p.c2 * p2(y3),
    )
    logger.debug(f"Existence chain {chain.left:.6g} < {chain.mu:.6g} < {chain.right:.6g}: {chain.holds}")
    return chain


@dataclass
class InvasionRate:
    """Growth rate of the missing species at a boundary equilibrium."""

    label: str
    location: List[float]
    species: str
    rate: float

    @property
    def unstable(self) -> bool:
        return self.rate > 0

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "location": self.location,
            "species": self.species,
            "rate": self.rate,
            "unstable": self.unstable,
        }


def boundary_invasion_rates(model: TwoPreyDynamics) -> List[InvasionRate]:
    """
    Per-capita growth of the absent species at each one-zero boundary point.

    At a point with exactly one vanishing coordinate the Jacobian row of that
    coordinate has a single nonzero entry on the diagonal, so the rate is an
    eigenvalue and a positive rate makes the point unstable.
    """
    p = model.params()
    rates = []
    for report in boundary_equilibria(model):
        if len(report.boundary_pattern) != 1:
            continue
        x, y, z = report.location
        species = report.boundary_pattern[0]
        if species == "z":
            rate = p.c1 * p.q1 * x / (1 + p.a1 * x) + p.c2 * p.q2 * y / (1 + p.a2 * y) - p.mu
        elif species == "x":
            rate = p.r1 - p.alpha12 * y - p.q1 * z
        else:
            rate = p.r2 - p.alpha21 * x - p.q2 * z
        rates.append(InvasionRate(report.label, [float(v) for v in report.location], species, float(rate)))
    return rates


@dataclass
class RescaledStability:
    A: Tuple[float, float]
    B: Tuple[float, float]
    C: Tuple[float, float]
    diagonal: Tuple[float, float]
    characteristic: List[float]
    hurwitz: List[float]
    hypotheses: Dict[str, bool] = field(default_factory=dict)
    sign_proposition: Dict[str, bool] = field(default_factory=dict)

    @property
    def attractor(self) -> bool:
        return all(h > 0 for h in self.hurwitz)

    @property
    def hypotheses_hold(self) -> bool:
        return all(self.hypotheses.values())

    def to_dict(self) -> dict:
        return {
            "A": list(self.A),
            "B": list(self.B),
            "C": list(self.C),
            "diagonal": list(self.diagonal),
            "characteristic": self.characteristic,
            "hurwitz": self.hurwitz,
            "attractor": self.attractor,
            "hypotheses": self.hypotheses,
            "hypotheses_hold": self.hypotheses_hold,
            "sign_proposition": self.sign_proposition,
        }


def ch4_rescaled_stability(model: RescaledTwoPreyModel) -> RescaledStability:
    """
    Sufficient conditions for (1/4, 1/4, 1) to attract, and the exact verdict.

    A_i, B_i and C_i are the entries of the sufficient conditions; the
    characteristic polynomial and Hurwitz determinants come from the exact
    Jacobian. Its diagonal differs from A_i by alpha_ij/4 when competition is
    present. `sign_proposition` records, per prey, that A_i < 0 whenever
    1/4 > (K_i - 1/a_i)/2.
    """
    p = model.params()
    A = (
        (p.a1 * p.q1 / (1 + p.a1 / 4) ** 2 - p.r1 / p.K1 - p.alpha12) / 4,
        (p.a2 * p.q2 / (1 + p.a2 / 4) ** 2 - p.r2 / p.K2 - p.alpha21) / 4,
    )
    B = (p.q1 / (4 + p.a1), p.q2 / (4 + p.a2))
    C = (4 * p.c1 / (1 + p.a1 / 4), 4 * p.c2 / (1 + p.a2 / 4))

    J = model.jacobian(model.equilibrium)
    characteristic = [float(v) for v in np.real(np.poly(J))]

    hypotheses = {
        "A1 < 0": A[0] < 0,
        "A2 < 0": A[1] < 0,
        "alpha12 <= B1 alpha21/B2": p.alpha12 <= B[0] * p.alpha21 / B[1],
        "B1 alpha21/B2 <= -4 A1": B[0] * p.alpha21 / B[1] <= -4 * A[0],
        "alpha12 <= -4 A2 B1/B2": p.alpha12 <= -4 * A[1] * B[0] / B[1],
    }

    sign_proposition = {}
    for i, (K, a, value) in enumerate(((p.K1, p.a1, A[0]), (p.K2, p.a2, A[1])), start=1):
        applies = a == 0 or 0.25 > (K - 1 / a) / 2
        sign_proposition[f"A{i}"] = (not applies) or value < 0

    return RescaledStability(
        A=A,
        B=B,
        C=C,
        diagonal=(float(J[0, 0]), float(J[1, 1])),
        characteristic=characteristic,
        hurwitz=routh_hurwitz(characteristic),
        hypotheses=hypotheses,
        sign_proposition=sign_proposition,
    )
