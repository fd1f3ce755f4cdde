"""
Existence and uniqueness results for one prey shared by two predators.

The predators are interchangeable: when y's energy threshold exceeds z's the
parameter blocks are swapped so that the formulas below always see
y^b < z^b, and results are reported with the original labels.
"""

import logging
import math
from dataclasses import dataclass
from types import SimpleNamespace
from typing import Dict, Optional, Tuple

from analysis.equilibria import boundary_equilibria
from analysis.isoclines import predator_threshold
from models.predators import TwoPredatorDynamics
from utils.exceptions import TheoremPreconditionError

logger = logging.getLogger(__name__)

AGREEMENT_TOL = 1e-9

_PAIRS = (("q1", "q2"), ("a1", "a2"), ("c1", "c2"), ("mu1", "mu2"), ("m1", "m2"))


def swap_predators(p: SimpleNamespace) -> SimpleNamespace:
    """Parameter namespace with the blocks of y and z exchanged."""
    swapped = SimpleNamespace(**vars(p))
    for a, b in _PAIRS:
        setattr(swapped, a, getattr(p, b))
        setattr(swapped, b, getattr(p, a))
    return swapped


def ordered_params(model: TwoPredatorDynamics) -> Tuple[SimpleNamespace, bool]:
    """
    Parameters ordered so that y^b < z^b, and whether a swap was needed.

    Raises:
        TheoremPreconditionError: a threshold is undefined or both coincide
    """
    p = model.params()
    yb = predator_threshold(p.q1, p.a1, p.c1, p.mu1)
    zb = predator_threshold(p.q2, p.a2, p.c2, p.mu2)
    if yb is None:
        raise TheoremPreconditionError("c1 q1 - a1 mu1 > 0", p.c1 * p.q1, p.a1 * p.mu1)
    if zb is None:
        raise TheoremPreconditionError("c2 q2 - a2 mu2 > 0", p.c2 * p.q2, p.a2 * p.mu2)
    if yb == zb:
        raise TheoremPreconditionError("y^b != z^b", yb, zb)
    if yb > zb:
        logger.debug(f"Relabelling predators: y^b={yb:.6g} > z^b={zb:.6g}")
        return swap_predators(p), True
    return p, False


def _threshold_forms(p: SimpleNamespace) -> Tuple[float, float]:
    D1 = p.c1 * p.q1 - p.a1 * p.mu1
    D2 = p.c2 * p.q2 - p.a2 * p.mu2
    yb = p.mu1 / D1
    zb = p.mu2 / D2

    closed = (
        (D2 / (p.a1 * p.mu2 - p.a2 * p.mu2 + p.c2 * p.q2)) ** 2
        * p.K * p.q1 * (p.mu2 * (p.c1 * p.q1 - p.a1 * p.mu1) - p.mu1 * D2)
        / (p.m1 * (p.K * D2 - p.mu2))
    )
    geometric = (
        (1 / (p.a1 * zb + 1)) ** 2
        * p.K * p.q1 * p.mu1 * (zb - yb)
        / (p.m1 * yb * (p.K - zb))
    )
    return closed, geometric


def ch3_existence_threshold(model: TwoPredatorDynamics) -> float:
    """
    Growth rate above which a positive equilibrium exists.

    With 0 < y^b < z^b < K the system has a positive equilibrium iff r exceeds
    the returned value. Two algebraically equivalent expressions are evaluated
    and must agree.

    Raises:
        TheoremPreconditionError: ordering 0 < y^b < z^b < K fails, or m1 <= 0
            after relabelling
    """
    p, _ = ordered_params(model)
    yb = predator_threshold(p.q1, p.a1, p.c1, p.mu1)
    zb = predator_threshold(p.q2, p.a2, p.c2, p.mu2)
    if not zb < p.K:
        raise TheoremPreconditionError("z^b < K", zb, p.K)
    if p.m1 <= 0:
        raise TheoremPreconditionError("m1 > 0", p.m1, 0.0)

    closed, geometric = _threshold_forms(p)
    if abs(closed - geometric) > AGREEMENT_TOL * max(1.0, abs(closed)):
        logger.warning(f"Threshold forms disagree: {closed!r} vs {geometric!r}")
    logger.debug(f"Existence threshold {closed:.9g} (y^b={yb:.6g}, z^b={zb:.6g})")
    return closed


@dataclass
class FaceUniqueness:
    threshold: Optional[float]
    lower: float
    upper: float

    @property
    def unique(self) -> bool:
        return self.threshold is not None and self.lower <= self.threshold < self.upper

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "lower": self.lower,
            "upper": self.upper,
            "unique": self.unique,
        }


def _vertex(K: float, a: float) -> float:
    """(K - 1/a)/2, the prey coordinate of the prey isocline's maximum."""
    return (K - 1 / a) / 2 if a > 0 else -math.inf


def ch3_uniqueness(model: TwoPredatorDynamics) -> Dict[str, FaceUniqueness]:
    """Per predator face, whether its predator-prey equilibrium is unique."""
    p = model.params()
    return {
        "y": FaceUniqueness(predator_threshold(p.q1, p.a1, p.c1, p.mu1), _vertex(p.K, p.a1), p.K),
        "z": FaceUniqueness(predator_threshold(p.q2, p.a2, p.c2, p.mu2), _vertex(p.K, p.a2), p.K),
    }


@dataclass
class ExclusionVerdict:
    hypotheses_hold: bool
    threshold: float
    r: float
    relabeled: bool
    face_stable: Optional[str] = None
    failed: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "hypotheses_hold": self.hypotheses_hold,
            "threshold": self.threshold,
            "r": self.r,
            "relabeled": self.relabeled,
            "face_stable": self.face_stable,
            "failed": self.failed,
        }


def ch3_exclusion(model: TwoPredatorDynamics) -> ExclusionVerdict:
    """
    Conditions under which no positive equilibrium exists.

    With (K - 1/a1)/2 < y^b < z^b < K the face equilibrium of the predator with
    the smaller threshold is unique; if in addition r does not exceed the
    existence threshold, no positive equilibrium exists. `face_stable` is the
    stability of that face equilibrium in the full system.
    """
    p, relabeled = ordered_params(model)
    threshold = ch3_existence_threshold(model)
    yb = predator_threshold(p.q1, p.a1, p.c1, p.mu1)
    zb = predator_threshold(p.q2, p.a2, p.c2, p.mu2)

    failed = None
    if not _vertex(p.K, p.a1) < yb:
        failed = "(K - 1/a1)/2 < y^b"
    elif not p.r <= threshold:
        failed = "r <= existence threshold"

    # the face of the smaller-threshold predator keeps the other one at zero
    absent = "y" if relabeled else "z"
    face_stable = None
    for report in boundary_equilibria(model):
        if report.boundary_pattern == (absent,):
            face_stable = report.stable
            break

    return ExclusionVerdict(
        hypotheses_hold=failed is None and zb < p.K,
        threshold=threshold,
        r=p.r,
        relabeled=relabeled,
        face_stable=face_stable,
        failed=failed,
    )
