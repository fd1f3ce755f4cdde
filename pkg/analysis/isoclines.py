"""
Reduced equilibrium equations.

Every face of the families studied here is a planar predator-prey system, a
Lotka-Volterra competition pair or a resource with a subset of its consumers.
The helpers below solve those reduced problems along their isoclines and
return raw candidate points; classification happens in analysis.equilibria.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from utils.exceptions import ConvergenceError

logger = logging.getLogger(__name__)


def bracket_roots(func: Callable[[float], float], lower: float, upper: float, samples: int) -> List[float]:
    """
    Roots of a scalar function on the open interval (lower, upper).

    The interval is sampled uniformly; every sign change between consecutive
    finite samples is refined with brentq. Sample points that are exact zeros
    are returned as they are.
    """
    grid = np.linspace(lower, upper, samples + 1)[1:-1]
    values = np.array([func(x) for x in grid], dtype=float)
    roots = []
    for i, (x, v) in enumerate(zip(grid, values)):
        if v == 0.0:
            roots.append(float(x))
            continue
        if i + 1 == grid.size:
            break
        w = values[i + 1]
        if not (np.isfinite(v) and np.isfinite(w)) or w == 0.0:
            continue
        if v * w < 0:
            try:
                roots.append(float(brentq(func, x, grid[i + 1], xtol=1e-14, rtol=1e-14, maxiter=200)))
            except (RuntimeError, ValueError) as e:
                raise ConvergenceError(f"brentq on [{x:.6g}, {grid[i + 1]:.6g}]") from e
    return roots


def bazykin_cubic(r: float, K: float, q: float, a: float, c: float, mu: float, m: float) -> np.ndarray:
    """
    Coefficients (Omega3, Omega2, Omega1, Omega0) of the cubic whose roots in
    (0, K) are the prey coordinates of positive equilibria.
    """
    return np.array([
        -a ** 2 * m * r,
        a ** 2 * K * m * r - 2 * a * m * r,
        a * mu * K * q - c * K * q ** 2 - m * r + 2 * a * K * m * r,
        mu * K * q + K * m * r,
    ])


def predator_threshold(q: float, a: float, c: float, mu: float) -> Optional[float]:
    """mu/(c q - a mu), or None when the denominator is not positive."""
    denominator = c * q - a * mu
    if denominator <= 0:
        return None
    return mu / denominator


def predator_prey_face(
    r: float, K: float, q: float, a: float, c: float, mu: float, m: float,
) -> List[Tuple[float, float]]:
    """
    Positive equilibria (x, y) of

        x' = x (r (1 - x/K) - q y/(1 + a x))
        y' = y (c q x/(1 + a x) - mu - m y)

    m = 0 has at most one, at x = mu/(c q - a mu). m < 0 is accepted; the
    predator isocline then slopes the other way but the cubic is unchanged.
    """
    if m == 0:
        xb = predator_threshold(q, a, c, mu)
        if xb is None or not 0 < xb < K:
            return []
        return [(xb, r * (1 - xb / K) * (1 + a * xb) / q)]

    points = []
    for root in np.roots(bazykin_cubic(r, K, q, a, c, mu, m)):
        if abs(root.imag) > 1e-9 * max(1.0, abs(root.real)):
            continue
        x = float(root.real)
        if not 0 < x < K:
            continue
        y = (c * q * x / (1 + a * x) - mu) / m
        if y > 0:
            points.append((x, y))
    return sorted(points)


def lv_competition_point(
    r1: float, K1: float, r2: float, K2: float, alpha12: float, alpha21: float,
) -> Optional[Tuple[float, float]]:
    """
    Interior equilibrium of the Lotka-Volterra competition pair

        x' = x (r1 (1 - x/K1) - alpha12 y),  y' = y (r2 (1 - y/K2) - alpha21 x)

    Returns None when the linear system is singular. The point may have
    non-positive coordinates; callers check positivity.
    """
    det = r1 * r2 / (K1 * K2) - alpha12 * alpha21
    if abs(det) < 1e-14:
        return None
    return (
        r2 * (r1 / K2 - alpha12) / det,
        r1 * (r2 / K1 - alpha21) / det,
    )


def two_predator_interior(p, samples: int) -> List[np.ndarray]:
    """
    Positive equilibria of the two-predator system from the prey coordinate.

    With m1 != 0 and m2 != 0 the predator isoclines give y(x) and z(x), and the
    prey equation becomes a scalar function of x. m2 = 0 pins x to z^b.
    """

    def y_of(x):
        return (p.c1 * p.q1 * x / (1 + p.a1 * x) - p.mu1) / p.m1

    def z_of(x):
        return (p.c2 * p.q2 * x / (1 + p.a2 * x) - p.mu2) / p.m2

    def prey(x, y, z):
        return p.r * (1 - x / p.K) - p.q1 * y / (1 + p.a1 * x) - p.q2 * z / (1 + p.a2 * x)

    if p.m2 == 0:
        zb = predator_threshold(p.q2, p.a2, p.c2, p.mu2)
        if zb is None or not 0 < zb < p.K:
            return []
        y = y_of(zb)
        z = (p.r * (1 - zb / p.K) - p.q1 * y / (1 + p.a1 * zb)) * (1 + p.a2 * zb) / p.q2
        return [np.array([zb, y, z])] if y > 0 and z > 0 else []

    roots = bracket_roots(lambda x: prey(x, y_of(x), z_of(x)), 0.0, p.K, samples)
    points = []
    for x in roots:
        y, z = y_of(x), z_of(x)
        if y > 0 and z > 0:
            points.append(np.array([x, y, z]))
    return points


def symmetric_face(
    c1: float, mu: float, m: float, share: float, diagonal: bool, samples: int,
) -> List[Tuple[float, float]]:
    """
    Positive equilibria (u, z) of the shared-response system restricted to one
    prey (share = r_i) or to the diagonal u = x = y (share = r1 + r2, diagonal=True).

    On one prey the response denominator is 1 + u; on the diagonal it is
    1 + 2u. Both reduce to z = (2 - u) d(u)/3 from the prey equation.
    """
    def denominator(u):
        return 1 + (2 * u if diagonal else u)

    def predator(u):
        d = denominator(u)
        z = (2 - u) * d / 3
        return 3 * c1 * share * u / d - mu - m * z

    points = []
    for u in bracket_roots(predator, 0.0, 2.0, samples):
        z = (2 - u) * denominator(u) / 3
        if z > 0:
            points.append((u, z))
    return points


def resource_roots(
    h: Callable[[float], float], K: float, samples: int,
) -> List[float]:
    """Roots of a resource balance function on (0, K), including K itself when h(K) = 0."""
    roots = bracket_roots(h, 0.0, K, samples)
    if abs(h(K)) < 1e-13:
        roots.append(float(K))
    return roots


def subset_balance(model, subset: Sequence[int]):
    """
    Balance function of a competition model restricted to a consumer subset.

    Returns (h, y_of) where h(x) = q_S M_S^{-1} (x kappa_S - mu_S) - r g(x) and
    y_of(x) = M_S^{-1} (x kappa_S - mu_S). Raises numpy.linalg.LinAlgError
    when M_S is singular.
    """
    idx = list(subset)
    M = model.matrix[np.ix_(idx, idx)]
    inverse = np.linalg.inv(M)
    q = np.array(model.q)[idx]
    kappa = model.kappa[idx]
    mu = np.array(model.mu)[idx]

    def y_of(x):
        return inverse @ (x * kappa - mu)

    def h(x):
        return float(q @ y_of(x) - model.r * model.growth(x))

    return h, y_of
