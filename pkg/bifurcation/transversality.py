"""
Speed at which the complex eigenvalue pair crosses the imaginary axis.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from analysis.equilibria import polish
from bifurcation.normal_form import time_scale
from bifurcation.thresholds import BifurcationPoint
from utils.exceptions import EigenpairTrackingError, ParameterError

logger = logging.getLogger(__name__)

TRACKING_FRACTION = 0.1


@dataclass
class Transversality:
    parameter: str
    value: float
    coarse: float
    richardson: float
    scale: float

    @property
    def richardson_gap(self) -> float:
        return abs(self.richardson - self.value) / max(abs(self.value), 1e-300)

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "d_re": self.value,
            "d_re_coarse": self.coarse,
            "d_re_richardson": self.richardson,
            "time_scale": self.scale,
        }


def _perturbed(model, name: str, value: float):
    data = model.model_dump()
    if name not in data:
        raise ParameterError("parameter", name, f"a field of {type(model).__name__}")
    data[name] = value
    return type(model)(**data)


def _track(reference: complex, spectrum: np.ndarray, others: np.ndarray) -> complex:
    """Eigenvalue of `spectrum` continuing `reference`; fails when it moved past 10% of the gap."""
    distances = np.abs(spectrum - reference)
    k = int(np.argmin(distances))
    gap = float(np.min(np.abs(others - reference))) if others.size else np.inf
    if distances[k] > TRACKING_FRACTION * gap:
        raise EigenpairTrackingError(
            f"Eigenvalue {reference} moved {distances[k]:.3e}, more than "
            f"{TRACKING_FRACTION:.0%} of its spectral gap {gap:.3e}"
        )
    return complex(spectrum[k])


def transversality(
    point: BifurcationPoint,
    parameter: Optional[str] = None,
    delta: float = 1e-5,
) -> Transversality:
    """
    Central difference of Re(lambda) of the complex pair with respect to `parameter`.

    The equilibrium is re-polished at each perturbed parameter and the pair is
    followed by nearest match. Two step sizes give the value at delta/2 and a
    Richardson extrapolation. Families reported in polynomial time are scaled
    by the time factor at the equilibrium.

    Raises:
        ParameterError: unknown parameter or delta <= 0
        EigenpairTrackingError: the pair cannot be followed
    """
    if not delta > 0:
        raise ParameterError("delta", delta, "delta > 0")
    name = parameter or point.parameter
    model = point.model
    base = float(getattr(model, name)) if hasattr(model, name) else None
    if base is None:
        raise ParameterError("parameter", name, f"a field of {type(model).__name__}")

    def spectrum_at(value: float) -> np.ndarray:
        shifted = _perturbed(model, name, value)
        location = polish(shifted, point.location)
        return np.linalg.eigvals(time_scale(shifted, location) * shifted.jacobian(location))

    reference_spectrum = np.linalg.eigvals(time_scale(model, point.location) * model.jacobian(point.location))
    k = int(np.argmax(reference_spectrum.imag))
    reference = complex(reference_spectrum[k])
    others = np.delete(reference_spectrum, k)

    def derivative(h: float) -> float:
        up = _track(reference, spectrum_at(base + h), others)
        down = _track(reference, spectrum_at(base - h), others)
        return (up.real - down.real) / (2 * h)

    coarse = derivative(delta)
    fine = derivative(delta / 2)
    result = Transversality(
        parameter=name,
        value=fine,
        coarse=coarse,
        richardson=(4 * fine - coarse) / 3,
        scale=time_scale(model, point.location),
    )
    if result.richardson_gap > 1e-4:
        logger.warning(f"Transversality d/d{name} not converged: {coarse:.9g} vs {fine:.9g}")
    if result.value == 0:
        logger.warning(f"Transversality d/d{name} vanishes; Hopf not certified")
    return result
