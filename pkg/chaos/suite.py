"""
All chaos diagnostics on one long trajectory.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from analysis.equilibria import EquilibriumReport, boundary_equilibria
from chaos.dimension import BoxCount, CorrelationEstimate, box_counting, correlation_dimension
from chaos.heteroclinic import HeteroclinicCheck, heteroclinic_residual
from chaos.lyapunov import LyapunovEstimate, lyapunov_regression
from chaos.spectral import SpectrumResult, ZeroOneResult, power_spectrum, zero_one_test
from dynamics.integrator import IntegratorConfig, Trajectory, integrate
from utils.exceptions import EmptyWindowError, TheoremPreconditionError
from utils.logging_config import log_function_call

logger = logging.getLogger(__name__)

PROJECTIONS = (("x", "y"), ("x", "z"), ("y", "z"))
EXCLUDED_FACES = ("E3", "E4")


def check_boundary_structure(model) -> List[EquilibriumReport]:
    """
    Boundary equilibria, requiring none on the (x, y, 0) and (0, y, z) faces.

    Raises:
        TheoremPreconditionError: such an equilibrium exists
    """
    reports = boundary_equilibria(model)
    offending = [r for r in reports if r.label in EXCLUDED_FACES]
    if offending:
        where = ", ".join(f"{r.label}={tuple(round(float(v), 6) for v in r.location)}" for r in offending)
        raise TheoremPreconditionError(f"no boundary equilibrium of type E3 or E4 (found {where})")
    return reports


@dataclass
class ChaosReport:
    window: Tuple[float, float]
    samples: int
    boundary: List[EquilibriumReport] = field(default_factory=list)
    box: Dict[str, BoxCount] = field(default_factory=dict)
    correlation: Optional[CorrelationEstimate] = None
    spectra: Dict[str, SpectrumResult] = field(default_factory=dict)
    zero_one: Dict[str, ZeroOneResult] = field(default_factory=dict)
    lyapunov: Optional[LyapunovEstimate] = None
    heteroclinic: List[HeteroclinicCheck] = field(default_factory=list)
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "samples": self.samples,
            "boundary": [r.to_dict() for r in self.boundary],
            "box_counting": {k: v.to_dict() for k, v in self.box.items()},
            "correlation": self.correlation.to_dict() if self.correlation else None,
            "power_spectrum": {k: v.to_dict() for k, v in self.spectra.items()},
            "zero_one": {k: v.to_dict() for k, v in self.zero_one.items()},
            "lyapunov": self.lyapunov.to_dict() if self.lyapunov else None,
            "heteroclinic": [h.to_dict() for h in self.heteroclinic],
        }

    def write_tables(self, out_dir: Path) -> List[Path]:
        out_dir = Path(out_dir)
        written = []
        if self.trajectory is not None:
            written.append(out_dir / "chaos_trajectory.csv")
            self.trajectory.to_csv(written[-1])
        for name, box in self.box.items():
            written.append(out_dir / f"box_counting_{name}.csv")
            box.to_csv(written[-1])
        if self.correlation is not None:
            written.append(out_dir / "correlation_sums.csv")
            self.correlation.to_csv(written[-1])
        for name, spectrum in self.spectra.items():
            written.append(out_dir / f"power_spectrum_{name}.csv")
            spectrum.to_csv(written[-1])
        for name, result in self.zero_one.items():
            written.append(out_dir / f"zero_one_{name}.csv")
            result.to_csv(written[-1])
        if self.lyapunov is not None:
            written.append(out_dir / "lyapunov_separation.csv")
            self.lyapunov.to_csv(written[-1])
        return written


def attractor_window(traj: Trajectory, start: float, end: float) -> Trajectory:
    """Samples with start < t <= end."""
    mask = (traj.times > start) & (traj.times <= end + 1e-9)
    if mask.sum() < 2:
        raise EmptyWindowError(f"attractor window ({start}, {end}]", int(mask.sum()))
    return Trajectory(traj.times[mask], traj.states[mask], traj.stats, traj.coordinate_names)


@log_function_call
def chaos_suite(
    model,
    s0: Sequence[float],
    window: Tuple[float, float] = (9000.0, 10000.0),
    sample_dt: float = 0.25,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    h: float = 1e-4,
    lyapunov_T: float = 2000.0,
    lyapunov_dt: float = 0.1,
    window_fraction: Optional[float] = 0.6,
    n_scales: int = 20,
    box_ratio: float = math.sqrt(2.0),
    correlation_coordinate: str = "x",
    m_values: Sequence[int] = range(1, 16),
    entropy_m_values: Sequence[int] = range(1, 12),
    c_draws: int = 100,
    zero_one_threshold: float = 0.9,
    seed: int = 20240611,
    heteroclinic_c: Sequence[float] = (0.5, 0.9),
    check_structure: bool = True,
    max_workers: int = 4,
) -> ChaosReport:
    """
    Integrate to the end of `window`, then run every diagnostic on the samples
    inside it; the Lyapunov fit uses its own integration from s0.
    """
    boundary = check_boundary_structure(model) if check_structure else []

    cfg = IntegratorConfig(t_span=(0.0, float(window[1])), rel_tol=rel_tol, abs_tol=abs_tol, sample_dt=sample_dt)
    traj = attractor_window(integrate(model, s0, cfg), *window)
    report = ChaosReport(window=tuple(window), samples=int(traj.times.size), boundary=boundary, trajectory=traj)
    logger.info(f"Attractor window {window}: {traj.times.size} samples")

    for a, b in PROJECTIONS:
        points = np.column_stack([traj.column(a), traj.column(b)])
        report.box[a + b] = box_counting(points, n_scales=n_scales, ratio=box_ratio)

    report.correlation = correlation_dimension(
        traj.column(correlation_coordinate), m_values=m_values,
        entropy_m_values=entropy_m_values, max_workers=max_workers,
    )

    for name in traj.coordinate_names:
        series = traj.column(name)
        report.spectra[name] = power_spectrum(series)
        report.zero_one[name] = zero_one_test(
            series, c_draws=c_draws, seed=seed, threshold=zero_one_threshold, max_workers=max_workers,
        )

    report.lyapunov = lyapunov_regression(
        model, s0, h=h, T=lyapunov_T, dt=lyapunov_dt, window_fraction=window_fraction,
        rel_tol=rel_tol, abs_tol=abs_tol, max_workers=max_workers,
    )

    t_grid = np.linspace(0.0, 20.0, 201)
    for axis in ("x", "y"):
        for c in heteroclinic_c:
            report.heteroclinic.append(heteroclinic_residual(model, c, t_grid, axis))
    return report
