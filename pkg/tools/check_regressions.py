#!/usr/bin/env python3
"""
Regression checker for tabulated values.

Parses tests/regression_cases.txt lines of the form:
  case arg1 arg2 ... => expected ~tolerance

and evaluates each case through the library. These are the values whose
magnitude depends on estimator or normal-form conventions, so they are kept
out of the unit tests and reported together here.
"""
import re
import sys
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
CASES_FILE = ROOT / "tests" / "regression_cases.txt"

sys.path.insert(0, str(ROOT))

from analysis.bazykin import triple_window
from analysis.invasion import invasion_threshold
from analysis.predators import ch3_existence_threshold
from bifurcation.normal_form import first_lyapunov_coefficient
from bifurcation.thresholds import hopf_m0, hopf_threshold_ch3, hopf_threshold_ch4
from bifurcation.transversality import transversality
from chaos.dimension import box_counting, correlation_dimension
from chaos.lyapunov import lyapunov_regression
from chaos.spectral import power_spectrum
from chaos.suite import attractor_window
from dynamics.integrator import IntegratorConfig, integrate
from pipeline.orchestrator import load_scenario
from utils.config_loader import read_scenario_file

Case = Tuple[str, List[str], float, Optional[float], bool]

CASE_PATTERN = re.compile(r"^(\S+)((?:\s+\S+)*?)\s*=>\s*(\S+)\s*~\s*([^\s%]+)(%?)$")


def parse_case(line: str) -> Optional[Case]:
    line = line.strip()
    if not line or line.startswith('#'):
        return None
    m = CASE_PATTERN.match(line)
    if not m:
        return None
    name, args, expected, tolerance, relative = m.groups()
    # "~sign" keeps only the sign of the expected value
    bound = None if tolerance == "sign" else float(tolerance)
    return name, args.split(), float(expected), bound, bool(relative)


@lru_cache(maxsize=None)
def preset(name: str):
    return load_scenario(read_scenario_file(name))


@lru_cache(maxsize=None)
def attractor(name: str):
    scenario = preset(name)
    start, end = scenario.chaos.window
    cfg = IntegratorConfig(t_span=(0.0, end), sample_dt=scenario.chaos.sample_dt)
    return attractor_window(integrate(scenario.model, scenario.state, cfg), start, end)


def canonical_point(c1: str, r1: str, r2: str, K2: str):
    return hopf_threshold_ch4(float(r1), float(r2), float(K2), float(c1), strict=False)


def predator_point(K: str, q1: str):
    return hopf_threshold_ch3(float(K), float(q1))


def l1_at(point) -> float:
    return first_lyapunov_coefficient(point.model, point.location).l1


def box_dimension(name: str, projection: str) -> float:
    traj = attractor(name)
    points = np.column_stack([traj.column(axis) for axis in projection])
    return box_counting(points).dimension


@lru_cache(maxsize=None)
def separation(name: str):
    scenario = preset(name)
    block = scenario.chaos
    return lyapunov_regression(
        scenario.model, scenario.state, h=block.h, T=block.lyapunov_T, dt=block.lyapunov_dt,
        window_fraction=block.window_fraction,
    )


def invasion(name: str):
    scenario = preset(name)
    return invasion_threshold(scenario.model, scenario.state)


HANDLERS: Dict[str, Callable[..., float]] = {
    "hopf_m0": lambda r1, r2, K2, c1: hopf_m0(float(r1), float(r2), float(K2), float(c1)),
    "l1_canonical": lambda *args: l1_at(canonical_point(*args)),
    "dre_canonical": lambda *args: transversality(canonical_point(*args), "m").value,
    "l1_predators": lambda K, q1: l1_at(predator_point(K, q1)),
    "dre_predators": lambda K, q1: transversality(predator_point(K, q1), "m2").value,
    "bazykin_window_low": lambda name: triple_window(preset(name).model).bounds[0],
    "bazykin_window_high": lambda name: triple_window(preset(name).model).bounds[1],
    "invasion_x_tilde": lambda name: invasion(name).x_tilde,
    "invasion_r2_min": lambda name: invasion(name).r2_min,
    "ch3_threshold": lambda name: ch3_existence_threshold(preset(name).model),
    "box_dimension": box_dimension,
    "correlation_d2": lambda name: correlation_dimension(attractor(name).column("x")).D2,
    "spectrum_energy": lambda name, axis: power_spectrum(attractor(name).column(axis)).energy,
    "lyapunov_slope": lambda name, axis: separation(name).fits[axis].slope,
}


def check_case(name: str, args: List[str], expected: float, tolerance: Optional[float], relative: bool) -> Tuple[bool, str]:
    handler = HANDLERS.get(name)
    if handler is None:
        return False, "unknown case"
    try:
        got = float(handler(*args))
    except Exception as e:
        return False, f"{type(e).__name__}: {e}"
    if tolerance is None:
        return np.sign(got) == np.sign(expected), repr(got)
    allowed = tolerance / 100 * abs(expected) if relative else tolerance
    return abs(got - expected) <= allowed, repr(got)


def main() -> int:
    cases = []
    with open(CASES_FILE, 'r', encoding='utf-8') as f:
        for line in f:
            parsed = parse_case(line)
            if parsed:
                cases.append(parsed)

    total = len(cases)
    passed = 0
    failures = []

    for name, args, expected, tolerance, relative in cases:
        ok, got = check_case(name, args, expected, tolerance, relative)
        if ok:
            passed += 1
        else:
            failures.append((name, " ".join(args), expected, got))

    print(f"Checked {total} cases: {passed} passed, {len(failures)} failed.")
    if failures:
        print("\nFailures:")
        for name, args, expected, got in failures:
            print(f" - {name} {args}: expected {expected!r}, got {got}")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
