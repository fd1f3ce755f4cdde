"""
Hopf curves in two-parameter planes and tables of Hopf coefficients.
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from bifurcation.normal_form import first_lyapunov_coefficient
from bifurcation.thresholds import BifurcationPoint, hopf_threshold_ch3, hopf_threshold_ch4
from bifurcation.transversality import transversality
from utils.exceptions import NumericalError, ParameterError, TheoremPreconditionError
from utils.logging_config import log_function_call, log_processing_progress

logger = logging.getLogger(__name__)

# family -> (threshold function, its argument names, parameter it returns)
CURVE_FAMILIES: Dict[str, tuple] = {
    "two_predator_rescaled": (hopf_threshold_ch3, ("K", "q1"), "m2"),
    "two_prey_canonical": (hopf_threshold_ch4, ("r1", "r2", "K2", "c1"), "m"),
}


@dataclass
class CurvePoint:
    param1: float
    param2: float
    omega: float
    nu: float
    l1: Optional[float] = None

    def row(self) -> list:
        return [repr(self.param1), repr(self.param2), repr(self.omega), repr(self.nu),
                "" if self.l1 is None else repr(self.l1)]


@dataclass
class HopfCurve:
    family: str
    sweep: str
    threshold: str
    fixed: Dict[str, float]
    points: List[CurvePoint] = field(default_factory=list)
    skipped: List[float] = field(default_factory=list)

    def to_csv(self, path: Path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["param1", "param2", "omega", "nu", "l1"])
            for point in self.points:
                writer.writerow(point.row())

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "param1": self.sweep,
            "param2": self.threshold,
            "fixed": self.fixed,
            "points": len(self.points),
            "skipped": self.skipped,
        }


def _threshold_call(family: str) -> tuple:
    if family not in CURVE_FAMILIES:
        raise ParameterError("family", family, f"one of {sorted(CURVE_FAMILIES)}")
    return CURVE_FAMILIES[family]


@log_function_call
def hopf_curve_trace(
    family: str,
    fixed: Dict[str, float],
    sweep: str,
    values: Sequence[float],
    with_l1: bool = False,
    max_workers: int = 4,
) -> HopfCurve:
    """
    Closed-form Hopf threshold along a one-parameter sweep.

    Sweep values outside the hypothesis region are skipped and listed; each
    kept point passed the spectrum check of its threshold function.

    Raises:
        ParameterError: unknown family, or `sweep`/`fixed` do not cover the arguments
        TheoremPreconditionError: no sweep value lies in the hypothesis region
    """
    func, arguments, threshold = _threshold_call(family)
    if sweep not in arguments or set(fixed) | {sweep} != set(arguments):
        raise ParameterError("sweep", sweep, f"fixed and swept parameters must be exactly {arguments}")

    values = [float(v) for v in values]
    results: List[Optional[CurvePoint]] = [None] * len(values)

    def run(index: int) -> int:
        kwargs = {**fixed, sweep: values[index]}
        try:
            point = func(**kwargs)
        except TheoremPreconditionError as e:
            logger.debug(f"{sweep}={values[index]!r} outside region: {e}")
            return index
        l1 = None
        if with_l1:
            try:
                l1 = first_lyapunov_coefficient(point.model, point.location).l1
            except NumericalError as e:
                logger.warning(f"l1 failed at {sweep}={values[index]!r}: {e}")
        results[index] = CurvePoint(values[index], point.params[threshold], point.omega, point.nu, l1)
        return index

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        for done, _ in enumerate(executor.map(run, range(len(values))), start=1):
            log_processing_progress(done, len(values), logger)

    curve = HopfCurve(family=family, sweep=sweep, threshold=threshold, fixed=dict(fixed))
    for value, point in zip(values, results):
        if point is None:
            curve.skipped.append(value)
        else:
            curve.points.append(point)
    if not curve.points:
        raise TheoremPreconditionError(f"{family} Hopf hypotheses along {sweep} in [{min(values)}, {max(values)}]")
    return curve


@dataclass
class TableRow:
    c1: float
    r1: float
    r2: float
    K2: float
    m0: Optional[float] = None
    l1: Optional[float] = None
    d_re: Optional[float] = None
    error: str = ""

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("c1", "r1", "r2", "K2", "m0", "l1", "d_re", "error")}


def _table_cell(c1: float, r1: float, r2: float, K2: float, convention: str) -> TableRow:
    row = TableRow(c1, r1, r2, K2)
    try:
        point: BifurcationPoint = hopf_threshold_ch4(r1, r2, K2, c1, strict=False)
        row.m0 = point.params["m"]
        row.d_re = transversality(point, "m").value
        row.l1 = first_lyapunov_coefficient(point.model, point.location, convention).l1
    except (TheoremPreconditionError, NumericalError) as e:
        row.error = str(e)
    return row


@log_function_call
def hopf_coefficient_table(
    c1: float,
    r1_values: Sequence[float],
    r2_values: Sequence[float],
    K2_values: Sequence[float],
    convention: str = "tabulated",
    max_workers: int = 4,
) -> List[TableRow]:
    """
    l1 and dRe(lambda)/dm at the canonical two-prey Hopf threshold over a grid.

    Rows are ordered by r1, then r2, then K2; a cell outside the hypothesis
    region keeps its error message instead of values.
    """
    cells = [(r1, r2, K2) for r1 in r1_values for r2 in r2_values for K2 in K2_values]
    rows: List[Optional[TableRow]] = [None] * len(cells)

    def run(index: int) -> int:
        r1, r2, K2 = cells[index]
        rows[index] = _table_cell(c1, r1, r2, K2, convention)
        return index

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        for done, _ in enumerate(executor.map(run, range(len(cells))), start=1):
            log_processing_progress(done, len(cells), logger)

    failed = sum(1 for r in rows if r.error)
    if failed:
        logger.warning(f"{failed}/{len(rows)} table cells failed")
    return rows


def table_to_csv(rows: Sequence[TableRow], path: Path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["c1", "r1", "r2", "K2", "m0", "l1", "d_re", "error"])
        for r in rows:
            writer.writerow([
                repr(r.c1), repr(r.r1), repr(r.r2), repr(r.K2),
                *("" if v is None else repr(v) for v in (r.m0, r.l1, r.d_re)),
                r.error,
            ])
