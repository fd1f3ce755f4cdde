"""
Scenario runner that dispatches command-line commands to the library.

Each command reads a validated `Scenario`, calls the analysis operations and
writes a JSON summary plus CSV tables into the output directory. Nothing
written here carries a timestamp, so identical scenarios give identical files.
"""

import csv
import json
import math
import time
from functools import singledispatch
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from analysis.bazykin import bazykin_analysis
from analysis.competition import (
    coexistence_membership,
    finite_difference_sensitivity,
    global_stability_certificate,
    lyapunov_function,
    resource_equilibrium,
    sensitivity,
    sweep_competition,
    third_consumer_invasion,
)
from analysis.equilibria import EquilibriumReport, boundary_equilibria, classify, eee, positive_equilibria
from analysis.hyperbola import hyperbola
from analysis.invasion import (
    classify_outcome,
    invasion_threshold,
    invasion_threshold_fluctuating,
    resident_submodel,
    sweep,
)
from analysis.predators import ch3_exclusion, ch3_existence_threshold, ch3_uniqueness
from analysis.two_prey import boundary_invasion_rates, ch4_existence_check, ch4_rescaled_stability
from averaging.averaged import periodic_orbit_prediction
from averaging.poincare import poincare_validate
from bifurcation.curves import CURVE_FAMILIES, hopf_coefficient_table, hopf_curve_trace, table_to_csv
from bifurcation.normal_form import center_manifold_quadratic, first_lyapunov_coefficient
from bifurcation.thresholds import (
    BifurcationPoint,
    bazykin_hopf,
    hopf_threshold_ch3,
    hopf_threshold_ch4,
    zero_hopf_ch4,
    zero_hopf_symmetric,
)
from bifurcation.transversality import transversality
from chaos.suite import chaos_suite
from dynamics.bounds import absorbing_bound
from dynamics.integrator import IntegratorConfig, integrate, persistence_margin
from models.bazykin import BazykinModel
from models.competition import CompetitionModel
from models.predators import RescaledTwoPredatorModel, TwoPredatorDynamics
from models.prey import CanonicalTwoPreyModel, RescaledTwoPreyModel, SymmetricTwoPreyModel, TwoPreyDynamics, TwoPreyModel
from pipeline.schemas import Scenario
from utils.exceptions import ConfigurationError, PopdynError, TheoremPreconditionError, UnsupportedModelError
from utils.logging_config import LoggerMixin

COMMANDS = (
    "simulate", "equilibria", "classify", "stability-cert", "sensitivity", "invade", "sweep",
    "hopf", "zero-hopf", "l1", "average", "poincare", "chaos", "bound", "center-manifold",
)


def jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [jsonable(value.real), jsonable(value.imag)]
    return value


def _with_parameter(model, name: str, value: float):
    return type(model).model_validate({**model.model_dump(), name: value})


@singledispatch
def hopf_point(model) -> BifurcationPoint:
    """Hopf point of the model's family at its own fixed parameters."""
    raise UnsupportedModelError("hopf", model.family)


@hopf_point.register
def _(model: RescaledTwoPredatorModel) -> BifurcationPoint:
    return hopf_threshold_ch3(model.K, model.q1)


@hopf_point.register
def _(model: CanonicalTwoPreyModel) -> BifurcationPoint:
    return hopf_threshold_ch4(model.r1, model.r2, model.K2, model.c1)


@hopf_point.register
def _(model: BazykinModel) -> BifurcationPoint:
    return bazykin_hopf(model).point


@singledispatch
def zero_hopf_point(model) -> BifurcationPoint:
    raise UnsupportedModelError("zero-hopf", model.family)


@zero_hopf_point.register
def _(model: CanonicalTwoPreyModel) -> BifurcationPoint:
    return zero_hopf_ch4(model.r1, model.r2, model.K2)


@zero_hopf_point.register
def _(model: SymmetricTwoPreyModel) -> BifurcationPoint:
    return zero_hopf_symmetric(model.r1, model.r2)


@singledispatch
def family_checks(model) -> Dict[str, Callable[[], Any]]:
    """Family-specific existence and stability statements, evaluated lazily."""
    return {}


@family_checks.register
def _(model: CompetitionModel) -> Dict[str, Callable[[], Any]]:
    return {"resource_equilibrium": lambda: resource_equilibrium(model).to_dict()}


@family_checks.register
def _(model: TwoPredatorDynamics) -> Dict[str, Callable[[], Any]]:
    return {
        "existence_threshold": lambda: ch3_existence_threshold(model),
        "uniqueness": lambda: {k: v.to_dict() for k, v in ch3_uniqueness(model).items()},
        "exclusion": lambda: ch3_exclusion(model).to_dict(),
    }


@family_checks.register
def _(model: TwoPreyDynamics) -> Dict[str, Callable[[], Any]]:
    checks = {
        "hyperbola": lambda: hyperbola(model).to_dict(),
        "existence_chain": lambda: ch4_existence_check(model).to_dict(),
        "invasion_rates": lambda: [r.to_dict() for r in boundary_invasion_rates(model)],
    }
    if isinstance(model, RescaledTwoPreyModel):
        checks["rescaled_stability"] = lambda: ch4_rescaled_stability(model).to_dict()
    return checks


@family_checks.register
def _(model: BazykinModel) -> Dict[str, Callable[[], Any]]:
    def summary():
        data = bazykin_analysis(model).to_dict()
        return {k: data[k] for k in ("cubic", "window", "flags")}
    return {"bazykin": summary}


def _write_rows(path: Path, header: List[str], rows: List[List[Any]]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _equilibria_rows(reports: List[EquilibriumReport]) -> List[List[Any]]:
    return [[r.label, r.type, r.stable, *(float(v) for v in r.location)] for r in reports]


class ScenarioRunner(LoggerMixin):
    """
    Runs one command of the command-line interface against a scenario.
    """

    def __init__(
        self,
        config: Dict[str, Any],
        output_dir: Path,
        max_workers: Optional[int] = None,
        seed: Optional[int] = None,
    ):
        """
        Args:
            config: Application configuration dictionary
            output_dir: Directory for summaries and tables
            max_workers: Worker pool size (default: config concurrency.max_workers)
            seed: Seed of the randomised diagnostics (default: config chaos.seed)
        """
        self.config = config
        self.output_dir = Path(output_dir)
        self.max_workers = max_workers or config["concurrency"]["max_workers"]
        self.seed = config["chaos"]["seed"] if seed is None else seed
        self.handlers: Dict[str, Callable[[Scenario], Dict[str, Any]]] = {
            "simulate": self.simulate,
            "equilibria": self.equilibria,
            "classify": self.classify,
            "stability-cert": self.stability_cert,
            "sensitivity": self.sensitivity,
            "invade": self.invade,
            "sweep": self.sweep,
            "hopf": self.hopf,
            "zero-hopf": self.zero_hopf,
            "l1": self.l1,
            "average": self.average,
            "poincare": self.poincare,
            "chaos": self.chaos,
            "bound": self.bound,
            "center-manifold": self.center_manifold,
        }
        self.stats = {"commands_run": 0, "tables_written": 0, "processing_time_total": 0.0}

    def run(self, command: str, scenario: Scenario) -> Dict[str, Any]:
        """
        Run `command` and write `<command>_summary.json`.

        Returns:
            The JSON-ready summary

        Raises:
            ConfigurationError: unknown command or a scenario the command cannot use
            NumericalError, TheoremPreconditionError: from the library
        """
        if command not in self.handlers:
            raise ConfigurationError(f"Unknown command '{command}'; expected one of {', '.join(COMMANDS)}")
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.logger.info(f"Running {command} on scenario '{scenario.name}' ({scenario.model.family})")

        start = time.time()
        body = self.handlers[command](scenario)
        self.stats["commands_run"] += 1
        self.stats["processing_time_total"] += time.time() - start

        summary = jsonable({"command": command, "scenario": scenario.name, "model": scenario.model.summary(), **body})
        path = self.output_dir / f"{command.replace('-', '_')}_summary.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(summary, f, indent=2, sort_keys=True)
            f.write("\n")
        self.logger.info(f"Summary written to {path}")
        return summary

    def _table(self, name: str) -> Path:
        self.stats["tables_written"] += 1
        return self.output_dir / name

    def _integrator(self, scenario: Scenario, t_span=None, **overrides) -> IntegratorConfig:
        block = scenario.integrator
        values = {
            "rel_tol": block.rel_tol,
            "abs_tol": block.abs_tol,
            "max_step": block.max_step,
            "sample_dt": block.sample_dt,
        }
        values.update(overrides)
        return IntegratorConfig.from_settings(self.config["integrator"], t_span or block.t_span, **values)

    def _require_state(self, scenario: Scenario) -> List[float]:
        if scenario.state is None:
            raise ConfigurationError("This command needs an [initial] state")
        return scenario.state

    def _require(self, scenario: Scenario, family: type, command: str):
        if not isinstance(scenario.model, family):
            raise UnsupportedModelError(command, scenario.model.family)
        return scenario.model

    # -- commands ---------------------------------------------------------

    def simulate(self, scenario: Scenario) -> Dict[str, Any]:
        traj = integrate(scenario.model, self._require_state(scenario), self._integrator(scenario))
        traj.to_csv(self._table("simulate.csv"))
        return {
            "samples": int(traj.times.size),
            "t_span": list(scenario.integrator.t_span),
            "final_state": traj.final_state,
            "min_population": persistence_margin(traj),
            "steps": vars(traj.stats),
        }

    def equilibria(self, scenario: Scenario) -> Dict[str, Any]:
        model = scenario.model
        settings = self.config["equilibria"]
        failures: List[dict] = []
        boundary = boundary_equilibria(
            model, settings["hyperbolicity_eps"], settings["grid_density"],
            settings["duplicate_tol"], settings["newton_max_iter"], failures,
        )
        positive = positive_equilibria(
            model, settings["grid_density"], settings["hyperbolicity_eps"],
            settings["duplicate_tol"], settings["newton_max_iter"],
        )
        _write_rows(
            self._table("equilibria.csv"),
            ["label", "type", "stable", *model.coordinate_names],
            _equilibria_rows(boundary + positive),
        )

        checks = {}
        for name, check in family_checks(model).items():
            try:
                checks[name] = check()
            except PopdynError as e:
                self.logger.warning(f"{name} check not available: {e}")
                checks[name] = {"error": str(e)}
        try:
            thresholds = eee(model).to_dict()
        except ConfigurationError:
            thresholds = None

        self.logger.info(f"{len(boundary)} boundary and {len(positive)} positive equilibria")
        return {
            "boundary": [r.to_dict() for r in boundary],
            "positive": [r.to_dict() for r in positive],
            "positive_count": len(positive),
            "failures": failures,
            "energy_thresholds": thresholds,
            "checks": checks,
        }

    def classify(self, scenario: Scenario) -> Dict[str, Any]:
        block = scenario.classify
        if block is None:
            raise ConfigurationError("classify needs a [classify] table with a point")
        report = classify(
            scenario.model, block.point, self.config["equilibria"]["hyperbolicity_eps"],
            block.accept_tol, block.label, self.config["equilibria"]["newton_max_iter"],
        )
        return {"equilibrium": report.to_dict()}

    def stability_cert(self, scenario: Scenario) -> Dict[str, Any]:
        model = self._require(scenario, CompetitionModel, "stability-cert")
        certificate = global_stability_certificate(model)
        body = {
            "certificate": certificate.to_dict(),
            "coexistence": coexistence_membership(model).to_dict(),
        }
        if scenario.state is not None and certificate.positive_definite:
            V = lyapunov_function(model)
            traj = integrate(model, scenario.state, self._integrator(scenario))
            inside = np.all(traj.states > 0, axis=1)
            times = traj.times[inside]
            values = np.array([V.value(s) for s in traj.states[inside]])
            derivatives = np.array([V.derivative(s) for s in traj.states[inside]])
            _write_rows(
                self._table("lyapunov_function.csv"), ["t", "V", "dV"],
                [[t, v, d] for t, v, d in zip(times, values, derivatives)],
            )
            body["lyapunov"] = {
                "samples": int(values.size),
                "max_derivative": float(derivatives.max()) if values.size else None,
                "non_increasing": bool(np.all(np.diff(values) <= 1e-9 * max(1.0, abs(values[0])))) if values.size else None,
            }
        third = scenario.stability.third_consumer
        if third is not None:
            body["third_consumer"] = third_consumer_invasion(model, **third.model_dump()).to_dict()
        return body

    def sensitivity(self, scenario: Scenario) -> Dict[str, Any]:
        model = self._require(scenario, CompetitionModel, "sensitivity")
        block = scenario.sensitivity
        entries = block.entries or [(i, j) for i in range(1, model.n + 1) for j in range(1, model.n + 1)]
        equilibrium = resource_equilibrium(model)
        rows = []
        for i, j in entries:
            analytic = sensitivity(model, i, j, equilibrium)
            numeric = finite_difference_sensitivity(model, i, j, block.delta)
            gap = abs(analytic - numeric) / max(abs(analytic), 1e-12)
            rows.append([i, j, analytic, numeric, gap])
        _write_rows(self._table("sensitivity.csv"), ["i", "j", "analytic", "finite_difference", "relative_gap"], rows)
        return {
            "x_star": equilibrium.x_star,
            "entries": [dict(zip(("i", "j", "analytic", "finite_difference", "relative_gap"), r)) for r in rows],
            "max_relative_gap": max(r[4] for r in rows) if rows else None,
        }

    def invade(self, scenario: Scenario) -> Dict[str, Any]:
        model = self._require(scenario, TwoPreyModel, "invade")
        state = scenario.state
        settings = self.config["invasion"]
        body = {"threshold": invasion_threshold(model, state).to_dict()}

        resident = resident_submodel(model)
        start = [0.5 * model.K1, 0.5] if state is None else [state[0], state[2]]
        block = scenario.invade
        traj = integrate(resident, start, self._integrator(scenario, (0.0, block.resident_t_end)))
        body["fluctuating"] = invasion_threshold_fluctuating(model, traj, block.burn_in_fraction).to_dict()

        if state is not None:
            body["outcome"] = classify_outcome(
                model, state, settings["settle_time"], settings["extinct_eps"],
            ).to_dict()
        return body

    def sweep(self, scenario: Scenario) -> Dict[str, Any]:
        block = scenario.sweep
        if block.kind == "competition":
            model = self._require(scenario, CompetitionModel, "sweep")
            rows = sweep_competition(model, block.entries, block.values)
            header = list(max(rows, key=len)) if rows else []
            with open(self._table("sweep.csv"), "w", newline="", encoding="utf-8") as f:
                writer = csv.DictWriter(f, fieldnames=header, restval="")
                writer.writeheader()
                for row in rows:
                    writer.writerow({k: ("" if v is None else repr(v)) for k, v in row.items()})
            return {"kind": "competition", "cells": len(rows), "without_equilibrium": sum(r["x_star"] is None for r in rows)}

        model = self._require(scenario, TwoPreyModel, "sweep")
        result = sweep(
            model, block.K2_range, block.a2_range, block.grid, self._require_state(scenario),
            T=block.T, extinct_eps=self.config["invasion"]["extinct_eps"], max_workers=self.max_workers,
        )
        result.to_csv(self._table("sweep.csv"))
        return {"kind": "invasion", "grid": list(block.grid), "counts": result.counts()}

    def hopf(self, scenario: Scenario) -> Dict[str, Any]:
        model = scenario.model
        point = hopf_point(model)
        body: Dict[str, Any] = {"transversality": transversality(point).to_dict()}
        point.transversality = body["transversality"]["value"]
        body["point"] = point.to_dict()

        block = scenario.hopf
        if block.sweep:
            family = model.family
            if family not in CURVE_FAMILIES:
                raise UnsupportedModelError("hopf curve", family)
            arguments = CURVE_FAMILIES[family][1]
            fixed = {name: float(getattr(model, name)) for name in arguments if name != block.sweep}
            curve = hopf_curve_trace(family, fixed, block.sweep, block.values, block.with_l1, self.max_workers)
            curve.to_csv(self._table("hopf_curve.csv"))
            body["curve"] = curve.to_dict()

        if block.trial_values:
            settings = self.config["averaging"]
            start = block.trial_state or scenario.state
            trials = []
            for value in block.trial_values:
                trial = _with_parameter(point.model, point.parameter, value)
                result = poincare_validate(
                    trial, s0=start, horizon=settings["return_horizon"], n_iterates=settings["n_iterates"],
                    start_offset=settings["start_offset"], collapse_fraction=settings["collapse_fraction"],
                )
                side = "below" if value < point.params[point.parameter] else "above"
                trials.append({point.parameter: value, "side": side, **result.to_dict()})
            body["trials"] = trials
        return body

    def zero_hopf(self, scenario: Scenario) -> Dict[str, Any]:
        point = zero_hopf_point(scenario.model)
        return {"point": point.to_dict(), "spectrum": point.spectrum, "on_threshold": point.on_threshold}

    def l1(self, scenario: Scenario) -> Dict[str, Any]:
        convention = self.config["normal_form"]["l1_convention"]
        body: Dict[str, Any] = {"l1_convention": convention}
        block = scenario.l1.table
        if block is not None:
            rows = hopf_coefficient_table(
                block.c1, block.r1_values, block.r2_values, block.K2_values, convention, self.max_workers,
            )
            table_to_csv(rows, self._table("hopf_coefficients.csv"))
            body["table"] = {
                "cells": len(rows),
                "failed": sum(1 for r in rows if r.error),
                "subcritical": sum(1 for r in rows if r.l1 is not None and r.l1 > 0),
                "supercritical": sum(1 for r in rows if r.l1 is not None and r.l1 < 0),
            }
            return body

        point = hopf_point(scenario.model)
        coefficient = first_lyapunov_coefficient(point.model, point.location, convention)
        point.l1 = coefficient.l1
        body.update({"point": point.to_dict(), "coefficient": coefficient.to_dict()})
        return body

    def average(self, scenario: Scenario) -> Dict[str, Any]:
        settings = self.config["averaging"]
        prediction = periodic_orbit_prediction(
            scenario.model, scenario.average.require_near, settings["near_zero_hopf"], settings["simpson_nodes"],
        )
        return {"prediction": prediction.to_dict()}

    def poincare(self, scenario: Scenario) -> Dict[str, Any]:
        settings = self.config["averaging"]
        block = scenario.poincare
        result = poincare_validate(
            scenario.model,
            center=block.center,
            s0=scenario.state,
            horizon=block.horizon or settings["return_horizon"],
            n_iterates=block.n_iterates or settings["n_iterates"],
            start_offset=block.start_offset or settings["start_offset"],
            collapse_fraction=settings["collapse_fraction"],
            rel_tol=scenario.integrator.rel_tol or self.config["integrator"]["rel_tol"],
            abs_tol=scenario.integrator.abs_tol or self.config["integrator"]["abs_tol"],
        )
        result.to_csv(self._table("poincare_returns.csv"))
        body = {"poincare": result.to_dict()}
        try:
            prediction = periodic_orbit_prediction(
                scenario.model, scenario.average.require_near, settings["near_zero_hopf"], settings["simpson_nodes"],
            )
        except (ConfigurationError, TheoremPreconditionError) as e:
            self.logger.info(f"No averaged prediction to compare against: {e}")
        else:
            body["prediction"] = prediction.to_dict()
            body["agrees"] = result.agrees_with(prediction)
        return body

    def chaos(self, scenario: Scenario) -> Dict[str, Any]:
        block = scenario.chaos
        settings = self.config["chaos"]
        report = chaos_suite(
            scenario.model,
            self._require_state(scenario),
            window=block.window,
            sample_dt=block.sample_dt,
            rel_tol=scenario.integrator.rel_tol or self.config["integrator"]["rel_tol"],
            abs_tol=scenario.integrator.abs_tol or self.config["integrator"]["abs_tol"],
            h=block.h,
            lyapunov_T=block.lyapunov_T,
            lyapunov_dt=block.lyapunov_dt,
            window_fraction=block.window_fraction,
            n_scales=settings["n_scales"],
            box_ratio=settings["box_ratio"],
            correlation_coordinate=block.correlation_coordinate,
            m_values=range(1, block.m_max + 1),
            entropy_m_values=range(1, block.entropy_m_max + 1),
            c_draws=settings["c_draws"],
            zero_one_threshold=settings["zero_one_threshold"],
            seed=self.seed,
            heteroclinic_c=block.heteroclinic_c,
            check_structure=block.check_structure,
            max_workers=self.max_workers,
        )
        written = report.write_tables(self.output_dir)
        self.stats["tables_written"] += len(written)
        return {"seed": self.seed, "chaos": report.to_dict(), "tables": [p.name for p in written]}

    def bound(self, scenario: Scenario) -> Dict[str, Any]:
        block = scenario.bound
        if block is None:
            raise ConfigurationError("bound needs a [bound] table with phi")
        result = absorbing_bound(scenario.model, block.phi)
        body: Dict[str, Any] = {"bound": result.to_dict()}
        if scenario.state is None:
            return body

        traj = integrate(scenario.model, scenario.state, self._integrator(scenario))
        W = result.functional(traj.states)
        excess = max(float(W[0]) - result.bound, 0.0)
        envelope = result.bound + excess * np.exp(-result.phi * (traj.times - traj.times[0]))
        slack = block.tolerance * max(1.0, result.bound)
        violations = int(np.sum(W > envelope + slack))
        _write_rows(self._table("bound.csv"), ["t", "W", "envelope"], [list(r) for r in zip(traj.times, W, envelope)])
        body["trajectory"] = {"max_W": float(W.max()), "final_W": float(W[-1]), "violations": violations}
        if violations:
            self.logger.warning(f"W exceeded its envelope at {violations} samples")
        return body

    def center_manifold(self, scenario: Scenario) -> Dict[str, Any]:
        block = scenario.center_manifold
        if block is None:
            raise ConfigurationError("center-manifold needs a [center_manifold] table with a point")
        manifold = center_manifold_quadratic(scenario.model, block.point)
        return {"center_manifold": manifold.to_dict(), "residuals": {repr(k): v for k, v in manifold.residuals.items()}}


def load_scenario(data: Dict[str, Any]) -> Scenario:
    """Validate a raw scenario dictionary; pydantic.ValidationError on bad input."""
    return Scenario.model_validate(data)
