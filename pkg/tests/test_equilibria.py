import numpy as np
import pytest

from analysis.competition import resource_equilibrium, with_entry
from analysis.equilibria import (
    boundary_equilibria,
    classify,
    eee,
    polish,
    positive_equilibria,
    routh_hurwitz,
)
from models.competition import CompetitionModel
from utils.exceptions import NoPositiveEquilibriumError, NotAnEquilibriumError


def locations(reports):
    return [tuple(float(v) for v in r.location) for r in reports]


class TestRouthHurwitz:
    def test_stable_cubic(self):
        # (l + 1)(l + 2)(l + 3)
        assert all(h > 0 for h in routh_hurwitz([1, 6, 11, 6]))

    def test_unstable_cubic(self):
        # (l - 1)(l + 2)(l + 3)
        assert not all(h > 0 for h in routh_hurwitz([1, 4, 1, -6]))


class TestClassify:
    def test_rejects_point_off_the_equilibrium_set(self, scenario):
        with pytest.raises(NotAnEquilibriumError):
            classify(scenario("ej311").model, [1.0, 1.0, 1.0])

    def test_table_point_is_polished(self, scenario):
        report = classify(scenario("ej311").model, [1.85518, 0.674199, 2.68457])
        assert report.residual < 1e-8
        assert report.location == pytest.approx([1.85518, 0.674199, 2.68457], abs=1e-4)

    def test_zero_coordinates_stay_zero(self, scenario):
        model = scenario("ej313").model
        report = classify(model, [0.702991, 0.478364, 0.0])
        assert report.location[2] == 0.0
        assert report.boundary_pattern == ("z",)

    def test_boundary_attractor_spectrum(self, scenario):
        report = classify(scenario("ej313").model, [0.702991, 0.478364, 0.0])
        assert sorted(report.eigenvalues.real) == pytest.approx([-0.32693, -0.124404, -0.0128568], abs=1e-4)
        assert report.stable == "stable"

    def test_prey_only_point_of_chaotic_system(self, chaotic_prey):
        report = classify(chaotic_prey, [1.0, 0.0, 0.0])
        assert sorted(report.eigenvalues.real) == pytest.approx([-1.0, -0.5, 3.90196], abs=1e-4)
        assert report.type == "saddle"

    def test_to_dict_is_plain(self, chaotic_prey):
        data = classify(chaotic_prey, [1.0, 0.0, 0.0]).to_dict()
        assert data["boundary_pattern"] == ["y", "z"]
        assert all(isinstance(v, float) for v in data["location"])


class TestPositiveEquilibria:
    def test_three_coexistence_states(self, scenario):
        found = locations(positive_equilibria(scenario("ej311").model))
        expected = [
            (0.622294, 0.446953, 1.71185),
            (1.06112, 0.573898, 2.27608),
            (1.85518, 0.674199, 2.68457),
        ]
        assert len(found) == 3
        for got, want in zip(found, expected):
            assert got == pytest.approx(want, abs=1e-3)

    def test_single_unstable_state(self, scenario):
        found = positive_equilibria(scenario("ej312").model)
        assert len(found) == 1
        assert tuple(found[0].location) == pytest.approx((0.816562, 0.209117, 1.98039), abs=1e-3)

    def test_positive_saddle(self, scenario):
        found = positive_equilibria(scenario("ej313").model)
        assert len(found) == 1
        saddle = found[0]
        assert tuple(saddle.location) == pytest.approx((0.9061516, 0.5393339, 0.000956892), abs=2e-6)
        assert saddle.type.startswith("saddle")
        # the rounded (0.906473, 0.539415, 0.000961756) leaves z'/z = 1.7e-4
        assert tuple(saddle.location) == pytest.approx((0.906473, 0.539415, 0.000961756), abs=5e-4)

    def test_chaotic_system_interior_point(self, chaotic_prey):
        found = positive_equilibria(chaotic_prey)
        assert len(found) == 1
        assert tuple(found[0].location) == pytest.approx((0.11969, 0.813857, 0.00666116), abs=1e-4)

    def test_every_report_is_an_equilibrium(self, scenario):
        for name in ("ej311", "ej312", "ej313", "fig44", "ch2_table", "figA1"):
            model = scenario(name).model
            for report in positive_equilibria(model) + boundary_equilibria(model):
                assert model.residual(report.location) <= 1e-8


class TestBoundaryEquilibria:
    def test_chaotic_system_faces(self, chaotic_prey):
        reports = boundary_equilibria(chaotic_prey)
        assert sorted(r.label for r in reports) == ["E0", "E1", "E2", "E5"]
        e5 = next(r for r in reports if r.label == "E5")
        assert tuple(e5.location) == pytest.approx((0.202418, 0.0, 0.0800811), abs=1e-4)

    def test_sorted_and_unique(self, scenario):
        reports = boundary_equilibria(scenario("ej311").model)
        points = locations(reports)
        assert points == sorted(points)
        assert len(set(points)) == len(points)

    def test_failures_are_collected(self, scenario):
        failures = []
        boundary_equilibria(scenario("ej311").model, failures=failures)
        assert failures == []


class TestPolish:
    def test_refines_rounded_point(self, scenario):
        model = scenario("ej312").model
        refined = polish(model, [0.8166, 0.2091, 1.9804])
        assert model.residual(refined) < 1e-10


class TestEnergyThresholds:
    def test_competition_consumer(self, competition):
        assert eee(competition).values["y1"] == pytest.approx(0.75)

    def test_predator_thresholds(self, scenario):
        values = eee(scenario("ej312").model).values
        assert values["y"] == pytest.approx(0.5)
        assert values["z"] == pytest.approx(0.6666, abs=1e-3)

    def test_single_consumer(self):
        model = CompetitionModel(r=1, growth={"kind": "logistic", "K": 2}, q=[1], c=[1], mu=[1], M=[[1]])
        assert eee(model).values["y1"] == pytest.approx(1.0)


class TestCompetitionTable:
    """Positive equilibrium of the resource with two consumers."""

    @pytest.mark.parametrize("m12,m21,expected", [
        (0.25, 1.0, (0.947, 0.4574, 0.4077)),
        (0.25, 2.0, (0.9891, 0.6277, 0.0592)),
        (0.5, 1.0, (0.9694, 0.4367, 0.4449)),
        (0.5, 2.0, (0.9922, 0.6234, 0.0672)),
    ])
    def test_logistic_cells(self, competition, m12, m21, expected):
        model = with_entry(with_entry(competition, 1, 2, m12), 2, 1, m21)
        assert tuple(resource_equilibrium(model).state) == pytest.approx(expected, abs=1e-3)

    @pytest.mark.parametrize("kind", ["richards", "gompertz"])
    def test_strong_interference_removes_coexistence(self, competition, kind):
        model = CompetitionModel(**{
            **competition.model_dump(),
            "growth": {"kind": kind, "K": 8.0},
            "M": [[1.5, 0.25], [2.0, 2.0]],
        })
        with pytest.raises(NoPositiveEquilibriumError):
            resource_equilibrium(model)

    def test_equilibrium_is_an_equilibrium(self, competition):
        state = resource_equilibrium(competition).state
        assert competition.residual(state) < 1e-9

    def test_positive_equilibria_agrees(self, competition):
        found = positive_equilibria(competition)
        assert len(found) == 1
        assert found[0].location == pytest.approx(resource_equilibrium(competition).state, abs=1e-8)
