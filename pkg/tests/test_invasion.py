import pytest

from analysis.invasion import (
    OUTCOMES,
    classify_outcome,
    invasion_threshold,
    invasion_threshold_fluctuating,
    label_state,
    resident_submodel,
    sweep,
)
from dynamics.integrator import IntegratorConfig, integrate
from utils.exceptions import ParameterError


class TestResidentSubmodel:
    def test_keeps_resident_parameters(self, invasion_prey):
        resident = resident_submodel(invasion_prey)
        assert (resident.r, resident.K, resident.q, resident.a) == (1.0, 6.0, 1.5, 1.0)
        assert (resident.c, resident.mu, resident.m) == (1.0, 1.0, 1.0)

    def test_resident_equilibrium_with_competitor_preset(self, scenario):
        threshold = invasion_threshold(scenario("fig44").model)
        assert threshold.x_tilde == pytest.approx(1.09652, abs=1e-5)
        assert threshold.z_tilde == pytest.approx(0.416458, abs=1e-5)


class TestInvasionThreshold:
    def test_threshold_values(self, invasion_prey):
        result = invasion_threshold(invasion_prey, [1.0, 0.01, 1.0])
        assert result.x_tilde == pytest.approx(5.62837, abs=1e-4)
        assert result.r2_min == pytest.approx(0.836537, abs=1e-4)
        assert result.invades

    def test_both_forms_agree(self, invasion_prey):
        result = invasion_threshold(invasion_prey)
        p = invasion_prey.params()
        assert result.r2_min == pytest.approx(p.alpha21 * result.x_tilde + p.q2 * result.z_tilde, rel=1e-9)

    def test_weak_invader_pressure_gives_small_threshold(self, invasion_prey):
        result = invasion_threshold(invasion_prey.with_updates(alpha21=0.0, q2=1e-3))
        assert result.r2_min < 1e-2
        assert result.invades

    def test_slow_invader_fails(self, invasion_prey):
        assert not invasion_threshold(invasion_prey.with_updates(r2=0.5)).invades

    def test_to_dict(self, invasion_prey):
        data = invasion_threshold(invasion_prey).to_dict()
        assert {"x_tilde", "z_tilde", "r2_min", "r2", "invades"} <= set(data)


class TestFluctuatingThreshold:
    def test_stationary_resident_matches_equilibrium_threshold(self, invasion_prey):
        result = invasion_threshold(invasion_prey)
        resident = resident_submodel(invasion_prey)
        traj = integrate(resident, [result.x_tilde, result.z_tilde], IntegratorConfig(t_span=(0.0, 50.0)))
        fluctuating = invasion_threshold_fluctuating(invasion_prey, traj, 0.5)
        assert fluctuating.direct == pytest.approx(result.r2_min, rel=1e-6)
        assert fluctuating.relative_gap < 1e-6

    def test_needs_resident_trajectory(self, invasion_prey):
        traj = integrate(invasion_prey, [1.0, 0.01, 1.0], IntegratorConfig(t_span=(0.0, 5.0)))
        with pytest.raises(ParameterError):
            invasion_threshold_fluctuating(invasion_prey, traj)


class TestLabels:
    @pytest.mark.parametrize("state,label", [
        ([1.0, 1.0, 1.0], "coexistence"),
        ([1.0, 1.0, 1e-6], "predator_extinct"),
        ([1.0, 1e-6, 1.0], "invader_extinct"),
        ([1e-6, 1.0, 1.0], "only_invader"),
        ([1e-6, 1e-6, 1.0], "resident_prey_extinct"),
    ])
    def test_label_state(self, state, label):
        assert label_state(state, 1e-3) == label

    def test_labels_are_known_outcomes(self):
        assert set(OUTCOMES) == {
            "coexistence", "predator_extinct", "invader_extinct", "only_invader", "resident_prey_extinct",
        }


class TestClassifyOutcome:
    def test_absent_invader_stays_absent(self, scenario):
        outcome = classify_outcome(scenario("fig44").model, [1.0, 0.0, 1.0], T=50.0)
        assert outcome.label == "invader_extinct"
        assert outcome.distances[1] == 0.0

    def test_no_predator(self, invasion_prey):
        assert classify_outcome(invasion_prey, [1.0, 1.0, 0.0], T=20.0).label == "predator_extinct"

    def test_label_matches_final_state(self, invasion_prey):
        outcome = classify_outcome(invasion_prey, [1.0, 0.01, 1.0], T=50.0)
        assert outcome.label == label_state(outcome.final_state, 1e-3)

    def test_rejects_nonpositive_horizon(self, invasion_prey):
        with pytest.raises(ParameterError):
            classify_outcome(invasion_prey, [1.0, 0.01, 1.0], T=0.0)


class TestSweep:
    def test_small_grid(self, scenario, tmp_path):
        model = scenario("fig44").model
        result = sweep(model, (0.5, 2.0), (0.0, 1.0), (2, 2), [1.0, 0.001, 1.0], T=20.0, max_workers=2)
        assert result.labels().shape == (2, 2)
        assert sum(result.counts().values()) == 4
        assert [c.K2 for c in result.cells] == [0.5, 0.5, 2.0, 2.0]
        assert [c.a2 for c in result.cells] == [0.0, 1.0, 0.0, 1.0]

        path = tmp_path / "sweep.csv"
        result.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "K2,a2,label,dist_x,dist_y,dist_z"
        assert len(lines) == 5

    def test_predator_lost_at_large_capacity_and_handling(self, scenario):
        model = scenario("fig44").model
        result = sweep(model, (0.5, 3.0), (0.0, 3.0), (2, 2), [1.0, 0.001, 1.0], T=200.0)
        assert result.labels().tolist() == [
            ["coexistence", "coexistence"],
            ["coexistence", "predator_extinct"],
        ]
        corner = result.cells[3].outcome
        assert corner.final_state[1] == pytest.approx(3.0, abs=1e-3)
        assert corner.final_state[2] < 1e-8

    def test_invader_displaces_resident_prey(self, scenario):
        outcome = classify_outcome(scenario("fig44").model.with_updates(K2=3.0, a2=0.5), [1.0, 0.001, 1.0], T=200.0)
        assert outcome.label == "only_invader"
        assert outcome.final_state[2] == pytest.approx(0.8161, abs=1e-3)

    def test_rare_invader_coexists_at_small_capacity(self, scenario):
        outcome = classify_outcome(scenario("fig44").model.with_updates(K2=0.5, a2=0.0), [1.0, 0.001, 1.0], T=200.0)
        assert outcome.label == "coexistence"
        assert outcome.final_state[1] == pytest.approx(0.01868, abs=1e-3)

    def test_single_cell_uses_lower_corner(self, scenario):
        result = sweep(scenario("fig44").model, (0.5, 2.0), (0.2, 1.0), (1, 1), [1.0, 0.001, 1.0], T=10.0)
        assert (result.cells[0].K2, result.cells[0].a2) == (0.5, 0.2)

    def test_rejects_empty_grid(self, scenario):
        with pytest.raises(ParameterError):
            sweep(scenario("fig44").model, (0.5, 2.0), (0.0, 1.0), (0, 2), [1.0, 0.001, 1.0])

