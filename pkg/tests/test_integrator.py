import numpy as np
import pytest

from dynamics.bounds import absorbing_bound
from dynamics.integrator import IntegratorConfig, integrate, persistence_margin, time_average
from models.bazykin import BazykinModel
from models.competition import CompetitionModel
from utils.exceptions import ParameterError, UnsupportedModelError


@pytest.fixture
def pair():
    return BazykinModel(r=1.0, K=2.0, q=1.0, a=0.5, c=1.0, mu=0.4, m=0.1)


class TestIntegratorConfig:
    @pytest.mark.parametrize("kwargs", [
        {"t_span": (1.0, 1.0)},
        {"t_span": (0.0, 1.0), "rel_tol": 0.0},
        {"t_span": (0.0, 1.0), "abs_tol": 1.5},
        {"t_span": (0.0, 1.0), "max_step": 0.0},
        {"t_span": (0.0, 1.0), "sample_dt": -0.1},
    ])
    def test_invalid_settings(self, kwargs):
        with pytest.raises(ParameterError):
            IntegratorConfig(**kwargs)

    def test_from_settings_overrides(self):
        cfg = IntegratorConfig.from_settings({"rel_tol": 1e-8}, (0.0, 5.0), sample_dt=0.5, abs_tol=None)
        assert cfg.rel_tol == 1e-8
        assert cfg.abs_tol == 1e-12
        assert cfg.sample_dt == 0.5

    def test_halved_tolerances(self):
        cfg = IntegratorConfig(t_span=(0.0, 1.0)).halved()
        assert cfg.rel_tol == pytest.approx(5e-10)


class TestIntegrate:
    def test_logistic_face_matches_closed_form(self, pair):
        traj = integrate(pair, [0.1, 0.0], IntegratorConfig(t_span=(0.0, 10.0), sample_dt=0.5))
        t = traj.times
        exact = pair.K / (1 + (pair.K / 0.1 - 1) * np.exp(-pair.r * t))
        assert np.allclose(traj.column("x"), exact, rtol=1e-7)
        assert np.all(traj.column("y") == 0.0)

    def test_sample_grid(self, pair):
        traj = integrate(pair, [1.0, 0.5], IntegratorConfig(t_span=(0.0, 1.05), sample_dt=0.25))
        assert traj.times[0] == 0.0
        assert traj.times[-1] == pytest.approx(1.05)
        assert np.allclose(np.diff(traj.times[:-1]), 0.25)

    def test_states_stay_non_negative(self, scenario):
        sc = scenario("ch5_chaos")
        traj = integrate(sc.model, sc.state, IntegratorConfig(t_span=(0.0, 200.0), sample_dt=0.5))
        assert traj.states.min() >= 0.0

    def test_negative_start_rejected(self, pair):
        with pytest.raises(ParameterError):
            integrate(pair, [-0.1, 0.5], IntegratorConfig(t_span=(0.0, 1.0)))

    def test_equilibrium_is_stationary(self, scenario):
        sc = scenario("fig48")
        model = sc.model
        traj = integrate(model, model.equilibrium, IntegratorConfig(t_span=(0.0, 5.0)))
        assert np.allclose(traj.final_state, model.equilibrium, atol=1e-8)

    def test_csv_has_header(self, pair, tmp_path):
        traj = integrate(pair, [1.0, 0.5], IntegratorConfig(t_span=(0.0, 1.0), sample_dt=0.5))
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,x,y"
        assert len(lines) == 4


class TestAverages:
    def test_time_average_at_equilibrium(self, scenario):
        model = scenario("fig48").model
        traj = integrate(model, model.equilibrium, IntegratorConfig(t_span=(0.0, 10.0)))
        assert np.allclose(time_average(traj, 0.5), model.equilibrium, atol=1e-8)

    def test_burn_in_out_of_range(self, pair):
        traj = integrate(pair, [1.0, 0.5], IntegratorConfig(t_span=(0.0, 1.0)))
        with pytest.raises(ParameterError):
            traj.window(1.0)

    def test_persistence_margin_on_face(self, pair):
        traj = integrate(pair, [1.0, 0.0], IntegratorConfig(t_span=(0.0, 5.0)))
        assert persistence_margin(traj) == 0.0
        assert persistence_margin(traj, coordinates=[0]) > 0


class TestAbsorbingBound:
    @pytest.mark.parametrize("name", ["ej311", "ej312", "ch5_chaos", "figA1", "ch2_table", "fig44"])
    def test_orbits_respect_envelope(self, scenario, name):
        sc = scenario(name)
        bound = absorbing_bound(sc.model, sc.bound.phi)
        traj = integrate(sc.model, sc.state, IntegratorConfig(t_span=(0.0, 200.0), sample_dt=0.5))
        W = bound.functional(traj.states)
        envelope = bound.bound + max(W[0] - bound.bound, 0.0) * np.exp(-bound.phi * traj.times)
        assert np.all(W <= envelope + 1e-6)

    def test_phi_capped_by_mortality(self, scenario):
        with pytest.raises(ParameterError):
            absorbing_bound(scenario("ej311").model, 0.5)

    def test_negative_crowding_rejected(self, symmetric):
        with pytest.raises(ParameterError):
            absorbing_bound(symmetric, 0.1)

    def test_non_logistic_competition_unsupported(self):
        model = CompetitionModel(
            r=3.0, growth={"kind": "richards", "K": 8.0}, q=[4.0], c=[1.0], mu=[3.0], M=[[1.5]],
        )
        with pytest.raises(UnsupportedModelError):
            absorbing_bound(model, 1.0)
