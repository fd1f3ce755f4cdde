import numpy as np
import pytest

from analysis.equilibria import boundary_equilibria
from analysis.hyperbola import hyperbola, isocline_conic
from analysis.two_prey import boundary_invasion_rates, ch4_existence_check, ch4_rescaled_stability
from models.prey import RescaledTwoPreyModel, TwoPreyModel
from utils.exceptions import TheoremPreconditionError


def rescaled(**changes) -> RescaledTwoPreyModel:
    base = dict(r1=1.0, r2=1.2, K1=0.5, K2=0.6, a1=0.5, a2=0.5, c1=1.0, c2=1.0, m=0.1)
    return RescaledTwoPreyModel(**{**base, **changes})


class TestHyperbola:
    def test_special_points_lie_on_the_conic(self, scenario):
        geometry = hyperbola(scenario("fig44").model)
        assert all(r < 1e-9 for r in geometry.residuals.values())

    def test_competition_point_on_conic(self, invasion_prey):
        geometry = hyperbola(invasion_prey)
        conic = isocline_conic(invasion_prey)
        assert geometry.P is not None
        assert abs(conic(*geometry.P)) / conic.scale() < 1e-9

    @pytest.mark.parametrize("x,y", [(2.0, 1.0), (0.5, 3.0), (4.0, 0.2)])
    def test_conic_is_the_gap_between_prey_isoclines(self, invasion_prey, x, y):
        p = invasion_prey.params()
        z1 = (p.r1 * (1 - x / p.K1) - p.alpha12 * y) * (1 + p.a1 * x) / p.q1
        z2 = (p.r2 * (1 - y / p.K2) - p.alpha21 * x) * (1 + p.a2 * y) / p.q2
        conic = isocline_conic(invasion_prey)
        assert conic(x, y) == pytest.approx(p.q1 * p.q2 * (z1 - z2), rel=1e-12, abs=1e-12)

    def test_to_dict_shape(self, scenario):
        data = hyperbola(scenario("fig44").model).to_dict()
        assert len(data["coefficients"]) == 6


class TestExistenceChain:
    def test_chain_values(self, scenario):
        model = scenario("fig44").model
        chain = ch4_existence_check(model)
        assert chain.left < chain.right
        assert chain.to_dict()["chain"][1] == model.mu

    def test_competition_point_required(self, invasion_prey):
        model = invasion_prey.with_updates(alpha21=1.0)
        with pytest.raises(TheoremPreconditionError):
            ch4_existence_check(model)


class TestBoundaryInvasionRates:
    def test_rate_is_an_eigenvalue(self, chaotic_prey):
        rates = {r.label: r for r in boundary_invasion_rates(chaotic_prey)}
        e5 = next(r for r in boundary_equilibria(chaotic_prey) if r.label == "E5")
        assert "E5" in rates
        assert rates["E5"].species == "y"
        assert min(abs(e5.eigenvalues - rates["E5"].rate)) < 1e-8

    def test_chaotic_boundary_is_repelling(self, chaotic_prey):
        assert all(r.unstable for r in boundary_invasion_rates(chaotic_prey))

    def test_invasion_matches_threshold(self, invasion_prey):
        rates = [r for r in boundary_invasion_rates(invasion_prey) if r.label == "E5"]
        rate = min(rates, key=lambda r: abs(r.location[0] - 5.62837))
        assert rate.rate == pytest.approx(2.0 - 0.836537, abs=1e-4)


class TestRescaledStability:
    def test_sufficient_conditions_imply_attractor(self):
        report = ch4_rescaled_stability(rescaled())
        assert report.hypotheses_hold
        assert report.attractor

    def test_diagonal_matches_a_without_competition(self):
        report = ch4_rescaled_stability(rescaled())
        assert report.diagonal == pytest.approx(report.A, rel=1e-12)

    def test_sign_proposition(self):
        report = ch4_rescaled_stability(rescaled())
        assert all(report.sign_proposition.values())

    def test_hurwitz_matches_spectrum(self):
        model = rescaled(alpha12=0.2, alpha21=0.1)
        report = ch4_rescaled_stability(model)
        stable = bool(np.all(np.linalg.eigvals(model.jacobian(model.equilibrium)).real < 0))
        assert report.attractor == stable
