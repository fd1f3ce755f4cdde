import numpy as np
import pytest

from averaging.averaged import average, cylindrical_rates, periodic_orbit_prediction, zero_hopf_distance
from averaging.poincare import poincare_validate
from models.prey import SymmetricTwoPreyModel
from utils.exceptions import ParameterError, TheoremPreconditionError, UnsupportedModelError


class TestAverage:
    def test_symmetric_family_is_a_zero_saddle(self, symmetric):
        with pytest.raises(TheoremPreconditionError, match="zero-saddle"):
            average(symmetric)
        with pytest.raises(TheoremPreconditionError):
            average(symmetric, require_near=False)

    def test_canonical_closed_form(self, scenario):
        model = scenario("averaging_canonical").model
        averaged = average(model, require_near=False)
        expected = ((-2.0 + 1.7 * (2 - 3 / 2.3)) / 20, -0.05)
        assert averaged.closed_form == pytest.approx(expected)
        assert averaged.quadrature_gap < 1e-8
        assert averaged.distance is None

    def test_far_symmetric_parameters_rejected(self):
        far = SymmetricTwoPreyModel(r1=1.0, r2=1.0, c1=2 / 3, m=-1.0)
        assert zero_hopf_distance(far) == pytest.approx(0.25)
        with pytest.raises(TheoremPreconditionError):
            average(far)

    def test_canonical_family_has_no_zero_hopf_reference(self, canonical):
        with pytest.raises(TheoremPreconditionError):
            average(canonical)

    def test_other_families_unsupported(self, chaotic_prey):
        with pytest.raises(UnsupportedModelError):
            average(chaotic_prey)

    @pytest.mark.parametrize("nodes", [2, 4, 1000])
    def test_nodes_must_be_odd(self, scenario, nodes):
        with pytest.raises(ParameterError):
            average(scenario("averaging_canonical").model, require_near=False, nodes=nodes)


class TestOrbitPrediction:
    def test_symmetric_family_has_no_prediction(self, symmetric):
        with pytest.raises(TheoremPreconditionError, match="zero-saddle"):
            periodic_orbit_prediction(symmetric)

    def test_canonical_orbit_is_stable(self, scenario):
        prediction = periodic_orbit_prediction(scenario("averaging_canonical").model, require_near=False)
        assert prediction.stable
        assert prediction.rate_condition is True
        assert set(prediction.to_dict()) == {"exists", "stable", "rate_condition", "averaged"}


class TestCylindricalRates:
    def test_rates_at_center(self, symmetric):
        rho, theta, rho_dot, theta_dot = cylindrical_rates(symmetric, [[1.0, 1.0, 1.0]], symmetric.equilibrium)
        assert rho[0] == 0.0
        assert np.isnan(theta_dot[0])

    def test_radial_rate_projects_field(self, symmetric):
        state = np.array([1.2, 1.0, 1.0])
        rho, theta, rho_dot, _ = cylindrical_rates(symmetric, state, symmetric.equilibrium)
        field = symmetric.vector_field(state)
        assert rho[0] == pytest.approx(0.2)
        assert theta[0] == pytest.approx(0.0)
        assert rho_dot[0] == pytest.approx(field[0])


class TestPoincare:
    def test_rejects_short_return_window(self, canonical):
        with pytest.raises(ParameterError):
            poincare_validate(canonical, n_iterates=2)

    def test_rejects_nonpositive_horizon(self, canonical):
        with pytest.raises(ParameterError):
            poincare_validate(canonical, horizon=0.0)

    @pytest.mark.slow
    def test_stable_focus_above_threshold(self, canonical):
        result = poincare_validate(canonical.with_updates(m=0.35), horizon=2000.0)
        assert result.status == "equilibrium"
        assert result.stable
