import numpy as np
import pytest
import sympy as sp
from pydantic import ValidationError

from models.base import finite_difference_jacobian
from models.bazykin import BazykinModel
from models.competition import CompetitionModel
from models.growth import GrowthFunction, eval_growth
from models.predators import RescaledTwoPredatorModel, TwoPredatorModel
from models.prey import CanonicalTwoPreyModel, RescaledTwoPreyModel, SymmetricTwoPreyModel
from models.registry import FAMILIES, build_model
from utils.exceptions import DimensionMismatchError, GrowthLimitError, ParameterError

GROWTH_KINDS = ("logistic", "richards", "gompertz", "gompertz_modified", "schoner")


class TestGrowthFunction:
    @pytest.mark.parametrize("kind", GROWTH_KINDS)
    def test_vanishes_at_capacity(self, kind):
        g = GrowthFunction(kind=kind, K=4.0)
        assert g(4.0) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("kind", GROWTH_KINDS)
    def test_strictly_decreasing(self, kind):
        assert GrowthFunction(kind=kind, K=4.0).is_strictly_decreasing()

    @pytest.mark.parametrize("kind", GROWTH_KINDS)
    def test_derivative_matches_difference_quotient(self, kind):
        g = GrowthFunction(kind=kind, K=3.0)
        x, h = 1.3, 1e-6
        assert g.derivative(x) == pytest.approx((g(x + h) - g(x - h)) / (2 * h), rel=1e-6)

    def test_eval_growth_is_a_float(self):
        value = eval_growth(GrowthFunction(K=4.0), 1.0)
        assert isinstance(value, float)
        assert value == pytest.approx(0.75)

    def test_richards_value(self):
        assert GrowthFunction(kind="richards", K=2.0)(1.0) == pytest.approx(0.75)

    def test_gompertz_needs_capacity_above_one(self):
        with pytest.raises(ValidationError):
            GrowthFunction(kind="gompertz", K=1.0)

    def test_gompertz_has_no_limit_at_zero(self):
        with pytest.raises(GrowthLimitError):
            GrowthFunction(kind="gompertz", K=3.0).beta

    def test_gompertz_rejects_zero_density(self):
        with pytest.raises(ParameterError):
            GrowthFunction(kind="gompertz", K=3.0)(0.0)

    def test_flux_is_continuous_at_zero(self):
        g = GrowthFunction(kind="schoner", K=3.0)
        assert g.flux(0.0) == 0.0
        assert g.flux_derivative(0.0) == 1.0


class TestRecords:
    def test_registry_covers_every_family(self):
        assert set(FAMILIES) == {
            "competition", "two_predator", "two_predator_rescaled", "two_prey",
            "two_prey_rescaled", "two_prey_canonical", "two_prey_symmetric", "bazykin",
        }

    def test_build_model_dispatches_on_family(self):
        model = build_model({"family": "two_predator_rescaled", "K": 7.9, "q1": 4.15, "m2": 0.0})
        assert isinstance(model, RescaledTwoPredatorModel)

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            build_model({"family": "bazykin", "r": 1, "K": 1, "q": 1, "a": 1, "c": 1, "mu": 1, "m": 0, "z": 1})

    @pytest.mark.parametrize("data", [
        {"family": "two_predator_rescaled", "K": 1.0, "q1": 4.0, "m2": 0.0},
        {"family": "two_predator_rescaled", "K": 5.0, "q1": 2.0, "m2": 0.0},
        {"family": "two_prey_canonical", "r1": 1.0, "r2": 1.0, "K2": 0.25, "c1": 0.5, "m": 0.0},
        {"family": "two_prey_canonical", "r1": 1.0, "r2": 1.0, "K2": 3.0, "c1": 0.5, "m": 10.0},
        {"family": "two_prey_symmetric", "r1": 1.0, "r2": 1.0, "c1": 0.5, "m": 1.0},
        {"family": "bazykin", "r": 1, "K": 1, "q": 1, "a": 1, "c": 1, "mu": 1, "m": -0.1},
    ])
    def test_out_of_range_parameters_rejected(self, data):
        with pytest.raises(ValidationError):
            build_model(data)

    def test_competition_shapes_checked(self):
        with pytest.raises(ValidationError):
            CompetitionModel(r=1, growth={"kind": "logistic", "K": 2}, q=[1, 1], c=[1], mu=[1, 1], M=[[1, 0], [0, 1]])

    def test_competition_diagonal_must_be_positive(self):
        with pytest.raises(ValidationError):
            CompetitionModel(r=1, growth={"kind": "logistic", "K": 2}, q=[1, 1], c=[1, 1], mu=[1, 1], M=[[0, 0], [0, 1]])

    def test_competition_coordinates(self, competition):
        assert competition.coordinate_names == ("x", "y1", "y2")
        assert competition.dimension == 3

    def test_state_dimension_checked(self, canonical):
        with pytest.raises(DimensionMismatchError):
            canonical.vector_field([0.1, 0.2])

    def test_swapping_predators_twice_is_identity(self, scenario):
        model = scenario("ej311").model
        assert model.swapped().swapped() == model

    def test_rescaled_predators_accept_any_crowding(self):
        model = RescaledTwoPredatorModel(K=7.6, q1=4.6, m2=0.5833)
        assert model.params().mu2 < 0
        assert model.polynomial_factor(model.equilibrium) == pytest.approx(2.0)

    def test_rescaled_predators_agree_with_general_record(self):
        rescaled = RescaledTwoPredatorModel(K=7.9, q1=4.15, m2=0.1)
        s = [0.7, 1.2, 0.4]
        assert np.allclose(rescaled.vector_field(s), rescaled.to_general().vector_field(s))


class TestPinnedEquilibria:
    @pytest.mark.parametrize("model", [
        RescaledTwoPredatorModel(K=7.9, q1=4.15, m2=-0.2),
        RescaledTwoPreyModel(r1=1.0, r2=1.5, K1=2.0, K2=3.0, a1=1.0, a2=0.5, c1=1.0, c2=1.0, m=0.1),
        CanonicalTwoPreyModel(r1=1.0, r2=1.7, K2=3.0, c1=0.5, m=-0.1),
        SymmetricTwoPreyModel(r1=1.0, r2=2.0, c1=0.5, m=-1.0),
    ])
    def test_equilibrium_for_every_parameter_choice(self, model):
        assert model.residual(model.equilibrium) < 1e-12

    def test_chaotic_interior_point(self, chaotic_prey):
        assert chaotic_prey.residual([0.11969, 0.813857, 0.00666116]) < 1e-3


class TestJacobians:
    @pytest.mark.parametrize("name,state", [
        ("ej311", [1.0, 0.5, 2.0]),
        ("ch5_chaos", [0.3, 0.4, 0.2]),
        ("figA1", [1.0, 0.5]),
        ("ch2_table", [1.0, 0.8, 0.6]),
        ("fig48", [0.3, 0.2, 0.9]),
        ("sec46", [0.5, 1.5, 0.8]),
    ])
    def test_analytic_matches_finite_difference(self, scenario, name, state):
        model = scenario(name).model
        assert np.allclose(model.jacobian(state), finite_difference_jacobian(model, state), rtol=1e-5, atol=1e-7)

    def test_gompertz_competition_jacobian(self):
        model = CompetitionModel(
            r=3.0, growth={"kind": "gompertz", "K": 8.0}, q=[4.0, 2.0], c=[1.0, 1.2],
            mu=[3.0, 1.0], M=[[1.5, 0.25], [1.0, 2.0]],
        )
        s = [2.0, 0.5, 0.3]
        assert np.allclose(model.jacobian(s), finite_difference_jacobian(model, s), rtol=1e-5, atol=1e-7)


class TestSymbolicField:
    def test_canonical_field_is_polynomial(self, canonical):
        syms, field = canonical.symbolic_field()
        for component in field:
            assert component.is_polynomial(*syms)

    def test_polynomial_form_rescales_the_field(self):
        model = BazykinModel(r=1.0, K=3.0, q=1.0, a=0.5, c=1.0, mu=0.4, m=0.1)
        syms, field = model.symbolic_field()
        s = (1.2, 0.7)
        values = [float(f.subs(dict(zip(syms, s)))) for f in field]
        expected = model.polynomial_factor(s) * model.vector_field(s)
        assert np.allclose(values, expected)

    def test_summary_lists_derived_parameters(self):
        summary = RescaledTwoPredatorModel(K=7.9, q1=4.15, m2=0.0).summary()
        assert summary["family"] == "two_predator_rescaled"
        assert summary["derived"]["mu2"] == pytest.approx(0.5)
