import pytest

from analysis.bazykin import bazykin_analysis, bazykin_global_stability, cardano_root, cubic, triple_window
from analysis.equilibria import positive_equilibria
from bifurcation.thresholds import bazykin_hopf
from models.bazykin import BazykinModel
from utils.exceptions import TheoremPreconditionError


class TestTripleWindow:
    def test_window_bounds(self, crowded_pair):
        low, high = triple_window(crowded_pair).bounds
        assert low == pytest.approx(0.96666, abs=1e-4)
        assert high == pytest.approx(1.01401, abs=1e-4)

    def test_contains_preset_crowding(self, crowded_pair):
        window = triple_window(crowded_pair)
        assert window.contains(crowded_pair.m)
        assert not window.contains(0.5)

    def test_three_positive_equilibria_inside_window(self, crowded_pair):
        prey = sorted(float(r.location[0]) for r in positive_equilibria(crowded_pair))
        assert prey == pytest.approx([0.526081, 1.28571, 2.02154], abs=1e-4)

    def test_small_carrying_capacity_rejected(self, crowded_pair):
        with pytest.raises(TheoremPreconditionError):
            triple_window(crowded_pair.with_updates(K=3.0))

    def test_inefficient_predator_rejected(self, crowded_pair):
        with pytest.raises(TheoremPreconditionError):
            triple_window(crowded_pair.with_updates(mu=2.0))


class TestCubic:
    def test_prey_roots_are_real_cubic_roots(self, crowded_pair):
        data = cubic(crowded_pair)
        for x in data.prey_roots:
            assert min(abs(root - x) for root in data.roots) < 1e-6

    def test_cardano_root_is_a_cubic_root(self, crowded_pair):
        x = cardano_root(crowded_pair)
        data = cubic(crowded_pair)
        assert min(abs(root - x) for root in data.roots) < 1e-5

    def test_cardano_root_with_three_real_roots(self, crowded_pair):
        data = cubic(crowded_pair)
        assert all(abs(root.imag) < 1e-9 for root in data.roots)
        assert cardano_root(crowded_pair) == pytest.approx(0.52608054, abs=1e-7)

    def test_cardano_root_with_negative_radical(self):
        # one real root, and the radical psi + sqrt(discriminant) is negative
        resident = BazykinModel(r=1.0, K=6.0, q=1.5, a=1.0, c=1.0, mu=1.0, m=1.0)
        x = cardano_root(resident)
        assert x == pytest.approx(5.62837, abs=1e-5)
        real_roots = [root.real for root in cubic(resident).roots if abs(root.imag) < 1e-9]
        assert real_roots == pytest.approx([x], abs=1e-8)

    def test_descartes_sign_pattern(self, crowded_pair):
        assert cubic(crowded_pair).descartes_positive


class TestGlobalStability:
    def test_unique_and_global(self):
        model = BazykinModel(r=0.2, K=1.0, q=1.0, a=0.5, c=1.0, mu=0.3, m=0.1)
        flags = bazykin_global_stability(model)
        assert flags.threshold == pytest.approx(0.3 / 0.85)
        assert flags.exists
        assert flags.unique_local_attractor
        assert flags.global_attractor

    def test_dulac_condition_fails_for_fast_prey(self):
        flags = bazykin_global_stability(BazykinModel(r=1.0, K=1.0, q=1.0, a=0.5, c=1.0, mu=0.3, m=0.1))
        assert flags.unique_local_attractor
        assert not flags.global_attractor

    def test_threshold_below_vertex_is_not_unique(self, crowded_pair):
        flags = bazykin_global_stability(crowded_pair)
        assert flags.exists
        assert not flags.unique_local_attractor


class TestBazykinAnalysis:
    def test_report(self, crowded_pair):
        report = bazykin_analysis(crowded_pair)
        assert report.window is not None
        assert len(report.positive) == 3
        assert set(report.to_dict()) == {"cubic", "window", "flags", "positive", "boundary"}

    def test_no_window_outside_region(self, crowded_pair):
        assert bazykin_analysis(crowded_pair.with_updates(K=3.0)).window is None


class TestBazykinHopf:
    @pytest.fixture
    def pair(self):
        return BazykinModel(r=1.0, K=3.0, q=1.0, a=1.0, c=2.0, mu=0.5, m=0.0)

    def test_trace_vanishes_at_vertex(self, pair):
        hopf = bazykin_hopf(pair)
        assert hopf.vertex == pytest.approx(1.0)
        assert hopf.mu_critical == pytest.approx(1.0)
        assert hopf.point.location == pytest.approx([1.0, 4 / 3])
        assert hopf.point.routh_gap == pytest.approx(0.0, abs=1e-12)
        assert hopf.point.omega > 0

    def test_side_of_vertex(self, pair):
        assert bazykin_hopf(pair).stable is False
        assert bazykin_hopf(pair.with_updates(mu=1.5)).stable is True

    def test_requires_no_crowding(self, crowded_pair):
        with pytest.raises(TheoremPreconditionError):
            bazykin_hopf(crowded_pair)

    def test_requires_a_K_above_one(self, pair):
        with pytest.raises(TheoremPreconditionError):
            bazykin_hopf(pair.with_updates(a=0.2))
