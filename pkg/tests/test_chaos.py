import numpy as np
import pytest

from chaos.dimension import box_counting, correlation_dimension, delay_embedding
from chaos.heteroclinic import heteroclinic_residual
from chaos.lyapunov import lyapunov_regression
from chaos.regression import fit_line
from chaos.spectral import power_spectrum, zero_one_test
from chaos.suite import attractor_window, chaos_suite, check_boundary_structure
from dynamics.integrator import Trajectory
from models.bazykin import BazykinModel
from pipeline.orchestrator import load_scenario
from utils.exceptions import EmptyWindowError, ParameterError, TheoremPreconditionError, UnsupportedModelError
from utils.config_loader import read_scenario_file


class TestPowerSpectrum:
    def test_parseval(self):
        series = np.random.default_rng(0).normal(size=501)
        result = power_spectrum(series)
        assert result.parseval_gap < 1e-10
        assert result.spectral_energy == pytest.approx(result.energy)

    def test_single_cosine(self):
        n = 200
        t = np.arange(1, n + 1)
        result = power_spectrum(3.0 * np.cos(2 * np.pi * 5 * t / n) + 1.0)
        assert result.a[0] == pytest.approx(1.0)
        assert result.a[5] == pytest.approx(3.0)
        assert result.b[5] == pytest.approx(0.0, abs=1e-12)
        assert result.power == pytest.approx(1.0 + 4.5)

    def test_rejects_non_finite(self):
        with pytest.raises(ParameterError):
            power_spectrum([1.0, np.nan, 2.0])


class TestZeroOne:
    def test_periodic_series_is_regular(self):
        t = np.arange(2000)
        result = zero_one_test(np.sin(0.3 * t), c_draws=20, n_max=200, seed=1)
        assert result.verdict == "regular"

    def test_noise_is_not_regular(self):
        series = np.random.default_rng(2).normal(size=2000)
        result = zero_one_test(series, c_draws=20, n_max=200, seed=1)
        assert result.verdict == "chaotic"
        assert result.statistic > 0.9

    def test_seed_is_reproducible(self):
        series = np.random.default_rng(3).normal(size=1000)
        first = zero_one_test(series, c_draws=5, seed=7)
        second = zero_one_test(series, c_draws=5, seed=7)
        assert first.statistic == second.statistic

    def test_short_series(self):
        with pytest.raises(EmptyWindowError):
            zero_one_test(np.ones(50))

    def test_n_max_limited_to_a_tenth(self):
        with pytest.raises(ParameterError):
            zero_one_test(np.random.default_rng(4).normal(size=1000), n_max=200)


class TestBoxCounting:
    def test_filled_square(self):
        points = np.random.default_rng(5).uniform(size=(20000, 2))
        assert box_counting(points).dimension == pytest.approx(2.0, abs=0.05)

    def test_segment(self):
        u = np.random.default_rng(6).uniform(size=5000)
        assert box_counting(np.column_stack([u, u])).dimension == pytest.approx(1.0, abs=0.05)

    def test_too_few_points(self):
        with pytest.raises(ParameterError):
            box_counting(np.random.default_rng(7).uniform(size=(100, 2)))


class TestEmbedding:
    def test_rows(self):
        vectors = delay_embedding(np.arange(10.0), m=3, tau=2)
        assert vectors.shape == (6, 3)
        assert list(vectors[0]) == [0.0, 2.0, 4.0]

    def test_length_cap(self):
        assert delay_embedding(np.arange(10.0), m=2, length=4).shape == (4, 2)

    def test_too_deep(self):
        with pytest.raises(ParameterError):
            delay_embedding(np.arange(5.0), m=5)

    def test_correlation_needs_long_series(self):
        with pytest.raises(ParameterError):
            correlation_dimension(np.arange(100.0))


class TestHeteroclinic:
    @pytest.mark.parametrize("axis", ["x", "y"])
    def test_logistic_arc_is_an_orbit(self, chaotic_prey, axis):
        check = heteroclinic_residual(chaotic_prey, 0.5, np.linspace(0.0, 20.0, 101), axis=axis)
        assert check.residual < 1e-12
        assert check.samples == 101

    def test_scaled_arc_is_not(self, chaotic_prey):
        check = heteroclinic_residual(chaotic_prey, 0.5, np.linspace(0.0, 20.0, 101), coefficient=1.1)
        assert check.residual > 1e-3

    def test_invalid_arguments(self, chaotic_prey, competition):
        with pytest.raises(ParameterError):
            heteroclinic_residual(chaotic_prey, 1.5, [0.0, 1.0])
        with pytest.raises(ParameterError):
            heteroclinic_residual(chaotic_prey, 0.5, [0.0, 1.0], axis="z")
        with pytest.raises(UnsupportedModelError):
            heteroclinic_residual(competition, 0.5, [0.0, 1.0])


class TestRegression:
    def test_exact_line(self):
        x = np.linspace(0.0, 1.0, 20)
        fit = fit_line(x, 2 * x + 1)
        assert fit.slope == pytest.approx(2.0)
        assert fit.intercept == pytest.approx(1.0)
        assert fit.r_value == pytest.approx(1.0)
        assert fit.slope_ci[0] <= fit.slope <= fit.slope_ci[1]

    def test_too_few_points(self):
        with pytest.raises(EmptyWindowError):
            fit_line([0.0, 1.0], [0.0, 1.0])


class TestLyapunovRegression:
    def test_separation_shrinks_near_stable_focus(self):
        pair = BazykinModel(r=1.0, K=3.0, q=1.0, a=1.0, c=2.0, mu=1.5, m=0.0)
        estimate = lyapunov_regression(pair, [1.0, 1.2], h=1e-4, T=60.0, dt=0.1)
        assert set(estimate.fits) == set(pair.coordinate_names)
        for fit in estimate.fits.values():
            assert fit.slope < 0

    def test_step_must_be_positive(self):
        pair = BazykinModel(r=1.0, K=3.0, q=1.0, a=1.0, c=2.0, mu=1.5, m=0.0)
        with pytest.raises(ParameterError):
            lyapunov_regression(pair, [1.0, 1.2], h=0.0)


class TestSuiteHelpers:
    def test_boundary_structure_of_chaotic_parameters(self, chaotic_prey):
        labels = [r.label for r in check_boundary_structure(chaotic_prey)]
        assert "E3" not in labels and "E4" not in labels

    def test_competition_face_equilibrium_rejected(self, invasion_prey):
        with pytest.raises(TheoremPreconditionError):
            check_boundary_structure(invasion_prey)

    def test_attractor_window(self):
        times = np.arange(0.0, 10.0, 0.5)
        traj = Trajectory(times, np.column_stack([times, times]))
        window = attractor_window(traj, 5.0, 8.0)
        assert window.times[0] == pytest.approx(5.5)
        assert window.times[-1] == pytest.approx(8.0)

    def test_empty_attractor_window(self):
        times = np.arange(0.0, 10.0, 0.5)
        with pytest.raises(EmptyWindowError):
            attractor_window(Trajectory(times, np.column_stack([times, times])), 20.0, 30.0)


@pytest.fixture(scope="module")
def chaotic_report():
    scenario = load_scenario(read_scenario_file("ch5_chaos"))
    block = scenario.chaos
    return chaos_suite(
        scenario.model, scenario.state, window=block.window, sample_dt=block.sample_dt,
        h=block.h, lyapunov_T=block.lyapunov_T, lyapunov_dt=block.lyapunov_dt,
    )


@pytest.mark.slow
class TestChaoticAttractor:
    """Reference estimates for the chaotic two-prey attractor, within the bands in DESIGN.md."""

    @pytest.mark.parametrize("projection", ["xy", "xz", "yz"])
    def test_box_dimension_is_fractional(self, chaotic_report, projection):
        assert 1.0 < chaotic_report.box[projection].dimension < 2.0

    def test_correlation_dimension(self, chaotic_report):
        assert chaotic_report.correlation.D2 == pytest.approx(1.16, abs=0.25)

    @pytest.mark.parametrize("axis, energy", [("x", 143.062), ("y", 2791.01), ("z", 2.67374)])
    def test_spectral_energy(self, chaotic_report, axis, energy):
        spectrum = chaotic_report.spectra[axis]
        assert spectrum.n == 4000
        assert spectrum.energy == pytest.approx(energy, rel=0.1)

    def test_separation_grows(self, chaotic_report):
        assert chaotic_report.lyapunov.fits["x"].slope > 0

    def test_zero_one_contrast(self, chaotic_report):
        # x spreads, y stays bounded
        assert chaotic_report.zero_one["x"].statistic > chaotic_report.zero_one["y"].statistic
