"""
Unit tests for gp.py

Tests training, posterior prediction, confidence intervals, the power
function and sample paths.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.designs import DesignSpec, generate
from src.exceptions import ConfigurationError, DomainError, IllConditionedError
from src.gp import (
    CovarianceModel,
    TrainingSet,
    confidence_interval,
    dense_posterior,
    factorize_with_jitter,
    native_norm,
    normal_quantile,
    power_function,
    predict,
    predict_point,
    sample_paths,
    smoothed_data,
    smoothed_interpolant_identity_check,
    train,
)
from src.kernels import RadialFamily, StationaryKernel, VskKernel
from src.scaling_maps import (
    CornerBump,
    JumpIndicator,
    JumpTarget,
    TargetMimic,
    ZeroMap,
    sine_map,
)

E_HALF = np.exp(-0.5)


@pytest.fixture
def single_node_gp(gaussian_kernel):
    """Unit Gaussian model trained on the single observation y(0) = 2."""
    data = TrainingSet(np.array([[0.0]]), np.array([2.0]))
    return train(CovarianceModel(gaussian_kernel, sigma_f=1.0, sigma_n=0.0), data)


class TestTrainingSet:
    """Test training-set validation."""

    def test_duplicate_nodes_rejected(self):
        """Test that coinciding nodes are rejected."""
        # Act & Assert
        with pytest.raises(DomainError, match="pairwise distinct"):
            TrainingSet(np.array([[0.1], [0.1]]), np.array([1.0, 2.0]))

    def test_observation_count_must_match(self):
        """Test one observation per node."""
        # Act & Assert
        with pytest.raises(DomainError, match="one observation per node"):
            TrainingSet(np.array([[0.0], [1.0]]), np.array([1.0]))

    def test_node_outside_domain_rejected(self):
        """Test nodes outside the declared domain."""
        # Act & Assert
        with pytest.raises(DomainError, match="inside the domain"):
            TrainingSet(np.array([[1.5]]), np.array([1.0]), ((0.0, 1.0),))

    def test_arrays_are_read_only(self, two_node_set):
        """Test that stored arrays cannot be mutated."""
        # Act & Assert
        with pytest.raises(ValueError):
            two_node_set.y[0] = 5.0


class TestCovarianceModel:
    """Test covariance model validation."""

    def test_negative_sigma_rejected(self, gaussian_kernel):
        """Test σ_n < 0."""
        # Act & Assert
        with pytest.raises(ConfigurationError, match="sigma_n"):
            CovarianceModel(gaussian_kernel, sigma_f=1.0, sigma_n=-0.1)

    def test_regularization_ratio(self, gaussian_kernel):
        """Test λ = σ_n² / σ_f²."""
        # Arrange
        model = CovarianceModel(gaussian_kernel, sigma_f=2.0, sigma_n=0.5)

        # Act & Assert
        assert model.regularization == pytest.approx(0.0625)

    def test_with_hyperparameters_replaces_lengthscale(self, gaussian_kernel):
        """Test that a new ℓ reaches the kernel."""
        # Arrange
        model = CovarianceModel(gaussian_kernel, sigma_f=1.0)

        # Act
        updated = model.with_hyperparameters(lengthscale=0.3, sigma_n=0.1)

        # Assert
        assert updated.kernel.lengthscale == 0.3
        assert updated.sigma_n == 0.1
        assert updated.sigma_f == 1.0


class TestTrain:
    """Test training."""

    def test_two_node_coefficients(self, gaussian_kernel, two_node_set):
        """Test α = [1, −c] / (1 − c²) with c = e^{−1/2}."""
        # Act
        gp = train(CovarianceModel(gaussian_kernel), two_node_set)

        # Assert
        expected = np.array([1.0, -E_HALF]) / (1.0 - E_HALF**2)
        np.testing.assert_allclose(gp.alpha, expected, rtol=1e-12)
        assert gp.jitter_used == 0.0

    def test_zero_sigma_f_rejected(self, gaussian_kernel, two_node_set):
        """Test that σ_f = 0 cannot be trained."""
        # Arrange
        model = CovarianceModel(gaussian_kernel, sigma_f=0.0, sigma_n=0.1)

        # Act & Assert
        with pytest.raises(ConfigurationError, match="sigma_f"):
            train(model, two_node_set)

    def test_interpolates_noise_free_data(self, jump_training_set, jump_fixed_models):
        """Test that the noise-free posterior mean reproduces the data."""
        # Act
        gp = train(jump_fixed_models["vsk"], jump_training_set)
        batch = predict(gp, jump_training_set.X)

        # Assert
        np.testing.assert_allclose(batch.mean, jump_training_set.y, atol=1e-9)
        assert np.all(batch.variance <= 1e-8)


class TestPrediction:
    """Test posterior mean, variance and intervals."""

    def test_single_node_mean(self, single_node_gp):
        """Test the posterior mean 2e^{−1/2} one unit away."""
        # Act
        prediction = predict_point(single_node_gp, [1.0])

        # Assert
        assert prediction.mean == pytest.approx(1.2130613194, abs=1e-10)

    def test_single_node_variance(self, single_node_gp):
        """Test the posterior variance 1 − e^{−1} one unit away."""
        # Act
        prediction = predict_point(single_node_gp, [1.0])

        # Assert
        assert prediction.variance == pytest.approx(0.6321205588, abs=1e-10)
        assert prediction.std == pytest.approx(np.sqrt(0.6321205588), abs=1e-10)

    def test_interval_is_symmetric(self, single_node_gp):
        """Test lower and upper bounds are symmetric about the mean."""
        # Act
        prediction = predict_point(single_node_gp, [0.4], alpha=0.05)

        # Assert
        half = 1.959963985 * prediction.std
        assert prediction.lower == pytest.approx(prediction.mean - half, abs=1e-9)
        assert prediction.upper == pytest.approx(prediction.mean + half, abs=1e-9)

    def test_include_noise_adds_noise_variance(self, gaussian_kernel, two_node_set):
        """Test that the predictive variance adds σ_n²."""
        # Arrange
        gp = train(
            CovarianceModel(gaussian_kernel, sigma_f=1.0, sigma_n=0.1), two_node_set
        )

        # Act
        latent = predict(gp, [[0.5]]).variance[0]
        predictive = predict(gp, [[0.5]], include_noise=True).variance[0]

        # Assert
        assert predictive - latent == pytest.approx(0.01, rel=1e-9)

    def test_matches_dense_reference(self, gaussian_kernel, two_node_set):
        """Test the Cholesky path against an explicit inverse."""
        # Arrange
        model = CovarianceModel(
            VskKernel(gaussian_kernel, sine_map()), sigma_f=1.3, sigma_n=0.2
        )
        gp = train(model, two_node_set)
        Z = np.linspace(0.0, 1.0, 9)[:, None]

        # Act
        batch = predict(gp, Z)
        mean, variance = dense_posterior(model, two_node_set, Z)

        # Assert
        np.testing.assert_allclose(batch.mean, mean, atol=1e-12)
        np.testing.assert_allclose(batch.variance, variance, atol=1e-12)


class TestConfidence:
    """Test normal quantiles and intervals."""

    def test_quantile_at_five_percent(self):
        """Test z_{0.975}."""
        # Act & Assert
        assert normal_quantile(0.05) == pytest.approx(1.959963985, abs=1e-9)

    def test_one_sigma_interval(self):
        """Test that α = 0.3173 gives roughly ±1."""
        # Act
        lower, upper = confidence_interval(0.0, 1.0, alpha=0.3173)

        # Assert
        assert lower == pytest.approx(-1.0, abs=1e-3)
        assert upper == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
    def test_alpha_outside_unit_interval_rejected(self, alpha):
        """Test α ∉ (0, 1)."""
        # Act & Assert
        with pytest.raises(DomainError, match="between 0 and 1"):
            normal_quantile(alpha)

    def test_negative_variance_rejected(self):
        """Test that negative variances are rejected."""
        # Act & Assert
        with pytest.raises(DomainError, match="non-negative"):
            confidence_interval(0.0, -1.0)


class TestPowerFunction:
    """Test the power function and related quantities."""

    def test_single_node_power(self, single_node_gp):
        """Test P(1) = √(1 − e^{−1})."""
        # Arrange
        expected = np.sqrt(1.0 - np.exp(-1.0))

        # Act & Assert
        power = power_function(single_node_gp, [1.0])
        assert power == pytest.approx(expected, abs=1e-12)

    def test_kernel_and_nodes_form_matches_trained_form(
        self, gaussian_kernel, two_node_set
    ):
        """Test both call forms give the same value."""
        # Arrange
        gp = train(CovarianceModel(gaussian_kernel), two_node_set)

        # Act
        from_model = power_function(gp, [0.3])
        from_kernel = power_function(gaussian_kernel, [0.3], two_node_set.X)

        # Assert
        assert from_model == pytest.approx(from_kernel, abs=1e-14)

    def test_vanishes_at_nodes(self, gaussian_kernel, two_node_set):
        """Test P(x_i) = 0 up to round-off."""
        # Act & Assert
        assert power_function(gaussian_kernel, [1.0], two_node_set.X) < 1e-7

    def test_kernel_form_needs_nodes(self, gaussian_kernel):
        """Test that nodes are required with a bare kernel."""
        # Act & Assert
        with pytest.raises(ConfigurationError, match="Nodes X"):
            power_function(gaussian_kernel, [0.3])

    def test_smoothed_data_equals_observations_without_noise(self, single_node_gp):
        """Test ŷ = y when λ = 0."""
        # Act & Assert
        np.testing.assert_array_equal(smoothed_data(single_node_gp), [2.0])

    def test_smoothed_interpolant_identity(self, gaussian_kernel, two_node_set):
        """Test the posterior mean equals the interpolant of the smoothed data."""
        # Arrange
        gp = train(
            CovarianceModel(gaussian_kernel, sigma_f=1.0, sigma_n=0.3), two_node_set
        )

        # Act
        discrepancy = smoothed_interpolant_identity_check(
            gp, np.linspace(-0.5, 1.5, 21)
        )

        # Assert
        assert discrepancy < 1e-10

    def test_native_norm_single_node(self, single_node_gp):
        """Test ‖s‖ = |y| / √κ(0, 0) = 2."""
        # Act & Assert
        assert native_norm(single_node_gp) == pytest.approx(2.0)


class TestFactorization:
    """Test the jitter ladder."""

    def test_positive_definite_needs_no_jitter(self):
        """Test an SPD matrix factorizes directly."""
        # Act
        _, jitter = factorize_with_jitter(np.eye(3))

        # Assert
        assert jitter == 0.0

    def test_singular_matrix_gets_jitter(self):
        """Test a rank-one PSD matrix succeeds after adding jitter."""
        # Act
        _, jitter = factorize_with_jitter(np.ones((3, 3)))

        # Assert
        assert 0.0 < jitter <= 1e-6

    def test_indefinite_matrix_fails(self):
        """Test a negative definite matrix exhausts the ladder."""
        # Act & Assert
        with pytest.raises(IllConditionedError):
            factorize_with_jitter(-np.eye(2) + 2.0 * np.diag([1.0, 0.0]))

    def test_non_finite_matrix_fails(self):
        """Test NaN entries are rejected."""
        # Act & Assert
        with pytest.raises(IllConditionedError, match="non-finite"):
            factorize_with_jitter(np.array([[1.0, np.nan], [np.nan, 1.0]]))


class TestSamplePaths:
    """Test prior and posterior sample paths."""

    def test_shape_and_reproducibility(self, gaussian_kernel):
        """Test (count, M) output and seed determinism."""
        # Arrange
        model = CovarianceModel(gaussian_kernel, sigma_f=2.0)
        grid = np.linspace(0.0, 1.0, 25)

        # Act
        first = sample_paths(model, grid, count=3, seed=11)
        second = sample_paths(model, grid, count=3, seed=11)

        # Assert
        assert first.shape == (3, 25)
        np.testing.assert_array_equal(first, second)

    def test_zero_sigma_f_gives_zero_paths(self, gaussian_kernel):
        """Test σ_f = 0 yields identically zero prior paths."""
        # Act
        paths = sample_paths(
            CovarianceModel(gaussian_kernel, sigma_f=0.0), [0.0, 0.5], count=2, seed=0
        )

        # Assert
        np.testing.assert_array_equal(paths, np.zeros((2, 2)))

    def test_non_positive_count_rejected(self, gaussian_kernel):
        """Test count < 1."""
        # Act & Assert
        with pytest.raises(DomainError, match="at least 1"):
            sample_paths(CovarianceModel(gaussian_kernel), [0.0], count=0, seed=0)

    def test_posterior_paths_pass_near_data(self, gaussian_kernel, two_node_set):
        """Test posterior paths nearly interpolate noise-free observations."""
        # Arrange
        model = CovarianceModel(gaussian_kernel, sigma_f=1.0)
        grid = np.linspace(0.0, 1.0, 11)

        # Act
        paths = sample_paths(model, grid, count=4, seed=5, condition_on=two_node_set)

        # Assert
        np.testing.assert_allclose(paths[:, 0], 1.0, atol=1e-2)
        np.testing.assert_allclose(paths[:, -1], 0.0, atol=1e-2)

    def test_posterior_paths_on_training_nodes_equal_data(self, jump_training_set):
        """Test a noise-free posterior on its own nodes collapses onto y."""
        # Arrange
        kernel = StationaryKernel(RadialFamily("maternc2"), lengthscale=1.0)
        model = CovarianceModel(kernel, sigma_f=1.0, sigma_n=0.0)

        # Act
        paths = sample_paths(
            model, jump_training_set.X, count=3, seed=2, condition_on=jump_training_set
        )

        # Assert
        np.testing.assert_allclose(
            paths, np.tile(jump_training_set.y, (3, 1)), atol=1e-4
        )

    def test_posterior_paths_mixing_nodes_and_new_points(self, jump_training_set):
        """Test a grid holding every node plus midpoints still factorizes."""
        # Arrange
        kernel = StationaryKernel(RadialFamily("maternc2"), lengthscale=1.0)
        model = CovarianceModel(kernel, sigma_f=1.0, sigma_n=0.0)
        grid = np.linspace(0.0, 1.0, 11)

        # Act
        paths = sample_paths(
            model, grid, count=2, seed=4, condition_on=jump_training_set
        )

        # Assert
        assert np.all(np.isfinite(paths))
        np.testing.assert_allclose(
            paths[:, ::2], np.tile(jump_training_set.y, (2, 1)), atol=1e-3
        )


INTERPOLATION_FAMILIES = [
    "gaussian", "maternc0", "maternc2", "maternc4", "wendland", "imq"
]
INTERPOLATION_SCALINGS = {
    "zero": ZeroMap(),
    "jump": JumpIndicator(0.5),
    "corner": CornerBump(center=0.5, radius=0.5),
    "sin": sine_map(),
    "target": TargetMimic(target=JumpTarget()),
}


class TestPosteriorInvariants:
    """Test identities the posterior satisfies for any data."""

    @pytest.mark.parametrize("family", INTERPOLATION_FAMILIES)
    @pytest.mark.parametrize("scaling", sorted(INTERPOLATION_SCALINGS))
    @pytest.mark.parametrize("n", [2, 9, 27, 50])
    def test_noise_free_mean_interpolates(self, family, scaling, n):
        """Test μ(x_i) = y_i for every kernel family and scaling map when λ = 0."""
        # Arrange
        X = generate(DesignSpec("equispaced", n, ((0.0, 1.0),)))
        target = JumpTarget()
        data = TrainingSet(X, target(X), target.domain)
        base = StationaryKernel(RadialFamily(family), 1.5 / (n - 1))
        model = CovarianceModel(
            VskKernel(base, INTERPOLATION_SCALINGS[scaling]), 2.0, 0.0
        )

        # Act
        mean = predict(train(model, data), X).mean

        # Assert
        np.testing.assert_allclose(mean, data.y, atol=1e-7)

    @settings(max_examples=50, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        sigma_f=st.floats(0.1, 10.0),
        lengthscale=st.floats(0.1, 0.5),
    )
    def test_variance_equals_scaled_power_squared(self, seed, sigma_f, lengthscale):
        """Test Var[F_x | y] = σ_f² P(x)² at random points when σ_n = 0."""
        # Arrange
        X = generate(DesignSpec("halton", 8))
        y = np.random.default_rng(seed).normal(size=8)
        kernel = VskKernel(
            StationaryKernel(RadialFamily("maternc2"), lengthscale), sine_map()
        )
        gp = train(CovarianceModel(kernel, sigma_f, 0.0), TrainingSet(X, y))
        Z = np.random.default_rng(seed + 1).random((20, 1))

        # Act
        variance = predict(gp, Z).variance
        power = np.array([power_function(gp, z) for z in Z])

        # Assert
        np.testing.assert_allclose(
            variance / sigma_f**2, power**2, rtol=0.0, atol=1e-10
        )

    def test_mean_depends_on_sigma_f_only_through_lambda(
        self, jump_training_set, jump_map
    ):
        """Test (σ_f, σ_n) = (1, 0.1) and (5, 0.5) share λ and the posterior mean."""
        # Arrange
        kernel = VskKernel(StationaryKernel(RadialFamily("maternc4"), 0.3), jump_map)
        grid = np.linspace(0.0, 1.0, 101)

        # Act
        small = predict(
            train(CovarianceModel(kernel, 1.0, 0.1), jump_training_set), grid
        )
        large = predict(
            train(CovarianceModel(kernel, 5.0, 0.5), jump_training_set), grid
        )

        # Assert
        np.testing.assert_allclose(large.mean, small.mean, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(
            large.variance, 25.0 * small.variance, rtol=1e-10, atol=1e-14
        )

    @pytest.mark.parametrize("family", ["maternc0", "maternc2", "maternc4"])
    @pytest.mark.parametrize("vsk", [False, True])
    def test_variance_never_grows_with_nested_designs(self, family, vsk, jump_map):
        """Test adding Halton nodes never raises the noise-free posterior variance."""
        # Arrange
        base = StationaryKernel(RadialFamily(family), 0.05)
        kernel = VskKernel(base, jump_map) if vsk else base
        model = CovarianceModel(kernel, 1.0, 0.0)
        grid = np.linspace(0.0, 1.0, 201)
        variances = []

        # Act
        for n in (5, 10, 20, 40):
            X = generate(DesignSpec("halton", n))
            gp = train(model, TrainingSet(X, np.zeros(n)))
            variances.append(predict(gp, grid).variance)

        # Assert
        for coarse, fine in zip(variances, variances[1:]):
            assert np.all(fine <= coarse + 1e-10)
