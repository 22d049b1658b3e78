"""
Unit tests for kernels.py

Tests radial profiles, stationary and variably scaled kernels, the Gibbs and
Paciorek comparators and the amplitude decomposition with clear
arrange-act-assert structure.
"""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import pdist

from src.exceptions import ConfigurationError, DomainError, UnsupportedOperationError
from src.kernels import (
    AmplitudeModulatedKernel,
    ConstantLength,
    GibbsKernel,
    LinearVskKernel,
    PaciorekKernel,
    RadialFamily,
    StationaryKernel,
    VskKernel,
    WarpedKernel,
    amplitude_decomposition,
    eval_gibbs,
    eval_kernel,
    eval_paciorek,
    eval_profile,
    eval_stationary,
    eval_vsk,
    gram_matrix,
    pairwise_amplitude_decomposition,
)
from src.scaling_maps import AffineMap, JumpIndicator, StackedMap, ZeroMap, sine_map

unit_floats = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestRadialProfiles:
    """Test radial profile evaluation."""

    def test_gaussian_at_zero_is_one(self):
        """Test the normalization φ(0) = 1 of the Gaussian profile."""
        # Act
        result = eval_profile(RadialFamily("gaussian"), 0.0)

        # Assert
        assert result == 1.0

    def test_gaussian_at_one(self):
        """Test the Gaussian profile exp(−r²/2) at r = 1."""
        # Act
        result = eval_profile(RadialFamily("gaussian"), 1.0)

        # Assert
        assert result == pytest.approx(0.60653065971, abs=1e-11)

    def test_every_family_is_normalized(self):
        """Test φ(0) = 1 for every shipped family."""
        # Arrange
        families = ["gaussian", "maternc0", "maternc2", "maternc4", "wendland", "imq"]

        # Act
        values = [eval_profile(RadialFamily(name), 0.0) for name in families]

        # Assert
        assert values == [1.0] * len(families)

    def test_matern_c2_closed_form(self):
        """Test the Matérn C2 profile (1 + √3 t) e^{−√3 t} at t = 1."""
        # Arrange
        expected = (1.0 + np.sqrt(3.0)) * np.exp(-np.sqrt(3.0))

        # Act
        result = eval_profile("maternc2", 1.0)

        # Assert
        assert result == pytest.approx(expected, rel=1e-15)

    def test_wendland_support_and_value(self):
        """Test the C² Wendland profile (1−t)⁴(4t+1) and its compact support."""
        # Arrange
        family = RadialFamily("wendland", smoothness=1)

        # Act
        inside = eval_profile(family, 0.5)
        outside = eval_profile(family, 1.5)

        # Assert
        assert inside == pytest.approx(0.1875)
        assert outside == 0.0

    def test_aliases_normalize_to_family_id(self):
        """Test that family aliases resolve to canonical ids."""
        # Act & Assert
        assert RadialFamily("exponential").family_id == "maternc0"
        assert RadialFamily("Gauss").family_id == "gaussian"
        assert RadialFamily("inverse-multiquadric").family_id == "imq"

    def test_negative_radius_raises_domain_error(self):
        """Test that a negative argument is rejected."""
        # Act & Assert
        with pytest.raises(DomainError, match="non-negative"):
            eval_profile(RadialFamily("gaussian"), -0.1)

    def test_unknown_family_raises_configuration_error(self):
        """Test that an unknown family name is rejected."""
        # Act & Assert
        with pytest.raises(ConfigurationError, match="not found"):
            RadialFamily("cubic")

    def test_wendland_smoothness_validated(self):
        """Test that unsupported Wendland smoothness is rejected."""
        # Act & Assert
        with pytest.raises(ConfigurationError, match="between 0 and 2"):
            RadialFamily("wendland", smoothness=3)

    @pytest.mark.parametrize("r", [np.nan, np.inf, -np.inf])
    def test_non_finite_radius_raises_domain_error(self, r):
        """Test that NaN and infinite arguments are rejected."""
        # Act & Assert
        with pytest.raises(DomainError, match="finite"):
            eval_profile(RadialFamily("maternc4"), r)

    def test_wendland_rejects_points_above_its_dimension(self):
        """Test a Wendland profile declared for d = 1 on planar points."""
        # Arrange
        kernel = StationaryKernel(RadialFamily("wendland", dimension=1), 0.5)

        # Act & Assert
        with pytest.raises(DomainError, match="up to dimension 1"):
            kernel(np.zeros((2, 2)), np.zeros((2, 2)))

    def test_wendland_dimension_counts_the_lifted_coordinates(self, jump_map):
        """Test a VSK on 1D nodes evaluates its profile in d + q = 2."""
        # Arrange
        narrow = VskKernel(
            StationaryKernel(RadialFamily("wendland", dimension=1), 2.0), jump_map
        )
        wide = VskKernel(
            StationaryKernel(RadialFamily("wendland", dimension=2), 2.0), jump_map
        )

        # Act & Assert
        with pytest.raises(DomainError, match="dimension 2"):
            narrow([[0.2]], [[0.7]])
        expected = eval_profile("wendland", np.sqrt(1.25) / 2.0)
        assert wide([[0.2]], [[0.7]])[0, 0] == pytest.approx(expected)

    def test_other_families_ignore_dimension(self):
        """Test the dimension limit only applies to Wendland."""
        # Arrange
        kernel = StationaryKernel(RadialFamily("gaussian", dimension=1), 1.0)

        # Act
        K = kernel(np.zeros((1, 5)), np.ones((1, 5)))

        # Assert
        assert K[0, 0] == pytest.approx(np.exp(-2.5))


class TestStationaryKernel:
    """Test the stationary kernel and pair evaluation."""

    def test_same_point_is_one(self, gaussian_kernel):
        """Test κ(x, x) = 1."""
        # Act
        result = eval_stationary(gaussian_kernel, [0.3], [0.3])

        # Assert
        assert result == 1.0

    def test_closed_form_with_lengthscale(self):
        """Test Gaussian ℓ=2 at distance 2 gives exp(−1/2)."""
        # Arrange
        kernel = StationaryKernel(RadialFamily("gaussian"), lengthscale=2.0)

        # Act
        result = eval_stationary(kernel, [0.0], [2.0])

        # Assert
        assert result == pytest.approx(0.6065306597, abs=1e-10)

    def test_invalid_lengthscale_raises(self):
        """Test that a non-positive length scale is rejected."""
        # Act & Assert
        with pytest.raises(ConfigurationError, match="Length scale"):
            StationaryKernel(RadialFamily("gaussian"), lengthscale=0.0)

    def test_dimension_mismatch_raises(self, gaussian_kernel):
        """Test that point sets of different dimension are rejected."""
        # Act & Assert
        with pytest.raises(DomainError, match="dimensions must match"):
            gaussian_kernel(np.zeros((2, 1)), np.zeros((2, 2)))

    def test_paired_matches_matrix_diagonal(self, gaussian_kernel):
        """Test that paired evaluation equals the diagonal of the cross matrix."""
        # Arrange
        X1 = np.array([[0.0], [0.3], [0.9]])
        X2 = np.array([[0.1], [0.5], [0.2]])

        # Act
        paired = gaussian_kernel.paired(X1, X2)
        full = gaussian_kernel(X1, X2)

        # Assert
        np.testing.assert_allclose(paired, np.diag(full), rtol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(unit_floats, unit_floats)
    def test_pair_evaluation_is_symmetric(self, x, y):
        """Test that swapping arguments gives identical values."""
        # Arrange
        kernel = VskKernel(StationaryKernel(RadialFamily("maternc2"), 0.4), sine_map())

        # Act & Assert
        assert eval_kernel(kernel, [x], [y]) == eval_kernel(kernel, [y], [x])


class TestVskKernel:
    """Test variably scaled kernels."""

    def test_jump_closed_form(self, gaussian_kernel, jump_map):
        """Test the lifted distance across the jump: exp(−1.04/2)."""
        # Arrange
        kernel = VskKernel(gaussian_kernel, jump_map)

        # Act
        result = eval_vsk(kernel, [0.4], [0.6])

        # Assert
        assert result == pytest.approx(0.5945205480, abs=1e-10)

    def test_same_point_is_one(self, gaussian_kernel, jump_map):
        """Test κ^Ψ(x, x) = 1."""
        # Act
        result = eval_vsk(VskKernel(gaussian_kernel, jump_map), [0.7], [0.7])

        # Assert
        assert result == 1.0

    def test_zero_map_equals_stationary_exactly(self, gaussian_kernel):
        """Test that ψ ≡ 0 gives the stationary kernel bit for bit."""
        # Arrange
        X = np.linspace(0.0, 1.0, 7)[:, None]
        vsk = VskKernel(gaussian_kernel, ZeroMap())

        # Act & Assert
        np.testing.assert_array_equal(vsk(X, X), gaussian_kernel(X, X))

    def test_lift_appends_scaling_values(self, gaussian_kernel, jump_map):
        """Test Ψ(x) = (x, ψ(x))."""
        # Act
        lifted = VskKernel(gaussian_kernel, jump_map).lift([[0.2], [0.8]])

        # Assert
        np.testing.assert_array_equal(lifted, [[0.2, 0.0], [0.8, 1.0]])

    def test_vsk_is_warped_kernel_with_lift(self, gaussian_kernel):
        """Test that a warped kernel with g = Ψ reproduces the VSK."""
        # Arrange
        vsk = VskKernel(gaussian_kernel, sine_map())
        warped = WarpedKernel(gaussian_kernel, vsk.lift)
        X = np.linspace(0.0, 2.0, 5)[:, None]

        # Act & Assert
        np.testing.assert_allclose(warped(X, X), vsk(X, X), rtol=1e-15)

    def test_with_lengthscale_keeps_scaling(self, gaussian_kernel, jump_map):
        """Test that replacing ℓ keeps the scaling map."""
        # Act
        updated = VskKernel(gaussian_kernel, jump_map).with_lengthscale(0.25)

        # Assert
        assert updated.lengthscale == 0.25
        assert updated.scaling == jump_map

    @settings(max_examples=100, deadline=None)
    @given(unit_floats, unit_floats)
    def test_lift_never_shrinks_distance(self, x, y):
        """Test κ^Ψ ≤ κ for a decreasing profile, since ‖Ψ(x)−Ψ(y)‖ ≥ ‖x−y‖."""
        # Arrange
        base = StationaryKernel(RadialFamily("gaussian"), 0.3)
        vsk = VskKernel(base, sine_map())

        # Act & Assert
        assert eval_kernel(vsk, [x], [y]) <= eval_kernel(base, [x], [y]) + 1e-15


class TestGibbsAndPaciorek:
    """Test the classical non-stationary comparators."""

    def test_gibbs_constant_length_equals_stationary(self, gaussian_kernel):
        """Test that a constant length field reduces to the stationary kernel."""
        # Arrange
        gibbs = GibbsKernel(RadialFamily("gaussian"), ConstantLength(1.0))
        X = np.linspace(-1.0, 1.0, 6)[:, None]

        # Act & Assert
        np.testing.assert_allclose(gibbs(X, X), gaussian_kernel(X, X), rtol=1e-14)

    def test_gibbs_closed_form(self):
        """Test ℓ(0)=1, ℓ(1)=2: √(4/5)·exp(−1/5)."""
        # Arrange
        gibbs = GibbsKernel(
            RadialFamily("gaussian"), lambda X: np.where(X[:, 0] < 0.5, 1.0, 2.0)
        )

        # Act
        result = eval_gibbs(gibbs, [0.0], [1.0])

        # Assert
        assert result == pytest.approx(np.sqrt(0.8) * np.exp(-0.2), abs=1e-12)

    def test_paciorek_closed_form_matches_gibbs(self):
        """Test Σ(0)=1, Σ(1)=4 in one dimension gives the Gibbs value."""
        # Arrange
        paciorek = PaciorekKernel(
            RadialFamily("gaussian"),
            lambda X: np.where(X[:, 0] < 0.5, 1.0, 4.0)[:, None, None],
        )

        # Act
        result = eval_paciorek(paciorek, [0.0], [1.0])

        # Assert
        assert result == pytest.approx(np.sqrt(0.8) * np.exp(-0.2), abs=1e-12)

    def test_paciorek_isotropic_field_equals_stationary(self):
        """Test Σ ≡ ℓ²I reduces to the stationary kernel (ψ ≡ 0)."""
        # Arrange
        profile = RadialFamily("maternc2")
        paciorek = PaciorekKernel.from_scaling(profile, 0.5, ZeroMap())
        stationary = StationaryKernel(profile, 0.5)
        X = np.random.default_rng(3).random((6, 2))

        # Act & Assert
        np.testing.assert_allclose(paciorek(X, X), stationary(X, X), rtol=1e-12)

    def test_same_point_is_one(self):
        """Test that both comparators are normalized."""
        # Arrange
        gibbs = GibbsKernel.from_scaling(RadialFamily("gaussian"), 0.5, sine_map())
        paciorek = PaciorekKernel.from_scaling(
            RadialFamily("gaussian"), 0.5, sine_map()
        )

        # Act & Assert
        assert eval_gibbs(gibbs, [0.3], [0.3]) == pytest.approx(1.0, abs=1e-15)
        assert eval_paciorek(paciorek, [0.3], [0.3]) == pytest.approx(1.0, abs=1e-15)

    def test_gibbs_from_affine_scaling_has_reduced_length(self):
        """Test ℓ(x) = ℓ/√(1+w²) for ψ(x) = w x."""
        # Arrange
        gibbs = GibbsKernel.from_scaling(
            RadialFamily("gaussian"), 1.0, AffineMap(weights=(2.0,))
        )
        stationary = StationaryKernel(RadialFamily("gaussian"), 1.0 / np.sqrt(5.0))
        X = np.linspace(0.0, 1.0, 4)[:, None]

        # Act & Assert
        np.testing.assert_allclose(gibbs(X, X), stationary(X, X), rtol=1e-13)

    def test_non_positive_length_raises(self):
        """Test that a vanishing length field is rejected."""
        # Arrange
        gibbs = GibbsKernel(RadialFamily("gaussian"), lambda X: np.zeros(X.shape[0]))

        # Act & Assert
        with pytest.raises(DomainError, match="positive"):
            gibbs([[0.0]], [[1.0]])

    def test_non_spd_sigma_raises(self):
        """Test that a non-SPD sigma field is rejected."""
        # Arrange
        paciorek = PaciorekKernel(
            RadialFamily("gaussian"), lambda X: -np.ones((X.shape[0], 1, 1))
        )

        # Act & Assert
        with pytest.raises(DomainError, match="positive definite"):
            paciorek([[0.0]], [[1.0]])


class TestOtherKernels:
    """Test amplitude-modulated and linear kernels."""

    def test_amplitude_modulated_diagonal(self, gaussian_kernel):
        """Test diag = σ(x)² for a modulated normalized kernel."""
        # Arrange
        kernel = AmplitudeModulatedKernel(gaussian_kernel, lambda X: 1.0 + X[:, 0])

        # Act
        diag = kernel.diag([[0.0], [1.0]])

        # Assert
        np.testing.assert_allclose(diag, [1.0, 4.0])
        assert not kernel.normalized

    def test_linear_vsk_kernel_diagonal(self, jump_map):
        """Test diag = ‖x‖² + ψ(x)² for the linear VSK."""
        # Arrange
        kernel = LinearVskKernel(jump_map)

        # Act
        diag = kernel.diag([[0.2], [0.8]])

        # Assert
        np.testing.assert_allclose(diag, [0.04, 1.64])

    def test_linear_kernel_has_no_lengthscale(self, gaussian_kernel):
        """Test that kernels without a global ℓ refuse with_lengthscale."""
        # Act & Assert
        with pytest.raises(UnsupportedOperationError):
            LinearVskKernel(ZeroMap()).with_lengthscale(0.5)


class TestGramAndDecomposition:
    """Test Gram matrices and the Gaussian amplitude decomposition."""

    def test_single_node_gram(self, gaussian_kernel):
        """Test that one node gives [[1]]."""
        # Act
        K = gram_matrix(gaussian_kernel, [[0.4]])

        # Assert
        np.testing.assert_array_equal(K, [[1.0]])

    def test_gram_is_exactly_symmetric(self):
        """Test exact symmetry of a VSK Gram matrix."""
        # Arrange
        kernel = VskKernel(StationaryKernel(RadialFamily("maternc4"), 0.2), sine_map())
        X = np.random.default_rng(0).random((9, 1))

        # Act
        K = gram_matrix(kernel, X)

        # Assert
        np.testing.assert_array_equal(K, K.T)

    def test_zero_map_decomposition(self, gaussian_kernel):
        """Test ψ ≡ 0 gives σ̃ = σ_f and r = κ."""
        # Arrange
        vsk = VskKernel(gaussian_kernel, ZeroMap())

        # Act
        amp_x, amp_y, corr = amplitude_decomposition(vsk, [0.1], [0.7], sigma_f=2.0)

        # Assert
        assert amp_x == 2.0 and amp_y == 2.0
        assert corr == pytest.approx(
            eval_stationary(gaussian_kernel, [0.1], [0.7]), rel=1e-15
        )

    def test_same_point_product_is_variance(self, gaussian_kernel, jump_map):
        """Test σ̃(x)² r(x, x) = σ_f²."""
        # Arrange
        vsk = VskKernel(gaussian_kernel, jump_map)

        # Act
        amp_x, amp_y, corr = amplitude_decomposition(vsk, [0.8], [0.8], sigma_f=3.0)

        # Assert
        assert amp_x * amp_y * corr == pytest.approx(9.0, rel=1e-14)

    def test_identity_on_random_pairs(self):
        """Test σ̃(x)σ̃(x′)r(x, x′) = σ_f² κ^Ψ(x, x′) on 10⁴ random pairs."""
        # Arrange
        rng = np.random.default_rng(2024)
        X1, X2 = rng.random((10_000, 1)), rng.random((10_000, 1))
        vsk = VskKernel(StationaryKernel(RadialFamily("gaussian"), 0.7), sine_map())

        # Act
        amp1, amp2, corr = pairwise_amplitude_decomposition(vsk, X1, X2, sigma_f=1.5)

        # Assert
        np.testing.assert_allclose(
            amp1 * amp2 * corr, 2.25 * vsk.paired(X1, X2), rtol=1e-12
        )

    def test_non_gaussian_profile_unsupported(self, jump_map):
        """Test that the decomposition needs a Gaussian profile."""
        # Arrange
        vsk = VskKernel(StationaryKernel(RadialFamily("maternc2"), 1.0), jump_map)

        # Act & Assert
        with pytest.raises(UnsupportedOperationError, match="Gaussian"):
            amplitude_decomposition(vsk, [0.1], [0.2])


STRICTLY_PD_FAMILIES = [
    "gaussian", "maternc0", "maternc2", "maternc4", "wendland", "imq"
]
MONOTONE_FAMILIES = ["maternc0", "maternc2", "maternc4", "wendland", "imq"]


def _separated_points(seed: int, n: int, dim: int) -> np.ndarray:
    X = np.random.default_rng(seed).random((n, dim))
    assume(pdist(X).min() > 1e-3)
    return X


class TestKernelProperties:
    """Test kernel invariants on random inputs."""

    @pytest.mark.parametrize("family", STRICTLY_PD_FAMILIES)
    @settings(max_examples=30, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        n=st.integers(2, 12),
        dim=st.sampled_from([1, 2, 3]),
    )
    def test_gram_matrix_positive_definite(self, family, seed, n, dim):
        """Test K has a positive spectrum and a Cholesky factor on distinct nodes."""
        # Arrange
        X = _separated_points(seed, n, dim)
        kernel = StationaryKernel(RadialFamily(family), 1.5 * pdist(X).min())

        # Act
        K = gram_matrix(kernel, X)

        # Assert
        assert np.linalg.eigvalsh(K).min() > 0.0
        np.linalg.cholesky(K)

    @pytest.mark.parametrize("family", STRICTLY_PD_FAMILIES)
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 10))
    def test_vsk_gram_matrix_positive_definite(self, family, seed, n):
        """Test the VSK Gram matrix on distinct 1D nodes lifted by a jump and a sine."""
        # Arrange
        X = _separated_points(seed, n, 1)
        scaling = StackedMap(maps=(JumpIndicator(0.5), sine_map()))
        kernel = VskKernel(
            StationaryKernel(RadialFamily(family), 1.5 * pdist(X).min()), scaling
        )

        # Act
        K = gram_matrix(kernel, X)

        # Assert
        assert np.linalg.eigvalsh(K).min() > 0.0

    @pytest.mark.parametrize("family", MONOTONE_FAMILIES)
    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), lengthscale=st.floats(0.05, 2.0))
    def test_vsk_dominated_entrywise(self, family, seed, lengthscale):
        """Test κ^Ψ ≤ κ entrywise for every non-increasing profile."""
        # Arrange
        X = np.random.default_rng(seed).random((15, 1))
        base = StationaryKernel(RadialFamily(family), lengthscale)
        vsk = VskKernel(base, StackedMap(maps=(JumpIndicator(0.5), sine_map())))

        # Act
        difference = gram_matrix(vsk, X) - gram_matrix(base, X)

        # Assert
        assert difference.max() <= 1e-15

    @pytest.mark.parametrize("family", ["gaussian", "maternc2", "imq"])
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([1, 2, 3]))
    def test_gibbs_equals_paciorek_with_isotropic_field(self, family, seed, dim):
        """Test Σ(x) = ℓ(x)²I makes the two comparators coincide."""
        # Arrange
        rng = np.random.default_rng(seed)
        X1, X2 = rng.uniform(-1.0, 1.0, (6, dim)), rng.uniform(-1.0, 1.0, (5, dim))
        amplitude, frequency = rng.uniform(0.05, 0.4), rng.uniform(0.5, 4.0)

        def lengths(X):
            return 0.5 + amplitude * np.sin(frequency * X.sum(axis=1))

        def sigmas(X):
            return lengths(X)[:, None, None] ** 2 * np.eye(X.shape[1])

        gibbs = GibbsKernel(RadialFamily(family), lengths)
        paciorek = PaciorekKernel(RadialFamily(family), sigmas)

        # Act & Assert
        np.testing.assert_allclose(
            gibbs(X1, X2), paciorek(X1, X2), rtol=1e-12, atol=1e-15
        )
