"""
Simple Kriging (zero-mean GP regression) on top of any kernel.

Training works in the λ-form: with λ = σ_n² / σ_f² the system
(K_ℓ + λI) α = y is factorized once, and σ_f² only re-enters when variances
are reported.
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigh, solve_triangular
from scipy.spatial.distance import pdist
from scipy.stats import norm

from .config.settings import (
    DEFAULT_ALPHA,
    DISTINCT_TOLERANCE,
    JITTER_GROWTH,
    JITTER_MAX,
    JITTER_START,
    PATH_NEGATIVE_EIGENVALUE,
    PATH_VARIANCE_FLOOR,
)
from .designs import as_point, as_points, normalize_domain, standard_normal
from .exceptions import ConfigurationError, DomainError, IllConditionedError
from .kernels import Kernel, gram_matrix

logger = logging.getLogger(__name__)

Factor = Tuple[np.ndarray, bool]


@dataclass(frozen=True)
class CovarianceModel:
    """
    Kernel plus hyperparameters: σ_f² κ_ℓ(x, x′) + σ_n² δ(x, x′).

    Attributes:
        kernel: Any kernel from ``src.kernels``
        sigma_f: Process standard deviation
        sigma_n: Observation noise standard deviation
    """

    kernel: Kernel
    sigma_f: float = 1.0
    sigma_n: float = 0.0

    def __post_init__(self) -> None:
        for name, value in (("sigma_f", self.sigma_f), ("sigma_n", self.sigma_n)):
            if not np.isfinite(value) or value < 0:
                raise ConfigurationError(
                    f"{name} must be non-negative and finite, got {value}"
                )

    @property
    def regularization(self) -> float:
        """λ = σ_n² / σ_f²."""
        if self.sigma_f == 0:
            raise ConfigurationError(
                "sigma_f must be positive to form the regularization ratio, got 0"
            )
        return self.sigma_n**2 / self.sigma_f**2

    def prior_variance(self, X) -> np.ndarray:
        """Marginal prior variance σ_f² κ(x, x) + σ_n²."""
        return self.sigma_f**2 * self.kernel.diag(X) + self.sigma_n**2

    def training_covariance(self, X) -> np.ndarray:
        """σ_f² K_ℓ + σ_n² I on the nodes ``X``."""
        X = as_points(X)
        signal = self.sigma_f**2 * gram_matrix(self.kernel, X)
        return signal + self.sigma_n**2 * np.eye(X.shape[0])

    def with_hyperparameters(
        self,
        lengthscale: Optional[float] = None,
        sigma_f: Optional[float] = None,
        sigma_n: Optional[float] = None,
    ) -> "CovarianceModel":
        kernel = self.kernel
        if lengthscale is not None:
            kernel = kernel.with_lengthscale(lengthscale)
        return CovarianceModel(
            kernel=kernel,
            sigma_f=self.sigma_f if sigma_f is None else float(sigma_f),
            sigma_n=self.sigma_n if sigma_n is None else float(sigma_n),
        )


@dataclass(frozen=True)
class TrainingSet:
    """
    Pairwise distinct nodes with observations.

    Attributes:
        X: Nodes of shape ``(N, d)``
        y: Observations of shape ``(N,)``
        domain: Optional box bounds every node must lie in
    """

    X: np.ndarray
    y: np.ndarray
    domain: Optional[Tuple[Tuple[float, float], ...]] = None

    def __post_init__(self) -> None:
        X = as_points(self.X).copy()
        y = np.array(self.y, dtype=float).ravel()
        if X.shape[0] < 1:
            raise DomainError("Training set must contain at least one node")
        if X.shape[0] != y.shape[0]:
            raise DomainError(
                f"Expected one observation per node, got {X.shape[0]} nodes and "
                f"{y.shape[0]} values"
            )
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DomainError("Training nodes and observations must be finite")
        if self.domain is not None:
            bounds = normalize_domain(self.domain)
            if len(bounds) != X.shape[1]:
                raise DomainError(
                    f"Domain has {len(bounds)} axes but nodes are "
                    f"{X.shape[1]}-dimensional"
                )
            lows = np.array([lo for lo, _ in bounds])
            highs = np.array([hi for _, hi in bounds])
            if np.any((X < lows) | (X > highs)):
                raise DomainError(
                    f"Training nodes must lie inside the domain {list(bounds)}"
                )
            object.__setattr__(self, "domain", bounds)
        if X.shape[0] > 1:
            gaps = pdist(X, metric="chebyshev")
            if np.min(gaps) <= DISTINCT_TOLERANCE:
                raise DomainError(
                    "Training nodes must be pairwise distinct, closest pair at "
                    f"infinity-norm distance {np.min(gaps):.3e}"
                )
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def size(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


@dataclass
class NumericalDiagnostics:
    """Counters of numerical safeguards applied to a trained model."""

    jitter_used: float = 0.0
    clamped_variances: int = 0
    _lock: threading.Lock = field(
        default_factory=threading.Lock, repr=False, compare=False
    )

    def record_clamps(self, count: int) -> None:
        if count:
            with self._lock:
                self.clamped_variances += int(count)

    def as_dict(self) -> dict:
        return {
            "jitter_used": self.jitter_used, "clamped_variances": self.clamped_variances
        }


def factorize_with_jitter(A: np.ndarray, what: str = "covariance matrix",
                          log_level: int = logging.WARNING) -> Tuple[Factor, float]:
    """
    Cholesky factorization with a jitter ladder.

    Tries the plain matrix first, then adds ``JITTER_START * mean(diag)`` to the
    diagonal and grows it by ``JITTER_GROWTH`` up to ``JITTER_MAX * mean(diag)``.

    Returns:
        tuple: ``((c, lower), jitter)`` as accepted by ``scipy.linalg.cho_solve``

    Raises:
        IllConditionedError: If every rung of the ladder fails
    """
    A = np.asarray(A, dtype=float)
    scale = float(np.mean(np.diag(A))) if A.size else 0.0
    if not np.all(np.isfinite(A)):
        raise IllConditionedError(f"Cannot factorize {what}: non-finite entries")
    if not scale > 0:
        raise IllConditionedError(
            f"Cannot factorize {what}: mean diagonal is {scale}", jitter=0.0
        )

    jitter = 0.0
    next_jitter = JITTER_START * scale
    limit = JITTER_MAX * scale * (1.0 + 1e-9)
    while True:
        try:
            factor = cho_factor(
                A + jitter * np.eye(A.shape[0]), lower=True, check_finite=False
            )
            if jitter > 0:
                logger.log(log_level, f"Factorized {what} with jitter {jitter:.3e}")
            return factor, jitter
        except LinAlgError:
            if next_jitter > limit:
                raise IllConditionedError(
                    f"Cholesky factorization of {what} failed even with jitter "
                    f"{jitter:.3e}",
                    jitter=jitter,
                )
            jitter = next_jitter
            next_jitter *= JITTER_GROWTH
            logger.debug(
                f"Factorization of {what} failed, retrying with jitter {jitter:.3e}"
            )


@dataclass(frozen=True)
class TrainedGP:
    """
    A model conditioned on data; every prediction flows through it.

    Attributes:
        model: Covariance model
        data: Training set
        gram: K_ℓ on the nodes (unit σ_f, no noise)
        factor: Lower Cholesky factor of K_ℓ + λI (+ jitter)
        alpha: (K_ℓ + λI)⁻¹ y
        jitter_used: Jitter added to the diagonal
        diagnostics: Numerical safeguard counters
    """

    model: CovarianceModel
    data: TrainingSet
    gram: np.ndarray
    factor: Factor
    alpha: np.ndarray
    jitter_used: float
    diagnostics: NumericalDiagnostics

    @property
    def regularization(self) -> float:
        return self.model.regularization

    @property
    def lower(self) -> np.ndarray:
        """Lower-triangular factor with the unused triangle zeroed."""
        return np.tril(self.factor[0])


def train(model: CovarianceModel, data: TrainingSet) -> TrainedGP:
    """
    Factorize K_ℓ + λI and solve for the coefficient vector.

    Raises:
        ConfigurationError: If σ_f = 0
        IllConditionedError: If the factorization fails after jitter escalation
    """
    if model.sigma_f == 0:
        raise ConfigurationError("sigma_f must be positive to train a model, got 0")
    lam = model.regularization
    K = gram_matrix(model.kernel, data.X)
    factor, jitter = factorize_with_jitter(
        K + lam * np.eye(data.size), "training covariance"
    )
    alpha = cho_solve(factor, data.y, check_finite=False)
    logger.info(
        f"Trained {model.kernel.kind} model on {data.size} nodes "
        f"(sigma_f={model.sigma_f:.4g}, sigma_n={model.sigma_n:.4g}, "
        f"jitter={jitter:.1e})"
    )
    return TrainedGP(
        model=model,
        data=data,
        gram=K,
        factor=factor,
        alpha=alpha,
        jitter_used=jitter,
        diagnostics=NumericalDiagnostics(jitter_used=jitter),
    )


def _cross(gp: TrainedGP, Z: np.ndarray) -> np.ndarray:
    return gp.model.kernel(gp.data.X, Z)


def predict_mean(gp: TrainedGP, Z) -> np.ndarray:
    """Posterior mean k_ℓ(z)ᵀ α at every row of ``Z``."""
    return _cross(gp, as_points(Z)).T @ gp.alpha


def _clamp(
    values: np.ndarray, diagnostics: Optional[NumericalDiagnostics]
) -> np.ndarray:
    negative = values < 0
    count = int(np.count_nonzero(negative))
    if count:
        logger.debug(f"Clamped {count} negative variances (min {values.min():.3e})")
        if diagnostics is not None:
            diagnostics.record_clamps(count)
    return np.where(negative, 0.0, values)


def predict_variance(gp: TrainedGP, Z, include_noise: bool = False) -> np.ndarray:
    """
    Posterior variance σ_f²[κ(z, z) − k(z)ᵀ(K_ℓ + λI)⁻¹k(z)] (+ σ_n²).

    Negative values from cancellation are clamped to 0 and counted.
    """
    Z = as_points(Z)
    W = solve_triangular(gp.factor[0], _cross(gp, Z), lower=True, check_finite=False)
    reduced = gp.model.kernel.diag(Z) - np.sum(W**2, axis=0)
    variance = gp.model.sigma_f**2 * _clamp(reduced, gp.diagnostics)
    if include_noise:
        variance = variance + gp.model.sigma_n**2
    return variance


def posterior_mean(gp: TrainedGP, x) -> float:
    return float(predict_mean(gp, as_point(x))[0])


def posterior_variance(gp: TrainedGP, x, include_noise: bool = False) -> float:
    return float(predict_variance(gp, as_point(x), include_noise)[0])


def posterior_covariance(gp: TrainedGP, Z) -> np.ndarray:
    """Latent posterior covariance σ_f²(K_ZZ − K_ZX(K_ℓ + λI)⁻¹K_XZ)."""
    Z = as_points(Z)
    W = solve_triangular(gp.factor[0], _cross(gp, Z), lower=True, check_finite=False)
    cov = gram_matrix(gp.model.kernel, Z) - W.T @ W
    cov = 0.5 * (cov + cov.T)
    return gp.model.sigma_f**2 * cov


def power_values(kernel: Kernel, X, Z, regularization: float = 0.0) -> np.ndarray:
    """
    Power function √(κ(z, z) − k(z)ᵀ(K + λI)⁻¹k(z)) at every row of ``Z``.

    With the default λ = 0 this is the noise-free power function.
    """
    X, Z = as_points(X), as_points(Z)
    K = gram_matrix(kernel, X) + regularization * np.eye(X.shape[0])
    factor, _ = factorize_with_jitter(K, "kernel matrix")
    W = solve_triangular(factor[0], kernel(X, Z), lower=True, check_finite=False)
    return np.sqrt(_clamp(kernel.diag(Z) - np.sum(W**2, axis=0), None))


def power_function(source: Union[TrainedGP, Kernel], x, X=None) -> float:
    """
    Power function P(x) of a kernel on nodes ``X``.

    ``source`` is either a trained model (its kernel and nodes are used, always
    noise-free) or a kernel together with the nodes ``X``.
    """
    if isinstance(source, TrainedGP):
        kernel, nodes = source.model.kernel, source.data.X
        if source.model.sigma_n == 0:
            W = solve_triangular(
                source.factor[0],
                _cross(source, as_point(x)),
                lower=True,
                check_finite=False,
            )
            reduced = kernel.diag(as_point(x)) - np.sum(W**2, axis=0)
            return float(np.sqrt(_clamp(reduced, source.diagnostics))[0])
    else:
        if X is None:
            raise ConfigurationError(
                "Nodes X are required when the power function is built from a kernel"
            )
        kernel, nodes = source, X
    return float(power_values(kernel, nodes, as_point(x))[0])


def smoothed_data(gp: TrainedGP) -> np.ndarray:
    """ŷ = (K_ℓ + λI)⁻¹ K_ℓ y; equals y when λ = 0."""
    if gp.model.sigma_n == 0:
        return np.array(gp.data.y, dtype=float)
    return gp.gram @ gp.alpha


def smoothed_interpolant(gp: TrainedGP, Z) -> np.ndarray:
    """Noise-free interpolant k_ℓ(z)ᵀ K_ℓ⁻¹ ŷ of the smoothed data."""
    Z = as_points(Z)
    factor, _ = factorize_with_jitter(gp.gram, "kernel matrix")
    coefficients = cho_solve(factor, smoothed_data(gp), check_finite=False)
    return _cross(gp, Z).T @ coefficients


def smoothed_interpolant_identity_check(gp: TrainedGP, points) -> float:
    """
    Maximum discrepancy between the posterior mean and the interpolant of the
    smoothed data.

    Returns:
        float: max |k(x)ᵀ(K + λI)⁻¹y − k(x)ᵀK⁻¹ŷ| over ``points`` (0 when λ = 0)
    """
    if gp.model.sigma_n == 0:
        return 0.0
    points = as_points(points)
    return float(
        np.max(np.abs(predict_mean(gp, points) - smoothed_interpolant(gp, points)))
    )


def native_norm(gp: TrainedGP) -> float:
    """Native-space norm √(αᵀK_ℓα) of the posterior mean."""
    return float(np.sqrt(max(gp.alpha @ gp.gram @ gp.alpha, 0.0)))


def normal_quantile(alpha: float) -> float:
    """z_{1−α/2} of the standard normal distribution."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(
            f"Confidence parameter alpha must be between 0 and 1, got {alpha}"
        )
    return float(norm.ppf(1.0 - 0.5 * alpha))


def confidence_interval(mean, variance, alpha: float = DEFAULT_ALPHA):
    """
    Two-sided interval mean ± z_{1−α/2} √variance.

    Works elementwise on arrays; scalars give a pair of floats.
    """
    z = normal_quantile(alpha)
    variance = np.asarray(variance, dtype=float)
    if np.any(variance < 0):
        raise DomainError(f"Variance must be non-negative, got {variance.min()}")
    half_width = z * np.sqrt(variance)
    lower, upper = np.asarray(mean) - half_width, np.asarray(mean) + half_width
    if lower.ndim == 0:
        return float(lower), float(upper)
    return lower, upper


@dataclass(frozen=True)
class Prediction:
    """Posterior summary at one point."""

    mean: float
    variance: float
    lower: float
    upper: float

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))


@dataclass(frozen=True)
class PredictionBatch:
    """Posterior summary on a set of points."""

    points: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)


def predict_point(
    gp: TrainedGP, x, alpha: float = DEFAULT_ALPHA, include_noise: bool = False
) -> Prediction:
    mean = posterior_mean(gp, x)
    variance = posterior_variance(gp, x, include_noise)
    lower, upper = confidence_interval(mean, variance, alpha)
    return Prediction(mean=mean, variance=variance, lower=lower, upper=upper)


def predict(
    gp: TrainedGP, Z, alpha: float = DEFAULT_ALPHA, include_noise: bool = False
) -> PredictionBatch:
    """Mean, variance and confidence bounds on a grid."""
    Z = as_points(Z)
    mean = predict_mean(gp, Z)
    variance = predict_variance(gp, Z, include_noise)
    lower, upper = confidence_interval(mean, variance, alpha)
    return PredictionBatch(
        points=Z, mean=mean, variance=variance, lower=lower, upper=upper
    )


def _path_root(cov: np.ndarray) -> np.ndarray:
    """Square root R with R Rᵀ = cov, by Cholesky or else by clipped eigenvalues."""
    try:
        factor, _ = factorize_with_jitter(
            cov, "grid covariance", log_level=logging.DEBUG
        )
        return np.tril(factor[0])
    except IllConditionedError:
        values, vectors = eigh(cov, check_finite=False)
        largest = max(float(values[-1]), 0.0)
        if values[0] < -PATH_NEGATIVE_EIGENVALUE * largest:
            raise IllConditionedError(
                f"Grid covariance is indefinite: smallest eigenvalue {values[0]:.3e}, "
                f"largest {largest:.3e}"
            )
        logger.debug(
            f"Grid covariance factorized by eigenvalues (smallest {values[0]:.3e})"
        )
        return vectors * np.sqrt(np.clip(values, 0.0, None))[None, :]


def sample_paths(
    model: CovarianceModel,
    grid,
    count: int,
    seed: int,
    condition_on: Optional[TrainingSet] = None,
) -> np.ndarray:
    """
    Draw sample paths of the prior, or of the posterior given ``condition_on``.

    Round-off negatives on the covariance diagonal are clamped to zero. When
    every grid variance is below ``PATH_VARIANCE_FLOOR`` σ_f² (e.g. a
    noise-free posterior on its own nodes) each path equals the mean.

    Returns:
        np.ndarray: Shape ``(count, M)``

    Raises:
        DomainError: If count < 1
        IllConditionedError: If the grid covariance is materially indefinite
    """
    if count < 1:
        raise DomainError(f"Path count must be at least 1, got {count}")
    grid = as_points(grid)
    if model.sigma_f == 0:
        return np.zeros((count, grid.shape[0]))

    if condition_on is None:
        mean = np.zeros(grid.shape[0])
        cov = model.sigma_f**2 * gram_matrix(model.kernel, grid)
    else:
        gp = train(model, condition_on)
        mean = predict_mean(gp, grid)
        cov = posterior_covariance(gp, grid)
    cov = 0.5 * (cov + cov.T)
    np.fill_diagonal(cov, np.maximum(np.diag(cov), 0.0))

    kind = "posterior" if condition_on is not None else "prior"
    if np.max(np.diag(cov)) <= PATH_VARIANCE_FLOOR * model.sigma_f**2:
        logger.debug(f"Grid covariance of the {kind} vanishes; paths equal the mean")
        return np.tile(mean, (count, 1))

    z = standard_normal((count, grid.shape[0]), seed)
    paths = mean[None, :] + z @ _path_root(cov).T
    logger.debug(f"Drew {count} {kind} paths on {grid.shape[0]} points")
    return paths


def dense_posterior(
    model: CovarianceModel, data: TrainingSet, Z
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Posterior mean and latent variance via an explicit inverse.

    Only meant for small reference computations.
    """
    Z = as_points(Z)
    K = gram_matrix(model.kernel, data.X) + model.regularization * np.eye(data.size)
    K_inv = np.linalg.inv(K)
    k = model.kernel(data.X, Z)
    mean = k.T @ K_inv @ data.y
    variance = model.sigma_f**2 * (
        model.kernel.diag(Z) - np.einsum("iz,ij,jz->z", k, K_inv, k)
    )
    return mean, variance
