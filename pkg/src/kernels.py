"""
Radial profiles, stationary kernels, variably scaled kernels and the
classical non-stationary comparators.

Every kernel is an immutable dataclass. ``kernel(X1, X2)`` returns the
cross-covariance matrix of two point sets of shapes ``(n, d)`` and ``(m, d)``;
``kernel.diag(X)`` returns κ(x, x) for every row. The scalar ``eval_*``
helpers evaluate a single pair in canonical (lexicographic) argument order so
that swapping arguments gives bitwise-identical values.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .designs import as_point, as_points
from .exceptions import ConfigurationError, DomainError, UnsupportedOperationError
from .scaling_maps import ScalingMap, ZeroMap

logger = logging.getLogger(__name__)

SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)


# ---------------------------------------------------------------------------
# Radial profiles φ(t), t = r / ℓ
# ---------------------------------------------------------------------------


def _gaussian(t: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * t**2)


def _matern_c0(t: np.ndarray) -> np.ndarray:
    return np.exp(-t)


def _matern_c2(t: np.ndarray) -> np.ndarray:
    return (1.0 + SQRT3 * t) * np.exp(-SQRT3 * t)


def _matern_c4(t: np.ndarray) -> np.ndarray:
    return (1.0 + SQRT5 * t + (5.0 / 3.0) * t**2) * np.exp(-SQRT5 * t)


def _inverse_multiquadric(t: np.ndarray) -> np.ndarray:
    return 1.0 / np.sqrt(1.0 + t**2)


def _wendland(t: np.ndarray, k: int) -> np.ndarray:
    # Wendland functions for spatial dimension up to 3, normalised to φ(0) = 1
    s = np.clip(1.0 - t, 0.0, None)
    if k == 0:
        return s**2
    if k == 1:
        return s**4 * (4.0 * t + 1.0)
    return s**6 * (35.0 * t**2 + 18.0 * t + 3.0) / 3.0


FAMILY_ALIASES: Dict[str, str] = {
    "gaussian": "gaussian",
    "gauss": "gaussian",
    "se": "gaussian",
    "maternc0": "maternc0",
    "exponential": "maternc0",
    "maternc2": "maternc2",
    "maternc4": "maternc4",
    "wendland": "wendland",
    "imq": "imq",
    "inverse_multiquadric": "imq",
    "inversemultiquadric": "imq",
}

FAMILY_IDS = ("gaussian", "maternc0", "maternc2", "maternc4", "wendland", "imq")


@dataclass(frozen=True)
class RadialFamily:
    """
    One-dimensional radial profile φ with φ(0) = 1.

    Attributes:
        family_id: ``gaussian``, ``maternc0``, ``maternc2``, ``maternc4``,
            ``wendland`` or ``imq`` (aliases accepted)
        smoothness: Wendland smoothness index k (0, 1 or 2; k = 1 is the C² function)
        dimension: Spatial dimension the Wendland function is positive definite in
    """

    family_id: str = "gaussian"
    smoothness: int = 1
    dimension: int = 3

    def __post_init__(self) -> None:
        key = str(self.family_id).strip().lower().replace("-", "").replace(" ", "")
        if key not in FAMILY_ALIASES:
            raise ConfigurationError(f"Kernel family '{self.family_id}' not found. "
                                     f"Available families: {list(FAMILY_IDS)}")
        object.__setattr__(self, "family_id", FAMILY_ALIASES[key])
        if self.family_id == "wendland":
            if self.smoothness not in (0, 1, 2):
                raise ConfigurationError(
                    "Wendland smoothness must be between 0 and 2, got "
                    f"{self.smoothness}"
                )
            if not 1 <= self.dimension <= 3:
                raise ConfigurationError(
                    f"Wendland dimension must be between 1 and 3, got {self.dimension}"
                )

    @property
    def is_gaussian(self) -> bool:
        return self.family_id == "gaussian"

    def check_dimension(self, dim: int) -> None:
        """
        Reject point sets the profile is not positive definite on.

        Only the compactly supported Wendland profile is dimension-limited.

        Raises:
            DomainError: If a Wendland profile meets points of dimension > ``dimension``
        """
        if self.family_id == "wendland" and dim > self.dimension:
            raise DomainError(
                f"Wendland profile (k={self.smoothness}) is positive definite up to "
                f"dimension {self.dimension}, got points of dimension {dim}"
            )

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.family_id == "gaussian":
            return _gaussian(t)
        if self.family_id == "maternc0":
            return _matern_c0(t)
        if self.family_id == "maternc2":
            return _matern_c2(t)
        if self.family_id == "maternc4":
            return _matern_c4(t)
        if self.family_id == "imq":
            return _inverse_multiquadric(t)
        return _wendland(t, self.smoothness)


def eval_profile(family: RadialFamily, r: float) -> float:
    """
    Evaluate φ(r).

    Raises:
        DomainError: If r is negative or not finite
    """
    if isinstance(family, str):
        family = RadialFamily(family)
    if not np.isfinite(r):
        raise DomainError(f"Profile argument must be finite, got {r}")
    if r < 0:
        raise DomainError(f"Profile argument must be non-negative, got {r}")
    return float(family(r))


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


def _check_dims(X1: np.ndarray, X2: np.ndarray) -> None:
    if X1.shape[1] != X2.shape[1]:
        raise DomainError(
            f"Point dimensions must match, got {X1.shape[1]} and {X2.shape[1]}"
        )


class Kernel(ABC):
    """Covariance function κ(x, x′) evaluated on point sets."""

    #: True when κ(x, x) = 1 for every x
    normalized: bool = True

    @property
    def kind(self) -> str:
        return type(self).__name__.replace("Kernel", "").lower()

    @abstractmethod
    def _matrix(self, X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
        ...

    def __call__(self, X1, X2) -> np.ndarray:
        X1, X2 = as_points(X1), as_points(X2)
        _check_dims(X1, X2)
        return self._matrix(X1, X2)

    def diag(self, X) -> np.ndarray:
        X = as_points(X)
        return np.ones(X.shape[0])

    def paired(self, X1, X2) -> np.ndarray:
        """Elementwise values κ(X1[i], X2[i])."""
        X1, X2 = as_points(X1), as_points(X2)
        _check_dims(X1, X2)
        if X1.shape[0] != X2.shape[0]:
            raise DomainError(
                f"Paired evaluation needs equally many points, got {X1.shape[0]} and "
                f"{X2.shape[0]}"
            )
        return np.array(
            [self._matrix(X1[i:i + 1], X2[i:i + 1])[0, 0] for i in range(X1.shape[0])]
        )

    def with_lengthscale(self, lengthscale: float) -> "Kernel":
        raise UnsupportedOperationError(
            f"{type(self).__name__} has no global length scale"
        )


def _check_lengthscale(lengthscale: float) -> None:
    if not lengthscale > 0 or not np.isfinite(lengthscale):
        raise ConfigurationError(
            f"Length scale must be positive and finite, got {lengthscale}"
        )


@dataclass(frozen=True)
class StationaryKernel(Kernel):
    """κ_ℓ(x, x′) = φ(‖x − x′‖₂ / ℓ)."""

    profile: RadialFamily = field(default_factory=RadialFamily)
    lengthscale: float = 1.0

    def __post_init__(self) -> None:
        _check_lengthscale(self.lengthscale)

    def _matrix(self, X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
        self.profile.check_dimension(X1.shape[1])
        return self.profile(cdist(X1, X2) / self.lengthscale)

    def paired(self, X1, X2) -> np.ndarray:
        X1, X2 = as_points(X1), as_points(X2)
        _check_dims(X1, X2)
        self.profile.check_dimension(X1.shape[1])
        return self.profile(np.sqrt(np.sum((X1 - X2) ** 2, axis=1)) / self.lengthscale)

    def with_lengthscale(self, lengthscale: float) -> "StationaryKernel":
        return replace(self, lengthscale=float(lengthscale))


@dataclass(frozen=True)
class WarpedKernel(Kernel):
    """Stationary kernel applied to warped inputs: φ(‖g(x) − g(x′)‖ / ℓ)."""

    base: StationaryKernel = field(default_factory=StationaryKernel)
    warp: Callable[[np.ndarray], np.ndarray] = field(default=lambda X: X)

    def _warped(self, X: np.ndarray) -> np.ndarray:
        return as_points(self.warp(X)) if X.shape[0] else X

    def _matrix(self, X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
        return self.base(self._warped(X1), self._warped(X2))

    def paired(self, X1, X2) -> np.ndarray:
        X1, X2 = as_points(X1), as_points(X2)
        return self.base.paired(self._warped(X1), self._warped(X2))

    def with_lengthscale(self, lengthscale: float) -> "WarpedKernel":
        return replace(self, base=self.base.with_lengthscale(lengthscale))


@dataclass(frozen=True)
class VskKernel(Kernel):
    """
    Variably scaled kernel κ^Ψ_ℓ(x, x′) = φ(‖Ψ(x) − Ψ(x′)‖₂ / ℓ) with Ψ(x) = (x, ψ(x)).

    With the zero scaling map the kernel evaluates exactly as ``base``.
    """

    base: StationaryKernel = field(default_factory=StationaryKernel)
    scaling: ScalingMap = field(default_factory=ZeroMap)

    @property
    def profile(self) -> RadialFamily:
        return self.base.profile

    @property
    def lengthscale(self) -> float:
        return self.base.lengthscale

    def lift(self, X) -> np.ndarray:
        """Ψ(X) of shape ``(n, d + q)``."""
        X = as_points(X)
        return np.hstack([X, self.scaling(X)])

    def _matrix(self, X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
        if isinstance(self.scaling, ZeroMap):
            return self.base(X1, X2)
        return self.base(self.lift(X1), self.lift(X2))

    def paired(self, X1, X2) -> np.ndarray:
        X1, X2 = as_points(X1), as_points(X2)
        _check_dims(X1, X2)
        if isinstance(self.scaling, ZeroMap):
            return self.base.paired(X1, X2)
        return self.base.paired(self.lift(X1), self.lift(X2))

    def stationary(self) -> StationaryKernel:
        """The kernel with ψ ≡ 0."""
        return self.base

    def with_lengthscale(self, lengthscale: float) -> "VskKernel":
        return replace(self, base=self.base.with_lengthscale(lengthscale))


@dataclass(frozen=True)
class ConstantLength:
    """ℓ(x) ≡ ℓ."""

    lengthscale: float = 1.0

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return np.full(as_points(X).shape[0], float(self.lengthscale))

    def with_lengthscale(self, lengthscale: float) -> "ConstantLength":
        return ConstantLength(float(lengthscale))


@dataclass(frozen=True)
class ScaledLength:
    """ℓ(x) = ℓ / √(1 + ‖∇ψ(x)‖²)."""

    lengthscale: float = 1.0
    scaling: ScalingMap = field(default_factory=ZeroMap)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        J = self.scaling.gradient(X)
        return self.lengthscale / np.sqrt(1.0 + np.sum(J**2, axis=(1, 2)))

    def with_lengthscale(self, lengthscale: float) -> "ScaledLength":
        return replace(self, lengthscale=float(lengthscale))


@dataclass(frozen=True)
class GibbsKernel(Kernel):
    """
    Gibbs kernel with spatially varying length scale ℓ(·):

        (2ℓ(x)ℓ(x′) / (ℓ(x)² + ℓ(x′)²))^{d/2} · φ(‖x − x′‖ / ℓ̃),

    with ℓ̃² = (ℓ(x)² + ℓ(x′)²) / 2.
    """

    profile: RadialFamily = field(default_factory=RadialFamily)
    length_field: Callable[[np.ndarray], np.ndarray] = field(
        default_factory=ConstantLength
    )

    @classmethod
    def from_scaling(
        cls, profile: RadialFamily, lengthscale: float, scaling: ScalingMap
    ) -> "GibbsKernel":
        """Gibbs kernel locally matching the VSK built on ``scaling``."""
        _check_lengthscale(lengthscale)
        return cls(
            profile=profile, length_field=ScaledLength(float(lengthscale), scaling)
        )

    def _lengths(self, X: np.ndarray) -> np.ndarray:
        L = np.asarray(self.length_field(X), dtype=float).ravel()
        if np.any(~(L > 0)):
            bad = X[np.argmax(~(L > 0))]
            raise DomainError(
                f"Length field must be positive, got {L[np.argmax(~(L > 0))]} at "
                f"{bad.tolist()}"
            )
        return L

    def _matrix(self, X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
        self.profile.check_dimension(X1.shape[1])
        L1, L2 = self._lengths(X1), self._lengths(X2)
        squares = L1[:, None] ** 2 + L2[None, :] ** 2
        prefactor = (2.0 * L1[:, None] * L2[None, :] / squares) ** (0.5 * X1.shape[1])
        return prefactor * self.profile(cdist(X1, X2) / np.sqrt(0.5 * squares))

    def with_lengthscale(self, lengthscale: float) -> "GibbsKernel":
        if not hasattr(self.length_field, "with_lengthscale"):
            return super().with_lengthscale(lengthscale)
        return replace(
            self, length_field=self.length_field.with_lengthscale(lengthscale)
        )


@dataclass(frozen=True)
class ConstantMetric:
    """Σ(x) ≡ Σ."""

    matrix: np.ndarray = field(default_factory=lambda: np.eye(1))

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = as_points(X)
        S = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        return np.broadcast_to(S, (X.shape[0],) + S.shape)


@dataclass(frozen=True)
class ScaledMetric:
    """Σ(x) = ℓ²(I + ∇ψ(x)ᵀ∇ψ(x))⁻¹."""

    lengthscale: float = 1.0
    scaling: ScalingMap = field(default_factory=ZeroMap)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = as_points(X)
        J = self.scaling.gradient(X)
        metric = np.eye(X.shape[1]) + np.einsum("nqi,nqj->nij", J, J)
        return self.lengthscale**2 * np.linalg.inv(metric)

    def with_lengthscale(self, lengthscale: float) -> "ScaledMetric":
        return replace(self, lengthscale=float(lengthscale))


def _cholesky_logdet(S: np.ndarray, what: str) -> Tuple[np.ndarray, np.ndarray]:
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"{what} is not symmetric positive definite") from exc
    logdet = 2.0 * np.sum(np.log(np.diagonal(L, axis1=-2, axis2=-1)), axis=-1)
    return L, logdet


@dataclass(frozen=True)
class PaciorekKernel(Kernel):
    """
    Paciorek–Schervish kernel driven by an SPD matrix field Σ(·):

        |Σ(x)|^{1/4} |Σ(x′)|^{1/4} / |Σ̄|^{1/2} · φ(√Q),  Σ̄ = (Σ(x) + Σ(x′)) / 2,
        Q = (x − x′)ᵀ Σ̄⁻¹ (x − x′).
    """

    profile: RadialFamily = field(default_factory=RadialFamily)
    sigma_field: Callable[[np.ndarray], np.ndarray] = field(
        default_factory=ConstantMetric
    )

    @classmethod
    def from_scaling(
        cls, profile: RadialFamily, lengthscale: float, scaling: ScalingMap
    ) -> "PaciorekKernel":
        """Paciorek kernel locally matching the VSK built on ``scaling``."""
        _check_lengthscale(lengthscale)
        return cls(
            profile=profile, sigma_field=ScaledMetric(float(lengthscale), scaling)
        )

    def _field(self, X: np.ndarray) -> np.ndarray:
        S = np.asarray(self.sigma_field(X), dtype=float)
        d = X.shape[1]
        if S.shape != (X.shape[0], d, d):
            raise DomainError(
                f"Sigma field must return shape {(X.shape[0], d, d)}, got {S.shape}"
            )
        return S

    def quadratic_form(self, X1, X2) -> np.ndarray:
        """Q(x, x′) for every pair, shape ``(n, m)``."""
        X1, X2 = as_points(X1), as_points(X2)
        _check_dims(X1, X2)
        S1, S2 = self._field(X1), self._field(X2)
        L, _ = _cholesky_logdet(
            0.5 * (S1[:, None] + S2[None, :]), "Averaged sigma matrix"
        )
        diff = X1[:, None, :] - X2[None, :, :]
        z = np.linalg.solve(L, diff[..., None])[..., 0]
        return np.sum(z**2, axis=-1)

    def _matrix(self, X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
        self.profile.check_dimension(X1.shape[1])
        S1, S2 = self._field(X1), self._field(X2)
        _, logdet1 = _cholesky_logdet(S1, "Sigma field value")
        _, logdet2 = _cholesky_logdet(S2, "Sigma field value")
        L, logdet_avg = _cholesky_logdet(
            0.5 * (S1[:, None] + S2[None, :]), "Averaged sigma matrix"
        )
        diff = X1[:, None, :] - X2[None, :, :]
        z = np.linalg.solve(L, diff[..., None])[..., 0]
        Q = np.sum(z**2, axis=-1)
        prefactor = np.exp(
            0.25 * logdet1[:, None] + 0.25 * logdet2[None, :] - 0.5 * logdet_avg
        )
        return prefactor * self.profile(np.sqrt(Q))

    def with_lengthscale(self, lengthscale: float) -> "PaciorekKernel":
        if not hasattr(self.sigma_field, "with_lengthscale"):
            return super().with_lengthscale(lengthscale)
        return replace(self, sigma_field=self.sigma_field.with_lengthscale(lengthscale))


@dataclass(frozen=True)
class AmplitudeModulatedKernel(Kernel):
    """σ(x) σ(x′) κ_ℓ(x, x′) for a positive amplitude function σ(·)."""

    base: Kernel = field(default_factory=StationaryKernel)
    amplitude: Callable[[np.ndarray], np.ndarray] = field(
        default=lambda X: np.ones(X.shape[0])
    )
    normalized: bool = field(default=False, init=False)

    def _amplitudes(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.amplitude(X), dtype=float).ravel()

    def _matrix(self, X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
        a1, a2 = self._amplitudes(X1), self._amplitudes(X2)
        return a1[:, None] * a2[None, :] * self.base(X1, X2)

    def diag(self, X) -> np.ndarray:
        X = as_points(X)
        return self._amplitudes(X) ** 2 * self.base.diag(X)


@dataclass(frozen=True)
class LinearVskKernel(Kernel):
    """κ(x, x′) = xᵀx′ + ψ(x)ᵀψ(x′)."""

    scaling: ScalingMap = field(default_factory=ZeroMap)
    normalized: bool = field(default=False, init=False)

    def _matrix(self, X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
        return X1 @ X2.T + self.scaling(X1) @ self.scaling(X2).T

    def diag(self, X) -> np.ndarray:
        X = as_points(X)
        return np.sum(X**2, axis=1) + np.sum(self.scaling(X) ** 2, axis=1)


# ---------------------------------------------------------------------------
# Point-pair evaluation and Gram matrices
# ---------------------------------------------------------------------------


def _canonical_pair(x, x_prime) -> Tuple[np.ndarray, np.ndarray]:
    a, b = as_point(x), as_point(x_prime)
    _check_dims(a, b)
    if tuple(b[0]) < tuple(a[0]):
        a, b = b, a
    return a, b


def eval_kernel(kernel: Kernel, x, x_prime) -> float:
    """κ(x, x′) for a single pair, symmetric to exact equality."""
    a, b = _canonical_pair(x, x_prime)
    return float(kernel(a, b)[0, 0])


def eval_stationary(k: StationaryKernel, x, x_prime) -> float:
    return eval_kernel(k, x, x_prime)


def eval_vsk(k: VskKernel, x, x_prime) -> float:
    return eval_kernel(k, x, x_prime)


def eval_gibbs(k: GibbsKernel, x, x_prime) -> float:
    return eval_kernel(k, x, x_prime)


def eval_paciorek(k: PaciorekKernel, x, x_prime) -> float:
    return eval_kernel(k, x, x_prime)


def gram_matrix(kernel: Kernel, X) -> np.ndarray:
    """
    Gram matrix K_ij = κ(x_i, x_j).

    The upper triangle is mirrored so the result is exactly symmetric.
    """
    X = as_points(X)
    K = kernel(X, X)
    return np.triu(K) + np.triu(K, 1).T


def cross_covariance(kernel: Kernel, X, Z) -> np.ndarray:
    """Matrix κ(x_i, z_j) of shape ``(len(X), len(Z))``."""
    return kernel(as_points(X), as_points(Z))


def amplitude_decomposition(
    k: VskKernel, x, x_prime, sigma_f: float = 1.0
) -> Tuple[float, float, float]:
    """
    Split a Gaussian VSK into amplitude modulation of a non-stationary correlation.

    Returns ``(σ̃_f(x), σ̃_f(x′), r^Ψ(x, x′))`` with
    σ̃_f(x) = σ_f exp(−‖ψ(x)‖² / (2ℓ²)) and
    r^Ψ(x, x′) = κ_ℓ(x, x′) exp(ψ(x)ᵀψ(x′) / ℓ²), so that the product of the
    three equals σ_f² κ^Ψ(x, x′).

    Raises:
        UnsupportedOperationError: If the profile is not Gaussian
    """
    a, b = as_point(x), as_point(x_prime)
    amp_a, amp_b, corr = pairwise_amplitude_decomposition(k, a, b, sigma_f)
    return float(amp_a[0]), float(amp_b[0]), float(corr[0])


def pairwise_amplitude_decomposition(k: VskKernel, X1, X2, sigma_f: float = 1.0):
    """Elementwise amplitude decomposition for paired rows of ``X1`` and ``X2``."""
    if not k.profile.is_gaussian:
        raise UnsupportedOperationError(
            "Amplitude decomposition needs a Gaussian profile, "
            f"got '{k.profile.family_id}'"
        )
    X1, X2 = as_points(X1), as_points(X2)
    ell2 = k.lengthscale**2
    psi1, psi2 = k.scaling(X1), k.scaling(X2)
    amp1 = sigma_f * np.exp(-np.sum(psi1**2, axis=1) / (2.0 * ell2))
    amp2 = sigma_f * np.exp(-np.sum(psi2**2, axis=1) / (2.0 * ell2))
    corr = k.base.paired(X1, X2) * np.exp(np.sum(psi1 * psi2, axis=1) / ell2)
    return amp1, amp2, corr
