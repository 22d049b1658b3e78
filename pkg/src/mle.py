"""
Hyperparameter estimation by minimizing the negative log marginal likelihood.

Parameters (ℓ, σ_f, σ_n) are optimized in log space with a bounded
Nelder-Mead simplex from several scrambled Halton starts.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import cho_solve
from scipy.optimize import minimize
from scipy.stats import qmc

from .config.settings import (
    LENGTHSCALE_BOUNDS,
    MLE_DEFAULT_STARTS,
    MLE_FAILED_OBJECTIVE,
    MLE_MAX_ITERATIONS,
    MLE_SIMPLEX_TOLERANCE,
    SIGMA_F_BOUNDS,
    SIGMA_N_BOUNDS,
    SIGMA_N_NOISE_BOUNDS,
)
from .designs import domain_diameter
from .exceptions import ConfigurationError, FitError, IllConditionedError, VskError
from .gp import CovarianceModel, TrainingSet, factorize_with_jitter
from .kernels import Kernel, gram_matrix

logger = logging.getLogger(__name__)

PARAMETER_NAMES = ("lengthscale", "sigma_f", "sigma_n")
LOG_2PI = np.log(2.0 * np.pi)


def nlml(model: CovarianceModel, data: TrainingSet) -> float:
    """
    Negative log marginal likelihood of ``data`` under ``model``.

    With A = K_ℓ + λI and Σ = σ_f² A:
    ½ yᵀA⁻¹y / σ_f² + ½(N log σ_f² + log det A) + (N/2) log 2π.

    Raises:
        IllConditionedError: If the covariance cannot be factorized
    """
    y, n = data.y, data.size
    if model.sigma_f == 0:
        if model.sigma_n == 0:
            raise IllConditionedError(
                "Covariance is identically zero (sigma_f = sigma_n = 0)", jitter=0.0
            )
        variance = model.sigma_n**2
        return float(
            0.5 * (y @ y) / variance + 0.5 * n * np.log(variance) + 0.5 * n * LOG_2PI
        )

    A = gram_matrix(model.kernel, data.X) + model.regularization * np.eye(n)
    factor, _ = factorize_with_jitter(
        A, "likelihood covariance", log_level=logging.DEBUG
    )
    quadratic = y @ cho_solve(factor, y, check_finite=False)
    logdet = 2.0 * np.sum(np.log(np.diag(factor[0])))
    sf2 = model.sigma_f**2
    return float(
        0.5 * quadratic / sf2 + 0.5 * (n * np.log(sf2) + logdet) + 0.5 * n * LOG_2PI
    )


@dataclass(frozen=True)
class HyperBounds:
    """
    Log-space box for (ℓ, σ_f, σ_n) plus a mask of fixed parameters.

    Attributes:
        lower: Natural-log lower bounds in ``PARAMETER_NAMES`` order
        upper: Natural-log upper bounds in ``PARAMETER_NAMES`` order
        fixed: Parameter name → fixed value (e.g. ``{"sigma_n": 0.0}``)
    """

    lower: Tuple[float, float, float]
    upper: Tuple[float, float, float]
    fixed: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        object.__setattr__(
            self, "fixed", {k: float(v) for k, v in dict(self.fixed).items()}
        )
        if len(self.lower) != 3 or len(self.upper) != 3:
            raise ConfigurationError(
                f"Bounds need one entry per parameter {PARAMETER_NAMES}"
            )
        for name, value in self.fixed.items():
            if name not in PARAMETER_NAMES:
                raise ConfigurationError(
                    f"Parameter '{name}' not found. Available parameters: "
                    f"{list(PARAMETER_NAMES)}"
                )
            if value < 0 or (name != "sigma_n" and value == 0):
                raise ConfigurationError(
                    f"Fixed value of {name} must be positive, got {value}"
                )
        for name, lo, hi in zip(PARAMETER_NAMES, self.lower, self.upper):
            if name not in self.fixed and not lo < hi:
                raise ConfigurationError(
                    f"Lower log-bound of {name} must be below its upper bound, got "
                    f"[{lo}, {hi}]"
                )

    @classmethod
    def default_for(
        cls,
        data: TrainingSet,
        fixed: Optional[Mapping[str, float]] = None,
        domain: Optional[Sequence[Sequence[float]]] = None,
        noise_level: Optional[float] = None,
    ) -> "HyperBounds":
        """
        Scale-aware bounds.

        ℓ is bounded relative to the domain diameter and σ_f relative to
        std(y). σ_n is bounded relative to std(y), or relative to
        ``noise_level`` when the observation noise std is known.
        """
        if noise_level is not None and noise_level <= 0:
            raise ConfigurationError(
                f"Noise level must be positive when given, got {noise_level}"
            )
        if domain is None:
            domain = data.domain
        if domain is not None:
            diameter = domain_diameter(domain)
        else:
            diameter = float(np.linalg.norm(np.ptp(data.X, axis=0)))
        diameter = diameter if diameter > 0 else 1.0
        scale = float(np.std(data.y))
        scale = scale if scale > 0 else 1.0
        if noise_level is None:
            noise_range = (SIGMA_N_BOUNDS[0] * scale, SIGMA_N_BOUNDS[1] * scale)
        else:
            noise_range = (
                SIGMA_N_NOISE_BOUNDS[0] * noise_level,
                SIGMA_N_NOISE_BOUNDS[1] * noise_level,
            )
        ranges = (
            (LENGTHSCALE_BOUNDS[0] * diameter, LENGTHSCALE_BOUNDS[1] * diameter),
            (SIGMA_F_BOUNDS[0] * scale, SIGMA_F_BOUNDS[1] * scale),
            noise_range,
        )
        return cls(
            lower=tuple(np.log(lo) for lo, _ in ranges),
            upper=tuple(np.log(hi) for _, hi in ranges),
            fixed=dict(fixed or {}),
        )

    @property
    def free(self) -> List[str]:
        return [name for name in PARAMETER_NAMES if name not in self.fixed]

    def free_box(self) -> Tuple[np.ndarray, np.ndarray]:
        index = [PARAMETER_NAMES.index(name) for name in self.free]
        return np.array(self.lower)[index], np.array(self.upper)[index]

    def assemble(self, theta: Sequence[float]) -> Dict[str, float]:
        """Map log-values of the free parameters to the full parameter dict."""
        params = dict(self.fixed)
        for name, value in zip(self.free, theta):
            params[name] = float(np.exp(value))
        return params


@dataclass(frozen=True)
class FitResult:
    """
    Outcome of a marginal-likelihood fit.

    Attributes:
        lengthscale, sigma_f, sigma_n: Fitted hyperparameters
        nlml: Objective at the fitted point
        starts_tried: Number of optimizer starts
        converged: Whether the winning start met the simplex tolerance
    """

    lengthscale: float
    sigma_f: float
    sigma_n: float
    nlml: float
    starts_tried: int
    converged: bool

    def to_model(self, template: Union[CovarianceModel, Kernel]) -> CovarianceModel:
        """Rebuild the covariance model from a kernel template."""
        if isinstance(template, Kernel):
            template = CovarianceModel(template)
        return template.with_hyperparameters(
            self.lengthscale, self.sigma_f, self.sigma_n
        )

    def as_dict(self) -> Dict[str, Union[float, int, bool]]:
        return {
            "lengthscale": self.lengthscale,
            "sigma_f": self.sigma_f,
            "sigma_n": self.sigma_n,
            "nlml": self.nlml,
            "starts_tried": self.starts_tried,
            "converged": self.converged,
        }


def _current_lengthscale(model: CovarianceModel) -> float:
    return float(getattr(model.kernel, "lengthscale", np.nan))


def _build(template: CovarianceModel, params: Mapping[str, float]) -> CovarianceModel:
    return template.with_hyperparameters(
        lengthscale=params.get("lengthscale"),
        sigma_f=params.get("sigma_f"),
        sigma_n=params.get("sigma_n"),
    )


def _initial_simplex(
    x0: np.ndarray, lower: np.ndarray, upper: np.ndarray
) -> np.ndarray:
    # one vertex per free parameter, a tenth of its range towards the interior
    simplex = [x0]
    for i in range(len(x0)):
        vertex = x0.copy()
        step = 0.1 * (upper[i] - lower[i])
        vertex[i] = x0[i] + step if x0[i] + step <= upper[i] else x0[i] - step
        simplex.append(vertex)
    return np.array(simplex)


def fit(
    template: Union[CovarianceModel, Kernel],
    data: TrainingSet,
    bounds: Optional[HyperBounds] = None,
    starts: int = MLE_DEFAULT_STARTS,
    seed: int = 0,
) -> FitResult:
    """
    Multi-start bounded Nelder-Mead minimization of the NLML over log-parameters.

    Args:
        template: Covariance model (or bare kernel) whose hyperparameters are fitted
        data: Training set
        bounds: Search box and fixed mask (``HyperBounds.default_for(data)`` when None)
        starts: Number of scrambled Halton starts
        seed: Seed of the start grid

    Returns:
        FitResult: Best point by (nlml, parameters)

    Raises:
        ConfigurationError: If ``starts`` < 1
        FitError: If every start fails to factorize
    """
    if starts < 1:
        raise ConfigurationError(f"Number of starts must be at least 1, got {starts}")
    if isinstance(template, Kernel):
        template = CovarianceModel(template)
    bounds = bounds or HyperBounds.default_for(data)

    if "lengthscale" in bounds.free:
        # fails early for kernels without a global length scale
        template.kernel.with_lengthscale(1.0)

    if not bounds.free:
        model = _build(template, bounds.fixed)
        value = nlml(model, data)
        logger.info(f"All hyperparameters fixed, nlml={value:.6g}")
        return FitResult(
            lengthscale=float(bounds.fixed["lengthscale"]),
            sigma_f=float(bounds.fixed["sigma_f"]),
            sigma_n=float(bounds.fixed["sigma_n"]),
            nlml=value,
            starts_tried=0,
            converged=True,
        )

    lower, upper = bounds.free_box()

    def objective(theta: np.ndarray) -> float:
        try:
            value = nlml(
                _build(template, bounds.assemble(np.clip(theta, lower, upper))), data
            )
        except (VskError, ValueError, np.linalg.LinAlgError) as exc:
            logger.debug(f"NLML evaluation failed at {theta}: {exc}")
            return MLE_FAILED_OBJECTIVE
        return value if np.isfinite(value) else MLE_FAILED_OBJECTIVE

    sampler = qmc.Halton(d=len(lower), scramble=True, seed=seed)
    start_points = qmc.scale(sampler.random(starts), lower, upper)

    candidates: List[Tuple[float, Tuple[float, ...], bool]] = []
    for index, x0 in enumerate(start_points):
        start_value = objective(x0)
        candidates.append((start_value, tuple(x0), False))
        result = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=list(zip(lower, upper)),
            options={
                "maxiter": MLE_MAX_ITERATIONS,
                "xatol": MLE_SIMPLEX_TOLERANCE,
                "fatol": np.inf,
                "initial_simplex": _initial_simplex(x0, lower, upper),
            },
        )
        theta = np.clip(result.x, lower, upper)
        value = objective(theta)
        candidates.append((value, tuple(theta), bool(result.success)))
        logger.debug(
            f"Start {index + 1}/{starts}: nlml {start_value:.6g} -> {value:.6g} "
            f"after {result.nit} iterations"
        )

    best_value, best_theta, converged = min(candidates, key=lambda c: (c[0], c[1]))
    if best_value >= MLE_FAILED_OBJECTIVE:
        raise FitError(
            f"Marginal-likelihood fit failed: all {starts} starts hit factorization "
            "failures"
        )

    params = bounds.assemble(best_theta)
    result = FitResult(
        lengthscale=params.get("lengthscale", _current_lengthscale(template)),
        sigma_f=params["sigma_f"],
        sigma_n=params["sigma_n"],
        nlml=float(best_value),
        starts_tried=starts,
        converged=converged,
    )
    logger.info(
        f"MLE fit: lengthscale={result.lengthscale:.4g}, "
        f"sigma_f={result.sigma_f:.4g}, sigma_n={result.sigma_n:.4g}, "
        f"nlml={result.nlml:.6g}"
    )
    return result
