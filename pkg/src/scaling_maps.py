"""
Scaling functions ψ for variably scaled kernels, and the target functions of
the reconstruction experiments.

A scaling map takes points of shape ``(n, d)`` to values of shape ``(n, q)``;
its gradient has shape ``(n, q, d)``. Maps are frozen dataclasses, so they are
safe to share between threads.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import LinearNDInterpolator

from .config.settings import FD_RELATIVE_STEP
from .designs import as_point, as_points
from .exceptions import ConfigurationError, DomainError, UnsupportedOperationError

logger = logging.getLogger(__name__)


def central_difference_gradient(
    func: Callable[[np.ndarray], np.ndarray], X: np.ndarray
) -> np.ndarray:
    """
    Central finite-difference Jacobian of a vectorised map.

    Step per coordinate is ``FD_RELATIVE_STEP * max(1, |x_k|)``.

    Returns:
        np.ndarray: Shape ``(n, q, d)``
    """
    X = as_points(X)
    n, d = X.shape
    columns = []
    for k in range(d):
        step = FD_RELATIVE_STEP * np.maximum(1.0, np.abs(X[:, k]))
        forward = X.copy()
        backward = X.copy()
        forward[:, k] += step
        backward[:, k] -= step
        diff = (np.asarray(func(forward), dtype=float).reshape(n, -1)
                - np.asarray(func(backward), dtype=float).reshape(n, -1))
        columns.append(diff / (2.0 * step)[:, None])
    return np.stack(columns, axis=2)


def _weierstrass_sum(X: np.ndarray, a: float, b: float, terms: int) -> np.ndarray:
    """Σ_{k=0}^{terms} a^k Π_i cos(π b^k x_i)."""
    total = np.zeros(X.shape[0])
    for k in range(terms + 1):
        total += a**k * np.prod(np.cos(np.pi * b**k * X), axis=1)
    return total


def _weierstrass_gradient(X: np.ndarray, a: float, b: float, terms: int) -> np.ndarray:
    n, d = X.shape
    grad = np.zeros((n, d))
    for k in range(terms + 1):
        freq = np.pi * b**k
        cosines = np.cos(freq * X)
        sines = np.sin(freq * X)
        for i in range(d):
            others = np.prod(np.delete(cosines, i, axis=1), axis=1) if d > 1 else 1.0
            grad[:, i] += -(a**k) * freq * sines[:, i] * others
    return grad


# ---------------------------------------------------------------------------
# Target functions
# ---------------------------------------------------------------------------


class TargetFunction(ABC):
    """A scalar target f on a box domain Ω."""

    name: str = "target"
    domain: Tuple[Tuple[float, float], ...] = ((0.0, 1.0),)

    @abstractmethod
    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        ...

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        raise UnsupportedOperationError(
            f"Target '{self.name}' has no closed-form gradient"
        )

    @property
    def has_gradient(self) -> bool:
        return type(self)._gradient is not TargetFunction._gradient

    @property
    def dim(self) -> int:
        return len(self.domain)

    def check_domain(self, X: np.ndarray) -> np.ndarray:
        X = as_points(X)
        if X.shape[1] != self.dim:
            raise DomainError(
                f"Target '{self.name}' expects {self.dim}-dimensional points, got "
                f"{X.shape[1]}"
            )
        lows = np.array([lo for lo, _ in self.domain])
        highs = np.array([hi for _, hi in self.domain])
        outside = np.any((X < lows) | (X > highs), axis=1)
        if np.any(outside):
            first = X[np.argmax(outside)]
            raise DomainError(
                f"Point {first.tolist()} lies outside the domain {list(self.domain)} "
                f"of '{self.name}'"
            )
        return X

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self._evaluate(self.check_domain(X))

    def gradient(self, X: np.ndarray) -> np.ndarray:
        """Gradient of f, shape ``(n, d)``."""
        return self._gradient(self.check_domain(X))


@dataclass(frozen=True)
class JumpTarget(TargetFunction):
    """Oscillating target on [0, 1] with a jump of height 3 at x = 0.5."""

    name: str = field(default="jump", init=False)
    domain: Tuple[Tuple[float, float], ...] = ((0.0, 1.0),)
    jump_at: float = 0.5

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        x = X[:, 0]
        smooth = np.cos(14.0 * np.pi * (x + 0.5)) / (2.0 * x + 0.5) + (x - 0.5) ** 4
        # right branch from the jump point on, matching JumpIndicator
        return smooth + np.where(x < self.jump_at, 3.0, 0.0)


@dataclass(frozen=True)
class WeierstrassTarget(TargetFunction):
    """Truncated 2D Weierstrass function Σ_{k≤K} a^k cos(πb^k x₁)cos(πb^k x₂)."""

    a: float = 0.5
    b: float = 3.0
    terms: int = 12
    name: str = field(default="weierstrass", init=False)
    domain: Tuple[Tuple[float, float], ...] = ((0.0, 1.0), (0.0, 1.0))

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        return _weierstrass_sum(X, self.a, self.b, self.terms)

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        return _weierstrass_gradient(X, self.a, self.b, self.terms)


@dataclass(frozen=True)
class CornerTarget(TargetFunction):
    """Gaussian bump with a corner (gradient jump) at x = 0.5."""

    name: str = field(default="corner", init=False)
    domain: Tuple[Tuple[float, float], ...] = ((0.0, 1.0),)
    corner_at: float = 0.5

    def _shifted(self, x: np.ndarray) -> np.ndarray:
        return 5.0 * (2.0 * x - 1.0) + np.where(x >= self.corner_at, -0.5, 0.5)

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        s = self._shifted(X[:, 0])
        return np.exp(-0.5 * s**2)

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        x = X[:, 0]
        if np.any(x == self.corner_at):
            raise UnsupportedOperationError(
                f"Corner target is not differentiable at x = {self.corner_at}"
            )
        s = self._shifted(x)
        return (-10.0 * s * np.exp(-0.5 * s**2))[:, None]


@dataclass(frozen=True)
class ExpCosTarget(TargetFunction):
    """f(x) = exp(x) - cos(2πx) on [-1, 1]."""

    name: str = field(default="expcos", init=False)
    domain: Tuple[Tuple[float, float], ...] = ((-1.0, 1.0),)

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        x = X[:, 0]
        return np.exp(x) - np.cos(2.0 * np.pi * x)

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        x = X[:, 0]
        return (np.exp(x) + 2.0 * np.pi * np.sin(2.0 * np.pi * x))[:, None]


TARGETS: Dict[str, Callable[[], TargetFunction]] = {
    "jump": JumpTarget,
    "weierstrass": WeierstrassTarget,
    "corner": CornerTarget,
    "expcos": ExpCosTarget,
}


def target_by_name(name: str) -> TargetFunction:
    """Build one of the experiment targets from its name."""
    key = name.strip().lower()
    if key not in TARGETS:
        raise ConfigurationError(
            f"Target '{name}' not found. Available targets: {list(TARGETS.keys())}"
        )
    return TARGETS[key]()


def eval_target(target: TargetFunction, x) -> float:
    """Evaluate a target at a single point."""
    return float(target(as_point(x))[0])


# ---------------------------------------------------------------------------
# Scaling maps
# ---------------------------------------------------------------------------


class ScalingMap(ABC):
    """Scaling function ψ: Ω → R^q defining the lift Ψ(x) = (x, ψ(x))."""

    name: str = "scaling"

    @property
    def output_dim(self) -> int:
        return 1

    @abstractmethod
    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        ...

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        return central_difference_gradient(self._evaluate, X)

    def __call__(self, X) -> np.ndarray:
        """Values of ψ, shape ``(n, q)``."""
        X = as_points(X)
        values = np.asarray(self._evaluate(X), dtype=float)
        return values.reshape(X.shape[0], self.output_dim)

    def gradient(self, X) -> np.ndarray:
        """Jacobian of ψ, shape ``(n, q, d)``."""
        X = as_points(X)
        jacobian = np.asarray(self._gradient(X), dtype=float)
        return jacobian.reshape(X.shape[0], self.output_dim, X.shape[1])


@dataclass(frozen=True)
class ZeroMap(ScalingMap):
    """ψ ≡ 0; the VSK built on it is the stationary kernel."""

    dim_out: int = 1
    name: str = field(default="zero", init=False)

    @property
    def output_dim(self) -> int:
        return self.dim_out

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        return np.zeros((X.shape[0], self.dim_out))

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        return np.zeros((X.shape[0], self.dim_out, X.shape[1]))


@dataclass(frozen=True)
class JumpIndicator(ScalingMap):
    """
    Indicator of the region where every coordinate reaches its threshold.

    In one dimension this is ψ(x) = 1 for x ≥ x₀ and 0 otherwise. A single
    threshold is applied to every coordinate.
    """

    threshold: Tuple[float, ...] = (0.5,)
    name: str = field(default="jump", init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "threshold", tuple(float(t) for t in np.atleast_1d(self.threshold))
        )

    def _thresholds(self, d: int) -> np.ndarray:
        if len(self.threshold) not in (1, d):
            raise DomainError(
                f"Jump indicator has {len(self.threshold)} thresholds for "
                f"{d}-dimensional points"
            )
        return np.broadcast_to(np.asarray(self.threshold), (d,))

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        t = self._thresholds(X.shape[1])
        return np.all(X >= t, axis=1).astype(float)

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        t = self._thresholds(X.shape[1])
        on_boundary = np.any(X == t, axis=1) & np.all(X >= t, axis=1)
        if np.any(on_boundary):
            first = X[np.argmax(on_boundary)].tolist()
            raise UnsupportedOperationError(
                f"Jump indicator is not differentiable at {first}"
            )
        return np.zeros((X.shape[0], 1, X.shape[1]))


@dataclass(frozen=True)
class CornerBump(ScalingMap):
    """
    Compactly supported cubic bump mimicking a corner at x₀:
    1 - (3/2)(u/R) + (1/2)(u/R)³ for u = ‖x - x₀‖ < R, else 0.
    """

    center: float = 0.5
    radius: float = 0.5
    name: str = field(default="corner", init=False)

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ConfigurationError(
                f"Corner bump radius must be positive, got {self.radius}"
            )

    def _distance(self, X: np.ndarray) -> np.ndarray:
        return np.sqrt(np.sum((X - self.center) ** 2, axis=1))

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        t = self._distance(X) / self.radius
        return np.where(t < 1.0, 1.0 - 1.5 * t + 0.5 * t**3, 0.0)

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        u = self._distance(X)
        if np.any(u == 0.0):
            raise UnsupportedOperationError(
                f"Corner bump is not differentiable at its center {self.center}"
            )
        R = self.radius
        slope = np.where(u < R, -1.5 / R + 1.5 * u**2 / R**3, 0.0)
        return (slope / u)[:, None] * (X - self.center)


@dataclass(frozen=True)
class WeierstrassPartial(ScalingMap):
    """Partial Weierstrass sum Σ_{k=0}^{K} a^k Π_i cos(π b^k x_i), k = 0 included."""

    a: float = 0.5
    b: float = 3.0
    terms: int = 0
    name: str = field(default="weierstrass", init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.a < 1.0:
            raise ConfigurationError(
                f"Weierstrass amplitude ratio must be in (0, 1), got {self.a}"
            )
        if self.b <= 1.0:
            raise ConfigurationError(
                f"Weierstrass frequency ratio must exceed 1, got {self.b}"
            )
        if self.terms < 0:
            raise ConfigurationError(
                f"Weierstrass truncation must be non-negative, got {self.terms}"
            )

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        return _weierstrass_sum(X, self.a, self.b, self.terms)

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        return _weierstrass_gradient(X, self.a, self.b, self.terms)


def weierstrass_scaling(a: float, b: float, terms: int) -> ScalingMap:
    """Scaling map with K_vsk = ``terms``; K_vsk = 0 means ψ ≡ 0."""
    if terms == 0:
        return ZeroMap()
    return WeierstrassPartial(a=a, b=b, terms=terms)


@dataclass(frozen=True)
class TargetMimic(ScalingMap):
    """ψ = f, the analytic target itself."""

    target: TargetFunction = field(default_factory=ExpCosTarget)
    name: str = field(default="target", init=False)

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        return self.target(X)

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        if self.target.has_gradient:
            return self.target.gradient(X)
        return central_difference_gradient(self._evaluate, X)


@dataclass(frozen=True)
class Tabulated(ScalingMap):
    """Piecewise-linear interpolation of sampled ψ values."""

    nodes: np.ndarray = field(default_factory=lambda: np.array([[0.0], [1.0]]))
    values: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0]))
    name: str = field(default="tabulated", init=False)

    def __post_init__(self) -> None:
        nodes = as_points(self.nodes)
        values = np.asarray(self.values, dtype=float).ravel()
        if len(nodes) != len(values):
            raise ConfigurationError(f"Tabulated map needs one value per node, "
                                     f"got {len(nodes)} nodes and {len(values)} values")
        if nodes.shape[1] == 1:
            order = np.argsort(nodes[:, 0])
            nodes, values = nodes[order], values[order]
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        if self.nodes.shape[1] != X.shape[1]:
            raise DomainError(f"Tabulated map is {self.nodes.shape[1]}-dimensional, "
                              f"got {X.shape[1]}-dimensional points")
        if X.shape[1] == 1:
            lo, hi = self.nodes[0, 0], self.nodes[-1, 0]
            outside = (X[:, 0] < lo) | (X[:, 0] > hi)
            if np.any(outside):
                raise DomainError(
                    f"Point {X[np.argmax(outside)].tolist()} outside tabulated range "
                    f"[{lo}, {hi}]"
                )
            return np.interp(X[:, 0], self.nodes[:, 0], self.values)
        values = LinearNDInterpolator(self.nodes, self.values)(X)
        if np.any(np.isnan(values)):
            raise DomainError("Point outside the convex hull of the tabulated nodes")
        return values


@dataclass(frozen=True)
class AffineMap(ScalingMap):
    """ψ(x) = wᵀx + c; the local metric expansion is exact for it."""

    weights: Tuple[float, ...] = (1.0,)
    offset: float = 0.0
    name: str = field(default="affine", init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "weights", tuple(float(w) for w in np.atleast_1d(self.weights))
        )

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        w = np.broadcast_to(np.asarray(self.weights), (X.shape[1],))
        return X @ w + self.offset

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        w = np.broadcast_to(np.asarray(self.weights), (X.shape[1],))
        return np.tile(w, (X.shape[0], 1))


@dataclass(frozen=True)
class FunctionMap(ScalingMap):
    """
    User-supplied smooth map.

    ``func`` takes ``(n, d)`` points and returns ``(n,)`` values; the
    optional ``gradient_func`` returns ``(n, d)``.
    """

    func: Callable[[np.ndarray], np.ndarray] = field(
        default=lambda X: np.zeros(X.shape[0])
    )
    gradient_func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = field(default="function", init=False)

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        return self.func(X)

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        if self.gradient_func is not None:
            return self.gradient_func(X)
        return central_difference_gradient(self._evaluate, X)


@dataclass(frozen=True)
class StackedMap(ScalingMap):
    """Concatenation of several maps, giving q > 1."""

    maps: Tuple[ScalingMap, ...] = ()
    name: str = field(default="stacked", init=False)

    def __post_init__(self) -> None:
        if not self.maps:
            raise ConfigurationError("Stacked map needs at least one component")
        object.__setattr__(self, "maps", tuple(self.maps))

    @property
    def output_dim(self) -> int:
        return sum(m.output_dim for m in self.maps)

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        return np.hstack([m(X) for m in self.maps])

    def _gradient(self, X: np.ndarray) -> np.ndarray:
        return np.concatenate([m.gradient(X) for m in self.maps], axis=1)


def eval_scaling(m: ScalingMap, x) -> np.ndarray:
    """ψ(x) at a single point, shape ``(q,)``."""
    return m(as_point(x))[0]


def eval_scaling_gradient(m: ScalingMap, x) -> np.ndarray:
    """Jacobian of ψ at a single point, shape ``(q, d)``."""
    return m.gradient(as_point(x))[0]


def sine_map() -> FunctionMap:
    """ψ(x) = sin(x₁), a smooth map used by the metric diagnostics."""
    return FunctionMap(
        func=lambda X: np.sin(X[:, 0]),
        gradient_func=lambda X: np.column_stack(
            [np.cos(X[:, 0])] + [np.zeros(len(X))] * (X.shape[1] - 1)
        ),
    )


def sine_cosine_map() -> FunctionMap:
    """ψ(x₁, x₂) = sin(x₁)cos(x₂)."""
    return FunctionMap(
        func=lambda X: np.sin(X[:, 0]) * np.cos(X[:, 1]),
        gradient_func=lambda X: np.column_stack([np.cos(X[:, 0]) * np.cos(X[:, 1]),
                                                 -np.sin(X[:, 0]) * np.sin(X[:, 1])]),
    )


# Parameter-free maps addressable by name
SCALING_MAPS: Dict[str, Callable[[], ScalingMap]] = {
    "zero": ZeroMap,
    "sin": sine_map,
    "sincos": sine_cosine_map,
    "expcos": lambda: TargetMimic(target=ExpCosTarget()),
}


def scaling_map_by_name(name: str) -> ScalingMap:
    """Build a parameter-free scaling map from its registry name."""
    key = name.strip().lower()
    if key not in SCALING_MAPS:
        raise ConfigurationError(
            f"Scaling map '{name}' not found. Available maps: "
            f"{list(SCALING_MAPS.keys())}"
        )
    return SCALING_MAPS[key]()
