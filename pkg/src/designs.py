"""
Node-set generators, evaluation grids and seeded noise.

Every generator is a pure function of its DesignSpec; random draws come from
a counter-based Philox stream so a seed gives the same numbers everywhere.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.chebyshev import chebpts1
from scipy.special import ndtri
from scipy.stats import qmc

from .exceptions import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

Domain = Tuple[Tuple[float, float], ...]

DESIGN_IDS = ("equispaced", "halton", "chebyshev", "grid")


def as_points(X: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
    """
    Convert a point set to a float array of shape ``(n, d)``.

    Scalars become a single 1D point and flat sequences are read as ``n``
    points in one dimension.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DomainError(f"Point sets must be 1D or 2D arrays, got shape {arr.shape}")
    return arr


def as_point(x: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
    """Convert a single point (scalar or coordinate vector) to shape ``(1, d)``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(1, -1)
    if arr.ndim == 2 and arr.shape[0] == 1:
        return arr
    raise DomainError(f"Expected a single point, got array of shape {arr.shape}")


def normalize_domain(domain: Sequence[Sequence[float]]) -> Domain:
    """Validate domain bounds ``[(a1, b1), ...]`` and return them as a tuple."""
    bounds = tuple((float(lo), float(hi)) for lo, hi in domain)
    if not bounds:
        raise ConfigurationError("Domain must have at least one axis")
    for lo, hi in bounds:
        if not lo < hi:
            raise ConfigurationError(
                f"Degenerate domain axis [{lo}, {hi}]: "
                "lower bound must be below upper bound"
            )
    return bounds


def domain_diameter(domain: Sequence[Sequence[float]]) -> float:
    """Euclidean diameter of a box domain."""
    widths = np.array([hi - lo for lo, hi in domain], dtype=float)
    return float(np.sqrt(np.sum(widths**2)))


@dataclass(frozen=True)
class DesignSpec:
    """
    Description of a node set.

    Attributes:
        design_id: One of ``equispaced``, ``halton``, ``chebyshev``, ``grid``
        n: Number of nodes, or per-axis counts for tensor grids
        domain: Box bounds, one ``(a, b)`` pair per axis
        include_endpoints: Equispaced designs include both endpoints when True
        halton_skip: Index of the first Halton point (1 skips the origin)
    """

    design_id: str
    n: Union[int, Tuple[int, ...]]
    domain: Domain = ((0.0, 1.0),)
    include_endpoints: bool = True
    halton_skip: int = 1

    def __post_init__(self) -> None:
        if self.design_id not in DESIGN_IDS:
            raise ConfigurationError(
                f"Design '{self.design_id}' not found. "
                f"Available designs: {list(DESIGN_IDS)}"
            )
        object.__setattr__(self, "domain", normalize_domain(self.domain))
        counts = self.n if isinstance(self.n, tuple) else (self.n,)
        if any(int(c) < 1 for c in counts):
            raise ConfigurationError(f"Node count must be at least 1, got {self.n}")
        if self.halton_skip < 0:
            raise ConfigurationError(
                f"Halton skip must be non-negative, got {self.halton_skip}"
            )

    @property
    def dim(self) -> int:
        return len(self.domain)

    def axis_counts(self) -> Tuple[int, ...]:
        """Per-axis node counts for tensor constructions."""
        if isinstance(self.n, tuple):
            if len(self.n) != self.dim:
                raise ConfigurationError(
                    f"Expected {self.dim} per-axis counts, got {len(self.n)}"
                )
            return tuple(int(c) for c in self.n)
        return (int(self.n),) * self.dim

    def total_count(self) -> int:
        if self.design_id == "halton":
            return int(np.prod(self.n)) if isinstance(self.n, tuple) else int(self.n)
        return int(np.prod(self.axis_counts()))


def _equispaced_axis(
    lo: float, hi: float, n: int, include_endpoints: bool = True
) -> np.ndarray:
    if n == 1:
        return np.array([0.5 * (lo + hi)])
    if include_endpoints:
        # i / (n - 1) is exact at the middle index, so odd n samples the midpoint
        axis = lo + (hi - lo) * (np.arange(n) / (n - 1))
        axis[-1] = hi
        return axis
    return np.linspace(lo, hi, n + 2)[1:-1]


def _chebyshev_axis(lo: float, hi: float, n: int) -> np.ndarray:
    # chebpts1 returns the Chebyshev-Gauss points in ascending order
    t = chebpts1(n)
    return lo + 0.5 * (hi - lo) * (t + 1.0)


def _tensor(axes: Sequence[np.ndarray]) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def generate(spec: DesignSpec) -> np.ndarray:
    """
    Generate the node set described by ``spec``.

    Returns:
        np.ndarray: Points of shape ``(N, d)``
    """
    if spec.design_id == "halton":
        n = spec.total_count()
        sampler = qmc.Halton(d=spec.dim, scramble=False)
        if spec.halton_skip:
            sampler.fast_forward(spec.halton_skip)
        unit = sampler.random(n)
        lows = [lo for lo, _ in spec.domain]
        highs = [hi for _, hi in spec.domain]
        points = qmc.scale(unit, lows, highs)
    elif spec.design_id == "chebyshev":
        counts = spec.axis_counts()
        points = _tensor(
            [_chebyshev_axis(lo, hi, c) for (lo, hi), c in zip(spec.domain, counts)]
        )
    else:
        # equispaced in 1D and tensor grids share the per-axis construction
        counts = spec.axis_counts()
        axes = [
            _equispaced_axis(lo, hi, c, spec.include_endpoints)
            for (lo, hi), c in zip(spec.domain, counts)
        ]
        points = _tensor(axes)

    logger.debug(f"Generated {len(points)} {spec.design_id} nodes on {spec.domain}")
    return points


def evaluation_grid(domain: Sequence[Sequence[float]], m: int) -> np.ndarray:
    """Equispaced evaluation grid with ``m`` points per axis, endpoints included."""
    bounds = normalize_domain(domain)
    return _tensor([np.linspace(lo, hi, m) for lo, hi in bounds])


def derive_seed(seed: int, *keys: int) -> int:
    """Derive an independent, reproducible seed for one sub-stream of a run."""
    sequence = np.random.SeedSequence([int(seed), *[int(k) for k in keys]])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def standard_normal(size: Union[int, Tuple[int, ...]], seed: int) -> np.ndarray:
    """
    Draw standard normal variates from a seeded counter-based generator.

    Uniforms from a Philox stream are pushed through the inverse normal CDF,
    which keeps the draws identical across platforms and numpy releases that
    change their default normal sampler.
    """
    generator = np.random.Generator(np.random.Philox(int(seed)))
    uniforms = generator.random(size)
    # random() is half-open at 0; keep ndtri finite
    uniforms = np.clip(uniforms, np.finfo(float).tiny, None)
    return ndtri(uniforms)


def add_noise(
    y: Union[Sequence[float], np.ndarray], sigma: float, seed: int
) -> np.ndarray:
    """
    Add i.i.d. Gaussian observation noise.

    Args:
        y: Clean observations
        sigma: Noise standard deviation (0 returns ``y`` unchanged)
        seed: Seed of the noise stream

    Returns:
        np.ndarray: ``y + sigma * z`` with ``z`` standard normal
    """
    if sigma < 0:
        raise DomainError(f"Noise standard deviation must be non-negative, got {sigma}")
    values = np.asarray(y, dtype=float).copy()
    if sigma == 0:
        return values
    return values + sigma * standard_normal(values.shape, seed)
