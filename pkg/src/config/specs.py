# Text grammar for kernel and scaling-map specifications

import logging
import re

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from ..exceptions import ConfigurationError
from ..kernels import (
    GibbsKernel,
    Kernel,
    PaciorekKernel,
    RadialFamily,
    StationaryKernel,
    VskKernel,
)
from ..scaling_maps import (
    AffineMap,
    CornerBump,
    JumpIndicator,
    ScalingMap,
    TargetFunction,
    TargetMimic,
    SCALING_MAPS,
    scaling_map_by_name,
    weierstrass_scaling,
)

logger = logging.getLogger(__name__)

_CALL = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$", re.IGNORECASE)

SCALING_GRAMMAR = (
    "zero | sin | sincos | jump(x0[,...]) | corner(x0,R) | weierstrass(a,b,K) | "
    "target | expcos | affine(w1[,...][;c])"
)
KERNEL_TYPES = ("stationary", "vsk", "gibbs", "paciorek")
KERNEL_KEYS = {"family", "lengthscale", "vsk", "type", "smoothness", "dimension"}


def _numbers(text: str, spec: str) -> list:
    if not text.strip():
        return []
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise ConfigurationError(f"Invalid number in scaling spec '{spec}'") from exc


def _arity(name: str, values: list, allowed: tuple, spec: str) -> None:
    if len(values) not in allowed:
        counts = " or ".join(map(str, allowed))
        raise ConfigurationError(
            f"Scaling map '{name}' takes {counts} arguments, "
            f"got {len(values)} in '{spec}'"
        )


def parse_scaling_spec(
    spec: str, target: Optional[TargetFunction] = None
) -> ScalingMap:
    """
    Build a scaling map from its text form.

    Grammar: ``zero | sin | sincos | jump(x0[,...]) | corner(x0,R) |
    weierstrass(a,b,K) | target | expcos | affine(w1[,...][;c])``.
    ``target`` mimics the experiment target, which must then be supplied.

    Raises:
        ConfigurationError: If the text does not match the grammar
    """
    match = _CALL.match(spec or "")
    if not match:
        raise ConfigurationError(
            f"Cannot parse scaling spec '{spec}'. Expected: {SCALING_GRAMMAR}"
        )
    name, args = match.group(1).lower(), match.group(2) or ""

    if name == "jump":
        values = _numbers(args, spec) or [0.5]
        return JumpIndicator(threshold=tuple(values))
    if name == "corner":
        values = _numbers(args, spec) or [0.5, 0.5]
        _arity(name, values, (2,), spec)
        return CornerBump(center=values[0], radius=values[1])
    if name == "weierstrass":
        values = _numbers(args, spec)
        _arity(name, values, (3,), spec)
        if not values[2].is_integer():
            raise ConfigurationError(
                f"Weierstrass truncation must be an integer, got {values[2]}"
            )
        return weierstrass_scaling(values[0], values[1], int(values[2]))
    if name == "target":
        if target is None:
            raise ConfigurationError("Scaling spec 'target' needs an experiment target")
        return TargetMimic(target=target)
    if name in SCALING_MAPS and not args.strip():
        return scaling_map_by_name(name)
    if name == "affine":
        weights_text, _, offset_text = args.partition(";")
        weights = _numbers(weights_text, spec)
        if not weights:
            raise ConfigurationError(
                f"Affine scaling map needs at least one weight, got '{spec}'"
            )
        offset = _numbers(offset_text, spec) if offset_text else [0.0]
        _arity(name, offset, (1,), spec)
        return AffineMap(weights=tuple(weights), offset=offset[0])
    raise ConfigurationError(
        f"Scaling map '{name}' not found. Expected: {SCALING_GRAMMAR}"
    )


def parse_kernel_table(spec: Union[str, Mapping[str, Any]]) -> Dict[str, Any]:
    """Key/value table of a kernel spec given as TOML, a mapping or a family name."""
    if isinstance(spec, Mapping):
        return dict(spec)
    text = spec.strip()
    if text.startswith("{"):
        try:
            return dict(tomllib.loads(f"kernel = {text}")["kernel"])
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"Invalid kernel spec '{spec}': {exc}") from exc
    return {"family": text}


def parse_kernel_spec(
    spec: Union[str, Mapping[str, Any]], target: Optional[TargetFunction] = None
) -> Kernel:
    """
    Build a kernel from a TOML inline table or a bare family name.

    Example: ``{family = "maternc2", lengthscale = 0.0650, vsk = "jump(0.5)"}``.
    Recognised keys are ``family``, ``lengthscale``, ``vsk``, ``type``
    (stationary, vsk, gibbs or paciorek), ``smoothness`` and ``dimension``.
    """
    table = parse_kernel_table(spec)
    unknown = set(table) - KERNEL_KEYS
    if unknown:
        raise ConfigurationError(f"Unknown kernel spec keys: {sorted(unknown)}")

    profile = RadialFamily(
        family_id=str(table.get("family", "gaussian")),
        smoothness=int(table.get("smoothness", 1)),
        dimension=int(table.get("dimension", 3)),
    )
    lengthscale = float(table.get("lengthscale", 1.0))
    scaling_text = table.get("vsk")
    kind = str(table.get("type", "vsk" if scaling_text else "stationary")).lower()
    if kind not in KERNEL_TYPES:
        raise ConfigurationError(
            f"Kernel type '{kind}' not found. Available types: {list(KERNEL_TYPES)}"
        )

    if kind == "stationary":
        if scaling_text:
            raise ConfigurationError(
                "A stationary kernel cannot carry a 'vsk' scaling map"
            )
        return StationaryKernel(profile, lengthscale)

    scaling = parse_scaling_spec(scaling_text or "zero", target)
    if kind == "vsk":
        return VskKernel(StationaryKernel(profile, lengthscale), scaling)
    if kind == "gibbs":
        return GibbsKernel.from_scaling(profile, lengthscale, scaling)
    return PaciorekKernel.from_scaling(profile, lengthscale, scaling)


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read an experiment configuration from a TOML file.

    Raises:
        ConfigurationError: If the file is missing or is not valid TOML
    """
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"Configuration file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"Invalid TOML in {path}: {exc}") from exc
    logger.info(f"Loaded configuration from {path}")
    return data
