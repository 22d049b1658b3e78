#!/usr/bin/env python3
"""VSK Kriging - command-line interface (``vskgp``)"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .analysis import (
    OrderEstimate,
    decoupling_ratio,
    default_steps,
    gibbs_equivalence_residual,
    local_metric_residual,
    paciorek_equivalence_residual,
    power_bounds_check,
)
from .artifacts import write_frame
from .config.settings import OUTPUT_DIR, SWEEP_PRESETS
from .config.specs import load_config_file, parse_kernel_spec, parse_kernel_table
from .designs import DESIGN_IDS, DesignSpec, evaluation_grid, generate
from .exceptions import EXIT_OK, ConfigurationError, exit_code_for
from .experiments import (
    EXPERIMENT_IDS,
    ExperimentConfig,
    ExperimentReport,
    run_experiment,
)
from .kernels import VskKernel
from .mle import PARAMETER_NAMES

logger = logging.getLogger(__name__)

DIAGNOSTICS = (
    "local-metric", "gibbs-equiv", "paciorek-equiv", "power-bounds", "decoupling"
)
RUN_KERNEL_KEYS = ("family", "lengthscale", "sigma_f", "sigma_n", "vsk")
CONFIG_KEYS = (
    "n",
    "sweep",
    "kernel",
    "psi",
    "design",
    "noise_std",
    "seed",
    "fit",
    "fix",
    "starts",
    "alpha",
    "paths",
    "out",
)
SCALAR_OVERRIDES = (
    "n",
    "psi",
    "design",
    "noise_std",
    "seed",
    "fit",
    "starts",
    "alpha",
    "paths",
)


class _ArgumentParser(argparse.ArgumentParser):
    """Argument errors become configuration errors (exit code 1)."""

    def error(self, message: str):  # type: ignore[override]
        raise ConfigurationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="vskgp", description="Kriging with variably scaled kernels"
    )
    parser.add_argument(
        "--verbose", "-v", action="store_true", help="Enable debug logging"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a reconstruction experiment")
    run.add_argument("experiment", choices=EXPERIMENT_IDS, help="Experiment id")
    run.add_argument(
        "--config",
        type=Path,
        help="TOML file with experiment settings (flags override it)",
    )
    run.add_argument("--n", type=int, help="Number of nodes (per axis for grids)")
    run.add_argument(
        "--sweep", help="Sweep values: a:b:c (start:step:stop), a,b,c or a preset name"
    )
    run.add_argument(
        "--kernel", help='Kernel spec, e.g. {family = "maternc2", lengthscale = 1.0}'
    )
    run.add_argument("--psi", help="Scaling map spec, e.g. jump(0.5)")
    run.add_argument("--design", choices=DESIGN_IDS, help="Node design")
    run.add_argument(
        "--noise-std", type=float, help="Observation noise standard deviation"
    )
    run.add_argument("--seed", type=int, help="Master seed (default: 0)")
    run.add_argument(
        "--fit", action="store_true", default=None, help="Fit hyperparameters by MLE"
    )
    run.add_argument("--fix", action="append", default=None, metavar="NAME=VALUE",
                     help="Hold a hyperparameter fixed during fits (repeatable)")
    run.add_argument("--starts", type=int, help="Number of MLE starts")
    run.add_argument("--alpha", type=float, help="Confidence parameter (default: 0.05)")
    run.add_argument("--paths", type=int, help="Sample paths per model")
    run.add_argument(
        "--out",
        type=Path,
        help=f"Output directory (default: {OUTPUT_DIR}/<experiment>)",
    )

    diag = commands.add_parser("diag", help="Run a numerical diagnostic")
    diag.add_argument("diagnostic", choices=DIAGNOSTICS, help="Diagnostic id")
    diag.add_argument(
        "--kernel", default="gaussian", help="Base kernel spec (default: gaussian)"
    )
    diag.add_argument("--psi", default="sin", help="Scaling map spec (default: sin)")
    diag.add_argument(
        "--x", default="0.3", help="Evaluation point, comma separated (default: 0.3)"
    )
    diag.add_argument("--x2", default=None, help="Second point for decoupling")
    diag.add_argument(
        "--direction", default=None, help="Step direction, comma separated"
    )
    diag.add_argument(
        "--steps", default="3:12", help="Step exponents a:b, h = 2^-k (default: 3:12)"
    )
    diag.add_argument(
        "--n", type=int, default=8, help="Nodes for power-bounds (default: 8)"
    )
    diag.add_argument(
        "--design",
        choices=DESIGN_IDS,
        default="equispaced",
        help="Node design for power-bounds",
    )
    diag.add_argument(
        "--domain", default="0:1", help="Interval lo:hi for power-bounds (default: 0:1)"
    )
    diag.add_argument(
        "--points",
        type=int,
        default=500,
        help="Evaluation points for power-bounds (default: 500)",
    )
    diag.add_argument(
        "--regularization",
        type=float,
        default=0.0,
        help="Diagonal shift λ for power-bounds",
    )
    diag.add_argument(
        "--out", type=Path, help="Write the diagnostic table to this CSV file"
    )
    return parser


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------


def parse_vector(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in str(text).split(",")], dtype=float)
    except ValueError as exc:
        raise ConfigurationError(
            f"Invalid {what} '{text}': expected comma-separated numbers"
        ) from exc


def parse_sweep(text: Any, experiment_id: str) -> List[int]:
    """
    Sweep values from ``a:b:c`` (inclusive, step b), ``a:c``, ``a,b,c``,
    a list or a preset name.
    """
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    text = str(text).strip()
    presets = SWEEP_PRESETS.get(experiment_id, {})
    if text in presets:
        return list(presets[text])
    try:
        if ":" in text:
            parts = [int(part) for part in text.split(":")]
            if len(parts) == 2:
                start, step, stop = parts[0], 1, parts[1]
            elif len(parts) == 3:
                start, step, stop = parts
            else:
                raise ValueError(text)
            if step <= 0:
                raise ConfigurationError(f"Sweep step must be positive, got {step}")
            return list(range(start, stop + 1, step))
        return [int(part) for part in text.split(",")]
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(
            f"Invalid sweep '{text}'. Use a:b:c, a,b,c or one of {list(presets.keys())}"
        ) from exc


def parse_fixed(items: Any) -> Dict[str, float]:
    """``["sigma_n=0", ...]`` or a mapping to ``{name: value}``."""
    if isinstance(items, dict):
        pairs = list(items.items())
    else:
        pairs = []
        for item in items or []:
            name, sep, value = str(item).partition("=")
            if not sep:
                raise ConfigurationError(
                    f"Fixed hyperparameter must look like NAME=VALUE, got '{item}'"
                )
            pairs.append((name.strip(), value.strip()))
    fixed = {}
    for name, value in pairs:
        if name not in PARAMETER_NAMES:
            raise ConfigurationError(
                f"Hyperparameter '{name}' not found. Available: {list(PARAMETER_NAMES)}"
            )
        try:
            fixed[name] = float(value)
        except ValueError as exc:
            raise ConfigurationError(f"Invalid value for {name}: '{value}'") from exc
    return fixed


def build_run_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge preset, ``--config`` file and flags (flags win)."""
    settings: Dict[str, Any] = {}
    if args.config is not None:
        settings.update(load_config_file(args.config))
    flags = {key: getattr(args, key) for key in CONFIG_KEYS}
    settings.update({k: v for k, v in flags.items() if v is not None})

    unknown = set(settings) - set(flags)
    if unknown:
        raise ConfigurationError(f"Unknown configuration keys: {sorted(unknown)}")

    overrides: Dict[str, Any] = {k: settings.get(k) for k in SCALAR_OVERRIDES}
    if "sweep" in settings:
        overrides["sweep"] = tuple(parse_sweep(settings["sweep"], args.experiment))
    if "fix" in settings:
        overrides["fixed"] = parse_fixed(settings["fix"])
    if "kernel" in settings:
        table = parse_kernel_table(settings["kernel"])
        bad = set(table) - set(RUN_KERNEL_KEYS)
        if bad:
            raise ConfigurationError(
                f"Unknown kernel keys for 'run': {sorted(bad)}. Allowed: "
                f"{list(RUN_KERNEL_KEYS)}"
            )
        scaling = table.pop("vsk", None)
        if scaling is not None and overrides["psi"] is None:
            overrides["psi"] = scaling
        overrides["kernel"] = table
    overrides["output_dir"] = Path(settings.get("out", OUTPUT_DIR / args.experiment))
    return ExperimentConfig.from_preset(args.experiment, **overrides)


def _vsk_from_args(args: argparse.Namespace) -> VskKernel:
    table = parse_kernel_table(args.kernel)
    table.setdefault("vsk", args.psi)
    table["type"] = "vsk"
    return parse_kernel_spec(table)


def _exponent_steps(text: str) -> np.ndarray:
    try:
        low, high = (int(part) for part in text.split(":"))
    except ValueError as exc:
        raise ConfigurationError(f"Invalid step range '{text}': expected a:b") from exc
    if high < low:
        raise ConfigurationError(f"Step range must be increasing, got {text}")
    return default_steps(range(low, high + 1))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def print_report(report: ExperimentReport) -> None:
    """Console summary of an experiment run"""
    print("\n" + "=" * 60)
    print(f"EXPERIMENT: {report.experiment_id}")
    print("=" * 60)
    config = report.config
    print(
        f"Kernel: {config.kernel.get('family')}  psi: {config.psi}  design: "
        f"{config.design}"
    )
    print(
        f"Seed: {config.seed}  sweep: {list(config.sweep)}  MLE: "
        f"{'yes' if config.fit else 'no'}"
    )
    print("-" * 60)
    if not report.sweep.empty:
        print(report.sweep.to_string(index=False, float_format=lambda v: f"{v:.5g}"))
    else:
        frame = report.metrics_frame()
        print(frame.to_string(index=False, float_format=lambda v: f"{v:.5g}"))
    for key, value in report.diagnostics.items():
        if not isinstance(value, dict):
            print(f"  {key}: {value}")
    if report.failures:
        print("-" * 60)
        print(f"FAILURES ({len(report.failures)}):")
        for failure in report.failures:
            print(f"  {failure}")
    if report.artifacts:
        print("-" * 60)
        print(
            f"Artifacts written to: {config.output_dir} ({len(report.artifacts)} files)"
        )


def _print_order(title: str, estimate: OrderEstimate) -> pd.DataFrame:
    print(f"\n{title}")
    print("=" * 60)
    frame = estimate.as_frame()
    print(frame.to_string(index=False, float_format=lambda v: f"{v:.6e}"))
    print("-" * 60)
    if estimate.exact:
        print("Residual below round-off at every step (exact)")
    else:
        print(f"Fitted order: {estimate.order:.3f} ({estimate.fitted_points} points)")
    print(
        f"Monotone over last 5 steps: {'yes' if estimate.decreasing_tail() else 'no'}"
    )
    return frame


def run_diagnostic(args: argparse.Namespace) -> pd.DataFrame:
    """Run one ``diag`` command and print its table."""
    vsk = _vsk_from_args(args)
    x = parse_vector(args.x, "point")

    if args.diagnostic == "local-metric":
        direction = None if args.direction is None else parse_vector(
            args.direction, "direction"
        )
        estimate = local_metric_residual(vsk, x, _exponent_steps(args.steps), direction)
        return _print_order("LOCAL METRIC RESIDUAL", estimate)

    if args.diagnostic == "gibbs-equiv":
        estimate = gibbs_equivalence_residual(vsk, x, _exponent_steps(args.steps))
        return _print_order("GIBBS EQUIVALENCE RESIDUAL", estimate)

    if args.diagnostic == "paciorek-equiv":
        direction = None if args.direction is None else parse_vector(
            args.direction, "direction"
        )
        estimate = paciorek_equivalence_residual(
            vsk, x, _exponent_steps(args.steps), direction
        )
        return _print_order("PACIOREK EQUIVALENCE RESIDUAL", estimate)

    if args.diagnostic == "decoupling":
        if args.x2 is None:
            raise ConfigurationError("Diagnostic 'decoupling' needs --x2")
        x2 = parse_vector(args.x2, "point")
        ratio = decoupling_ratio(vsk, x, x2)
        print("\nDECOUPLING RATIO")
        print("=" * 60)
        print(f"kappa_vsk / kappa at ({args.x}) and ({args.x2}): {ratio:.10g}")
        return pd.DataFrame({"ratio": [ratio]})

    bounds = parse_vector(args.domain.replace(":", ","), "domain")
    if bounds.size != 2:
        raise ConfigurationError(f"Domain must look like lo:hi, got '{args.domain}'")
    domain = [tuple(bounds)]
    X = generate(DesignSpec(args.design, args.n, domain))
    points = evaluation_grid(domain, args.points)
    report = power_bounds_check(
        vsk.base, vsk, X, points, regularization=args.regularization
    )
    print("\nPOWER FUNCTION BOUNDS")
    print("=" * 60)
    for name, met in report.hypotheses.items():
        print(f"  {name}: {'met' if met else 'NOT met'}")
    for name, value in report.eigenvalues.items():
        print(f"  {name}: {value:.6e}")
    lower, upper = report.worst_slacks
    print("-" * 60)
    print(f"Worst lower slack: {lower:.3e}  worst upper slack: {upper:.3e}")
    print(f"Bounds hold: {'yes' if report.bounds_hold else 'no'}")
    return report.as_frame()


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of ``vskgp``; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
    except ConfigurationError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return exit_code_for(exc)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        if args.command == "run":
            report = run_experiment(build_run_config(args))
            print_report(report)
        else:
            frame = run_diagnostic(args)
            if args.out is not None:
                write_frame(frame, args.out)
                print(f"Table written to: {args.out}")
    except Exception as exc:
        logger.debug("Command failed", exc_info=True)
        print(f"Error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
