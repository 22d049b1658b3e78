"""
Experiment runners for the reconstruction studies.

Each runner takes an ExperimentConfig, trains stationary and VSK models
(fixed or MLE-fitted hyperparameters), evaluates them against the analytic
target and, when an output directory is set, writes CSV artifacts plus a
manifest. Sweep entries run in sweep order and each draws its noise from its
own seed stream, so results do not depend on which entries are run.
"""

import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from .analysis import MetricsReport, basis_function_profile, compute_metrics
from .artifacts import (
    dump_covariance,
    write_frame,
    write_json,
    write_manifest,
    write_paths,
    write_predictions,
    write_profiles,
)
from .config.settings import (
    CORNER_SWEEP_SPOTLIGHT,
    DEFAULT_ALPHA,
    DEFAULT_PATH_COUNT,
    MLE_DEFAULT_STARTS,
    get_experiment_preset,
)
from .config.specs import parse_scaling_spec
from .designs import (
    DESIGN_IDS,
    DesignSpec,
    add_noise,
    derive_seed,
    evaluation_grid,
    generate,
)
from .exceptions import ConfigurationError, NumericalError
from .gp import CovarianceModel, TrainedGP, TrainingSet, predict, sample_paths, train
from .kernels import (
    GibbsKernel,
    Kernel,
    PaciorekKernel,
    RadialFamily,
    StationaryKernel,
    VskKernel,
)
from .mle import FitResult, HyperBounds, fit
from .scaling_maps import (
    ScalingMap,
    TargetFunction,
    WeierstrassPartial,
    target_by_name,
    weierstrass_scaling,
)

logger = logging.getLogger(__name__)

EXPERIMENT_IDS = ("jump_fixed", "jump_mle", "weierstrass", "corner", "gibbs_compare")

# Experiments whose sweep runs over the VSK truncation level instead of N
TRUNCATION_SWEEPS = ("weierstrass",)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Full description of one experiment run.

    Attributes:
        experiment_id: One of ``EXPERIMENT_IDS``
        design: Node design id
        n: Node count (per axis for grids)
        domain: Box bounds
        kernel: ``family``, ``lengthscale``, ``sigma_f``, ``sigma_n``
        psi: Scaling-map spec
        target: Target function name
        noise_std: Observation noise standard deviation
        seed: Master seed (noise, MLE starts, sample paths)
        sweep: Node counts, or truncation levels for the Weierstrass study
        fit: Fit hyperparameters by MLE instead of using ``kernel`` values
        fixed: Parameters held fixed during fits
        starts: MLE starts
        alpha: Confidence parameter of the reported intervals
        eval_points: Evaluation points per axis
        paths: Sample paths per model (fixed-hyperparameter study)
        include_noise: Whether reported variances include σ_n²
        output_dir: Where artifacts go (nothing is written when None)
    """

    experiment_id: str
    design: str
    n: int
    domain: Tuple[Tuple[float, float], ...]
    kernel: Mapping[str, Any]
    psi: str
    target: str
    noise_std: float = 0.0
    seed: int = 0
    sweep: Tuple[int, ...] = ()
    fit: bool = True
    fixed: Mapping[str, float] = field(default_factory=dict)
    starts: int = MLE_DEFAULT_STARTS
    alpha: float = DEFAULT_ALPHA
    eval_points: int = 500
    paths: int = DEFAULT_PATH_COUNT
    include_noise: bool = True
    output_dir: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.experiment_id not in EXPERIMENT_IDS:
            raise ConfigurationError(f"Experiment '{self.experiment_id}' not found. "
                                     f"Available experiments: {list(EXPERIMENT_IDS)}")
        if self.design not in DESIGN_IDS:
            raise ConfigurationError(
                f"Design '{self.design}' not found. Available designs: "
                f"{list(DESIGN_IDS)}"
            )
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(
                f"Confidence parameter alpha must be between 0 and 1, got {self.alpha}"
            )
        if self.noise_std < 0:
            raise ConfigurationError(
                f"Noise standard deviation must be non-negative, got {self.noise_std}"
            )
        if self.starts < 1:
            raise ConfigurationError(
                f"Number of starts must be at least 1, got {self.starts}"
            )
        if self.paths < 1:
            raise ConfigurationError(f"Path count must be at least 1, got {self.paths}")
        if self.eval_points < 2:
            raise ConfigurationError(
                "Evaluation grid needs at least 2 points per axis, got "
                f"{self.eval_points}"
            )
        sweep = tuple(int(v) for v in self.sweep) or (int(self.n),)
        smallest = 0 if self.experiment_id in TRUNCATION_SWEEPS else 1
        if any(v < smallest for v in sweep):
            raise ConfigurationError(
                f"Sweep values must be at least {smallest}, got {list(sweep)}"
            )
        if any(b <= a for a, b in zip(sweep, sweep[1:])):
            raise ConfigurationError(
                f"Sweep values must be sorted and distinct, got {list(sweep)}"
            )
        if self.experiment_id == "jump_fixed" and self.fit:
            raise ConfigurationError(
                "Experiment 'jump_fixed' uses fixed hyperparameters; --fit is not "
                "allowed"
            )
        object.__setattr__(self, "sweep", sweep)
        object.__setattr__(
            self, "domain", tuple((float(lo), float(hi)) for lo, hi in self.domain)
        )
        object.__setattr__(self, "kernel", dict(self.kernel))
        object.__setattr__(
            self, "fixed", {k: float(v) for k, v in dict(self.fixed).items()}
        )
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))

    @classmethod
    def from_preset(cls, experiment_id: str, **overrides: Any) -> "ExperimentConfig":
        """
        Build a config from the shipped preset, replacing any given fields.

        ``kernel`` overrides are merged into the preset kernel table.
        """
        try:
            preset = get_experiment_preset(experiment_id)
        except KeyError as exc:
            raise ConfigurationError(str(exc.args[0])) from exc
        kernel = dict(preset["kernel"])
        kernel.update(overrides.pop("kernel", None) or {})
        values: Dict[str, Any] = {
            "experiment_id": experiment_id,
            "design": preset["design"],
            "n": preset["n"],
            "domain": tuple(tuple(axis) for axis in preset["domain"]),
            "kernel": kernel,
            "psi": preset["psi"],
            "target": preset["target"],
            "noise_std": preset["noise_std"],
            "sweep": tuple(preset["sweep"]),
            "fit": preset["fit"],
            "fixed": preset["fixed"],
            "eval_points": preset["eval_points"],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        single_size = (
            overrides.get("n") is not None
            and overrides.get("sweep") is None
            and experiment_id not in TRUNCATION_SWEEPS
        )
        if single_size:
            values["sweep"] = (int(overrides["n"]),)
        return cls(**values)

    def with_output(self, output_dir: Optional[Path]) -> "ExperimentConfig":
        return replace(self, output_dir=output_dir)

    def as_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if self.output_dir is not None:
            data["output_dir"] = self.output_dir.as_posix()
        return data


@dataclass
class ExperimentReport:
    """
    Outcome of one experiment run.

    ``metrics`` and ``fits`` are keyed by model label (``standard``, ``vsk``,
    ``gibbs``) and, for sweeps, by ``label@value``.
    """

    experiment_id: str
    config: ExperimentConfig
    metrics: Dict[str, MetricsReport] = field(default_factory=dict)
    fits: Dict[str, FitResult] = field(default_factory=dict)
    sweep: pd.DataFrame = field(default_factory=pd.DataFrame)
    artifacts: List[Path] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)

    def record(
        self,
        key: str,
        gp: TrainedGP,
        metrics: MetricsReport,
        fit_result: Optional[FitResult],
    ) -> None:
        self.metrics[key] = metrics
        if fit_result is not None:
            self.fits[key] = fit_result
        self.diagnostics[key] = gp.diagnostics.as_dict()

    def metrics_frame(self) -> pd.DataFrame:
        rows = [
            {"model": key, **report.as_dict()} for key, report in self.metrics.items()
        ]
        return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# Shared building blocks
# ---------------------------------------------------------------------------


def _profile(config: ExperimentConfig) -> RadialFamily:
    return RadialFamily(str(config.kernel.get("family", "gaussian")))


def _base_kernel(config: ExperimentConfig) -> StationaryKernel:
    return StationaryKernel(
        _profile(config), float(config.kernel.get("lengthscale", 1.0))
    )


def _template(config: ExperimentConfig, kernel: Kernel) -> CovarianceModel:
    return CovarianceModel(
        kernel=kernel,
        sigma_f=float(config.kernel.get("sigma_f", 1.0)),
        sigma_n=float(config.kernel.get("sigma_n", 0.0)),
    )


def _training_set(
    config: ExperimentConfig, target: TargetFunction, n: int
) -> TrainingSet:
    X = generate(DesignSpec(config.design, n, config.domain))
    y = add_noise(target(X), config.noise_std, derive_seed(config.seed, n))
    return TrainingSet(X, y, config.domain)


def _condition(config: ExperimentConfig, template: CovarianceModel,
               data: TrainingSet) -> Tuple[TrainedGP, Optional[FitResult]]:
    if not config.fit:
        return train(template, data), None
    bounds = HyperBounds.default_for(
        data,
        fixed=config.fixed,
        domain=config.domain,
        noise_level=config.noise_std if config.noise_std > 0 else None,
    )
    result = fit(template, data, bounds, starts=config.starts, seed=config.seed)
    return train(result.to_model(template), data), result


def _metric_columns(prefix: str, suffix: str, metrics: Optional[MetricsReport],
                    fit_result: Optional[FitResult]) -> Dict[str, float]:
    nan = float("nan")
    return {
        f"rmse{suffix}": metrics.rmse if metrics else nan,
        f"mae{suffix}": metrics.mae if metrics else nan,
        f"avgstd{suffix}": metrics.avg_std if metrics else nan,
        f"maxstd{suffix}": metrics.max_std if metrics else nan,
        f"{prefix}lengthscale{suffix}": fit_result.lengthscale if fit_result else nan,
        f"{prefix}sigma_f{suffix}": fit_result.sigma_f if fit_result else nan,
        f"{prefix}sigma_n{suffix}": fit_result.sigma_n if fit_result else nan,
    }


def _finish(report: ExperimentReport) -> ExperimentReport:
    config = report.config
    if config.output_dir is not None:
        manifest = write_manifest(
            config.output_dir,
            report.experiment_id,
            config.as_dict(),
            config.seed,
            report.diagnostics,
            report.artifacts,
            report.failures,
        )
        report.artifacts.append(manifest)
    logger.info(
        f"Experiment {report.experiment_id} finished with {len(report.failures)} "
        "failures"
    )
    return report


def _output(config: ExperimentConfig, name: str) -> Path:
    return config.output_dir / name


def _compare_stationary_and_vsk(
    config: ExperimentConfig,
    target: TargetFunction,
    scaling: ScalingMap,
    grid: np.ndarray,
    report: ExperimentReport,
    dump_sizes: Tuple[int, ...] = (),
) -> pd.DataFrame:
    """
    Sweep over N, fitting a stationary and a VSK model per entry.

    Every size in ``dump_sizes`` is run even when the sweep skips it.
    """
    base = _base_kernel(config)
    rows = []
    for n in sorted(set(config.sweep) | set(dump_sizes)):
        data = _training_set(config, target, n)
        row: Dict[str, Any] = {"N": n}
        for label, suffix, kernel in (
            ("standard", "_std", base), ("vsk", "_vsk", VskKernel(base, scaling))
        ):
            key = f"{label}@{n}"
            try:
                gp, fit_result = _condition(config, _template(config, kernel), data)
                metrics = compute_metrics(gp, target, grid, config.include_noise)
                report.record(key, gp, metrics, fit_result)
                if config.output_dir is not None and n in dump_sizes:
                    dump_path = _output(config, f"covariance_{label}_N{n}.csv")
                    report.artifacts.append(
                        dump_covariance(gp.model, data.X, dump_path)
                    )
            except NumericalError as exc:
                logger.warning(f"{report.experiment_id}: {key} failed: {exc}")
                report.failures.append(f"{key}: {exc}")
                metrics, fit_result = None, None
            row.update(_metric_columns("", suffix, metrics, fit_result))
        rows.append(row)
        logger.info(
            f"{report.experiment_id} N={n}: rmse standard={row['rmse_std']:.4g}, "
            f"vsk={row['rmse_vsk']:.4g}"
        )
    return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------


def run_jump_fixed(config: ExperimentConfig) -> ExperimentReport:
    """
    Jump target with fixed hyperparameters: stationary vs VSK with ψ = 1_{[x₀,1]}.

    Writes metrics, predictions with intervals, both training covariances and
    seeded prior/posterior sample paths.
    """
    if config.fit:
        raise ConfigurationError(
            "Experiment 'jump_fixed' uses fixed hyperparameters; --fit is not allowed"
        )
    report = ExperimentReport(config.experiment_id, config)
    target = target_by_name(config.target)
    scaling = parse_scaling_spec(config.psi, target)
    grid = evaluation_grid(config.domain, config.eval_points)
    data = _training_set(config, target, config.sweep[0])

    base = _base_kernel(config)
    models = {
        "standard": _template(config, base),
        "vsk": _template(config, VskKernel(base, scaling)),
    }
    batches = {}
    for index, (label, model) in enumerate(models.items()):
        gp = train(model, data)
        report.record(
            label, gp, compute_metrics(gp, target, grid, config.include_noise), None
        )
        batches[label] = predict(gp, grid, config.alpha, config.include_noise)
        if config.output_dir is not None:
            covariance_path = _output(config, f"covariance_{label}.csv")
            report.artifacts.append(dump_covariance(model, data.X, covariance_path))
            prior = sample_paths(
                model, grid, config.paths, derive_seed(config.seed, index, 0)
            )
            posterior = sample_paths(
                model,
                grid,
                config.paths,
                derive_seed(config.seed, index, 1),
                condition_on=data,
            )
            report.artifacts.append(
                write_paths(_output(config, f"paths_prior_{label}.csv"), grid, prior)
            )
            posterior_path = _output(config, f"paths_posterior_{label}.csv")
            report.artifacts.append(write_paths(posterior_path, grid, posterior))

    if config.output_dir is not None:
        report.artifacts.append(
            write_frame(report.metrics_frame(), _output(config, "metrics.csv"))
        )
        predictions_path = _output(config, "predictions.csv")
        report.artifacts.append(
            write_predictions(predictions_path, grid, target(grid), batches)
        )
    return _finish(report)


def run_jump_mle(config: ExperimentConfig) -> ExperimentReport:
    """Jump target on Halton nodes with noise; MLE-fitted stationary vs VSK per N."""
    report = ExperimentReport(config.experiment_id, config)
    target = target_by_name(config.target)
    scaling = parse_scaling_spec(config.psi, target)
    grid = evaluation_grid(config.domain, config.eval_points)
    report.sweep = _compare_stationary_and_vsk(config, target, scaling, grid, report)
    if config.output_dir is not None:
        report.artifacts.append(
            write_frame(report.sweep, _output(config, "convergence.csv"))
        )
        report.artifacts.append(write_json(_output(config, "hyperparameters.json"),
                                           {
                                               key: result.as_dict() for key,
                                               result in report.fits.items()
                                           }))
    return _finish(report)


def run_weierstrass(config: ExperimentConfig) -> ExperimentReport:
    """
    Truncated Weierstrass target on a tensor grid; VSK sweep over the truncation level.

    Level 0 is the stationary baseline (ψ ≡ 0). A plain stationary fit is run
    alongside it and the two are compared for exact equality.
    """
    report = ExperimentReport(config.experiment_id, config)
    target = target_by_name(config.target)
    parsed = parse_scaling_spec(config.psi, target)
    a, b = 0.5, 3.0
    if isinstance(parsed, WeierstrassPartial):
        a, b = parsed.a, parsed.b
    grid = evaluation_grid(config.domain, config.eval_points)
    data = _training_set(config, target, config.n)
    base = _base_kernel(config)

    rows = []
    for level in config.sweep:
        key = f"vsk@{level}"
        try:
            kernel = VskKernel(base, weierstrass_scaling(a, b, level))
            gp, fit_result = _condition(config, _template(config, kernel), data)
            metrics = compute_metrics(gp, target, grid, config.include_noise)
            report.record(key, gp, metrics, fit_result)
        except NumericalError as exc:
            logger.warning(f"weierstrass: {key} failed: {exc}")
            report.failures.append(f"{key}: {exc}")
            metrics, fit_result = None, None
        row: Dict[str, Any] = {"K_vsk": level}
        row.update(_metric_columns("", "", metrics, fit_result))
        rows.append(row)

    report.sweep = pd.DataFrame(rows).rename(
        columns={"avgstd": "avg_std", "maxstd": "max_std"}
    )
    rmse = report.sweep["rmse"].to_numpy()
    finite_rmse = rmse[np.isfinite(rmse)]
    report.diagnostics["rmse_monotone"] = bool(np.all(np.diff(finite_rmse) <= 0))

    if 0 in config.sweep and "vsk@0" in report.metrics:
        gp, fit_result = _condition(config, _template(config, base), data)
        baseline = compute_metrics(gp, target, grid, config.include_noise)
        report.record("standard", gp, baseline, fit_result)
        report.diagnostics["baseline_identical"] = baseline == report.metrics["vsk@0"]

    if config.output_dir is not None:
        report.artifacts.append(
            write_frame(report.sweep, _output(config, "convergence.csv"))
        )
    return _finish(report)


def run_corner(config: ExperimentConfig) -> ExperimentReport:
    """Corner target on equispaced nodes; fitted stationary vs corner-bump VSK."""
    report = ExperimentReport(config.experiment_id, config)
    target = target_by_name(config.target)
    scaling = parse_scaling_spec(config.psi, target)
    grid = evaluation_grid(config.domain, config.eval_points)
    report.sweep = _compare_stationary_and_vsk(
        config, target, scaling, grid, report, dump_sizes=tuple(CORNER_SWEEP_SPOTLIGHT)
    )
    if config.output_dir is not None:
        report.artifacts.append(
            write_frame(report.sweep, _output(config, "convergence.csv"))
        )
    return _finish(report)


def run_gibbs_compare(config: ExperimentConfig) -> ExperimentReport:
    """
    Stationary, VSK and Gibbs reconstructions of the same noisy data.

    The Gibbs kernel reuses the fitted VSK hyperparameters with the local
    length scale ℓ(x) = ℓ̂ / √(1 + ψ′(x)²).
    """
    report = ExperimentReport(config.experiment_id, config)
    target = target_by_name(config.target)
    scaling = parse_scaling_spec(config.psi, target)
    grid = evaluation_grid(config.domain, config.eval_points)
    data = _training_set(config, target, config.sweep[0])
    base = _base_kernel(config)
    profile = base.profile

    standard_gp, standard_fit = _condition(config, _template(config, base), data)
    vsk_gp, vsk_fit = _condition(
        config, _template(config, VskKernel(base, scaling)), data
    )
    vsk_model = vsk_gp.model
    ell = vsk_model.kernel.lengthscale
    gibbs_model = CovarianceModel(
        GibbsKernel.from_scaling(profile, ell, scaling),
        vsk_model.sigma_f,
        vsk_model.sigma_n,
    )
    gibbs_gp = train(gibbs_model, data)

    batches = {}
    fitted = (
        ("standard", standard_gp, standard_fit),
        ("vsk", vsk_gp, vsk_fit),
        ("gibbs", gibbs_gp, None),
    )
    for label, gp, fit_result in fitted:
        report.record(
            label,
            gp,
            compute_metrics(gp, target, grid, config.include_noise),
            fit_result,
        )
        batches[label] = predict(gp, grid, config.alpha, config.include_noise)

    center = data.X[data.size // 2]
    paciorek = PaciorekKernel.from_scaling(profile, ell, scaling)
    profiles = {
        "stationary": basis_function_profile(vsk_model.kernel.base, center, grid),
        "vsk": basis_function_profile(vsk_model.kernel, center, grid),
        "gibbs": basis_function_profile(gibbs_model.kernel, center, grid),
        "paciorek": basis_function_profile(paciorek, center, grid),
    }
    report.diagnostics["basis_center"] = float(center[0])
    discrepancy = np.max(np.abs(profiles["vsk"] - profiles["gibbs"]))
    report.diagnostics["basis_max_discrepancy"] = float(discrepancy)

    if config.output_dir is not None:
        report.artifacts.append(
            write_frame(report.metrics_frame(), _output(config, "metrics.csv"))
        )
        predictions_path = _output(config, "predictions.csv")
        report.artifacts.append(
            write_predictions(predictions_path, grid, target(grid), batches)
        )
        report.artifacts.append(
            write_profiles(_output(config, "basis_profiles.csv"), grid, profiles)
        )
    return _finish(report)


RUNNERS: Dict[str, Callable[[ExperimentConfig], ExperimentReport]] = {
    "jump_fixed": run_jump_fixed,
    "jump_mle": run_jump_mle,
    "weierstrass": run_weierstrass,
    "corner": run_corner,
    "gibbs_compare": run_gibbs_compare,
}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Dispatch to the runner of ``config.experiment_id``."""
    logger.info(
        f"Running experiment {config.experiment_id} (seed {config.seed}, sweep "
        f"{list(config.sweep)})"
    )
    return RUNNERS[config.experiment_id](config)
