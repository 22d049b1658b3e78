"""
Flat-file artifacts of experiment runs: CSV tables written through pandas and
a JSON manifest per run.

All CSV files are UTF-8 with LF line endings and 17 significant digits, so
identical inputs give byte-identical files.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from . import __version__
from .config.settings import CSV_FLOAT_FORMAT, CSV_LINE_TERMINATOR, MANIFEST_FILE
from .designs import as_points
from .gp import CovarianceModel, PredictionBatch

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def ensure_directory(path: PathLike) -> Path:
    """Create ``path`` (and parents) if needed."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    """Write a DataFrame as CSV with the project float format."""
    path = Path(path)
    ensure_directory(path.parent)
    frame.to_csv(
        path,
        index=False,
        float_format=CSV_FLOAT_FORMAT,
        lineterminator=CSV_LINE_TERMINATOR,
        encoding="utf-8",
    )
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_frame(path: PathLike) -> pd.DataFrame:
    """Read a CSV written by ``write_frame`` without losing float precision."""
    return pd.read_csv(path, float_precision="round_trip")


def _point_columns(points: np.ndarray) -> Dict[str, np.ndarray]:
    points = as_points(points)
    if points.shape[1] == 1:
        return {"x": points[:, 0]}
    return {f"x{axis + 1}": points[:, axis] for axis in range(points.shape[1])}


def dump_covariance(model: CovarianceModel, X, path: PathLike) -> Path:
    """
    Write the training covariance σ_f² K + σ_n² I as a row-major CSV.

    Columns are named ``c0 … c{N-1}``; row i holds entries (i, 0 … N-1).
    """
    matrix = model.training_covariance(X)
    frame = pd.DataFrame(matrix, columns=[f"c{j}" for j in range(matrix.shape[1])])
    return write_frame(frame, path)


def load_covariance(path: PathLike) -> np.ndarray:
    return read_frame(path).to_numpy(dtype=float)


def write_predictions(
    path: PathLike, points, truth, batches: Mapping[str, PredictionBatch]
) -> Path:
    """Mean and confidence bounds per model, one row per evaluation point."""
    columns: Dict[str, Any] = _point_columns(points)
    columns["truth"] = np.asarray(truth, dtype=float)
    for label, batch in batches.items():
        columns[f"mean_{label}"] = batch.mean
        columns[f"std_{label}"] = batch.std
        columns[f"lower_{label}"] = batch.lower
        columns[f"upper_{label}"] = batch.upper
    return write_frame(pd.DataFrame(columns), path)


def write_paths(path: PathLike, points, paths: np.ndarray) -> Path:
    """Sample paths as columns ``path_1 … path_k``."""
    columns: Dict[str, Any] = _point_columns(points)
    for index, row in enumerate(np.atleast_2d(paths), start=1):
        columns[f"path_{index}"] = row
    return write_frame(pd.DataFrame(columns), path)


def write_profiles(path: PathLike, points, profiles: Mapping[str, np.ndarray]) -> Path:
    columns: Dict[str, Any] = _point_columns(points)
    for label, values in profiles.items():
        columns[label] = np.asarray(values, dtype=float)
    return write_frame(pd.DataFrame(columns), path)


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return value.as_posix()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_json(path: PathLike, data: Mapping[str, Any]) -> Path:
    path = Path(path)
    ensure_directory(path.parent)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(_to_jsonable(data), handle, indent=2, sort_keys=True)
        handle.write("\n")
    logger.info(f"Wrote {path}")
    return path


def write_manifest(
    output_dir: PathLike,
    experiment_id: str,
    config: Mapping[str, Any],
    seed: int,
    diagnostics: Mapping[str, Any],
    artifacts: Iterable[PathLike],
    failures: Optional[Sequence[str]] = None,
) -> Path:
    """
    Record what a run did: config, seed, library version, jitter diagnostics
    and the artifacts written.

    Artifact paths are stored relative to ``output_dir``.
    """
    output_dir = Path(output_dir)
    manifest = {
        "experiment": experiment_id,
        "version": __version__,
        "seed": seed,
        "config": config,
        "diagnostics": diagnostics,
        "artifacts": sorted(
            Path(p).relative_to(output_dir).as_posix() for p in artifacts
        ),
        "failures": list(failures or []),
    }
    return write_json(output_dir / MANIFEST_FILE, manifest)
