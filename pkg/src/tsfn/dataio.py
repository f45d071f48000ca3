"""CSV ingestion, PCA variance-explained analysis and the Hessian outlier report."""

from __future__ import annotations

import csv
import math
import os
import tempfile
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParseError

N90_LEVEL = 0.90


@dataclass(frozen=True)
class Dataset:
    """Rows are samples. ``targets`` is optional and has one row per sample."""

    features: np.ndarray
    targets: np.ndarray | None = None

    def __post_init__(self):
        x = np.array(self.features, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] < 1:
            raise InputError(f"features must be a non-empty 2-d array, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InputError("features contain non-finite values")
        x.setflags(write=False)
        object.__setattr__(self, "features", x)
        if self.targets is not None:
            y = np.array(self.targets, dtype=float)
            if y.shape[0] != x.shape[0]:
                raise InputError(f"{y.shape[0]} targets for {x.shape[0]} samples")
            if not np.all(np.isfinite(y)):
                raise InputError("targets contain non-finite values")
            y.setflags(write=False)
            object.__setattr__(self, "targets", y)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def load_csv(path, has_header: bool = False, target_column=None, delimiter: str = ",") -> Dataset:
    """Read a numeric delimited file.

    Blank lines and lines starting with ``#`` are skipped. ``target_column``
    is a column index or, with a header, a column name; that column becomes
    ``targets`` and the rest are features. Numbers are parsed with
    ``float`` so the format is locale-independent.
    """
    rows, header, width = [], None, None
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if not raw or not "".join(raw).strip() or raw[0].lstrip().startswith("#"):
                continue
            if has_header and header is None:
                header = [c.strip() for c in raw]
                width = len(header)
                continue
            if width is None:
                width = len(raw)
            elif len(raw) != width:
                raise ParseError(f"expected {width} fields, found {len(raw)}", lineno)
            try:
                values = [float(c) for c in raw]
            except ValueError:
                bad = next(c for c in raw if not _is_float(c))
                raise ParseError(f"non-numeric cell {bad!r}", lineno) from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError("non-finite value", lineno)
            rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data rows")
    data = np.array(rows)
    if target_column is None:
        return Dataset(data)
    col = _resolve_column(target_column, header, data.shape[1])
    return Dataset(np.delete(data, col, axis=1), data[:, col])


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _resolve_column(target_column, header, width: int) -> int:
    if isinstance(target_column, str) and not target_column.lstrip("-").isdigit():
        if header is None or target_column not in header:
            raise InputError(f"no column named {target_column!r}")
        return header.index(target_column)
    col = int(target_column)
    if not -width <= col < width:
        raise InputError(f"target column {col} out of range for {width} columns")
    return col % width


def save_csv(ds: Dataset, path, header: bool = True, comment: str | None = None) -> None:
    """Write features (then the target column, if any) with round-trip precision."""
    data = ds.features
    names = [f"x{i}" for i in range(ds.dim)]
    if ds.targets is not None:
        data = np.column_stack([data, ds.targets.reshape(ds.n_samples, -1)])
        names += ["y"] if ds.targets.ndim == 1 else [f"y{i}" for i in range(ds.targets.shape[1])]
    lines = []
    if comment:
        lines.append(f"# {comment}")
    if header:
        lines.append(",".join(names))
    lines.extend(",".join(repr(float(v)) for v in row) for row in data)
    atomic_write_text(path, "\n".join(lines) + "\n")


def atomic_write_text(path, text: str) -> None:
    """Write to a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class VarianceExplained:
    eigenvalues: np.ndarray
    cumulative: np.ndarray
    n90: int


def variance_explained(ds: Dataset) -> VarianceExplained:
    """Sample-covariance spectrum, cumulative explained proportion and n90."""
    if ds.n_samples < 2:
        raise InputError("variance_explained needs at least 2 samples")
    x = ds.features - ds.features.mean(axis=0)
    cov = x.T @ x / (ds.n_samples - 1)
    ev = np.clip(np.linalg.eigvalsh(0.5 * (cov + cov.T))[::-1], 0.0, None)
    total = float(ev.sum())
    if total <= 0.0:
        warnings.warn("data has zero variance; n90 is 0", RuntimeWarning, stacklevel=2)
        return VarianceExplained(ev, np.zeros_like(ev), 0)
    cum = np.minimum(np.cumsum(ev) / total, 1.0)
    cum[-1] = 1.0
    # a small slack so an exactly-90% prefix is not lost to rounding
    n90 = int(np.searchsorted(cum, N90_LEVEL - 1e-12) + 1)
    return VarianceExplained(ev, cum, n90)


@dataclass(frozen=True)
class OutlierReport:
    n90: int
    n_outliers: int
    widths: tuple
    seed: int
    hessian_eigenvalues: np.ndarray
    final_loss: float

    @property
    def difference(self) -> int:
        return self.n_outliers - self.n90

    def row(self) -> dict:
        return {"n90": self.n90, "n_outliers": self.n_outliers,
                "widths": "-".join(str(w) for w in self.widths), "seed": self.seed}


def outlier_vs_pca_report(ds: Dataset, mlp_widths, seed=0, steps: int = 200,
                          lr: float = 0.025) -> OutlierReport:
    """Train the MLP with ``steps`` gradient-descent steps and count Hessian outliers.

    Outliers are eigenvalue magnitudes above the bulk edge of the MP law a
    Gram matrix of isotropic noise with the same mean eigenvalue and
    parameter-to-sample ratio would follow.
    """
    from .objectives import mlp_objective
    from .optimizer import OptimizerConfig, run
    from .rmt import partition_spectrum, wishart_null_model

    obj = mlp_objective(mlp_widths, ds, seed=seed)
    config = OptimizerConfig(method="gd", eta=lr, max_iter=steps, grad_tol=1e-12)
    traj = run(obj, config, obj.initial_point())
    if traj.status == "diverged":
        raise InputError("MLP training diverged; lower the learning rate")
    x = traj.iterates[-1]
    ev = np.linalg.eigvalsh(obj.hessian(x))
    mags = np.abs(ev)
    model = wishart_null_model(mags, ds.n_samples)
    part = partition_spectrum(mags, model)
    return OutlierReport(
        n90=variance_explained(ds).n90,
        n_outliers=part.n_outliers,
        widths=tuple(int(w) for w in mlp_widths),
        seed=int(seed) if isinstance(seed, (int, np.integer)) else 0,
        hessian_eigenvalues=ev[::-1],
        final_loss=traj.values[-1],
    )
