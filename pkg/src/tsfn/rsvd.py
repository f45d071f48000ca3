"""Column-sampling approximate SVD and empirical checks of its error bounds.

``linear_time_svd`` samples ``c`` columns with probabilities at least
``β|A^i|²/‖A‖_F²``, rescales them and returns the top-``k`` left singular
vectors ``H_k`` of the sample. The bounds compared here are

* Frobenius: ``‖A − H_kH_kᵀA‖_F² ≤ ‖A − A_k‖_F² + ε‖A‖_F²``
  for ``c ≥ 4k/(βε²)`` (in expectation) or ``c ≥ 4kη²/(βε²)`` (w.p. ``1−δ``);
* spectral: ``‖A − H_kH_kᵀA‖_2² ≤ ‖A − A_k‖_2² + ε‖A‖_F²``
  for ``c ≥ 4/(βε²)`` (in expectation) or ``c ≥ 4η²/(βε²)`` (w.p. ``1−δ``);

with ``η = 1 + sqrt((8/β) log(1/δ))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .linalg import svd
from .rng import make_rng, spawn_seeds

VARIANTS = ("fro_expectation", "fro_high_prob", "spec_expectation", "spec_high_prob")


@dataclass(frozen=True)
class RsvdConfig:
    """``c`` may exceed the column count: columns are drawn with replacement."""

    c: int
    k: int
    beta: float = 1.0
    delta: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.c < self.k:
            raise ConfigError(f"c={self.c} is smaller than k={self.k}")
        if not 0 < self.beta <= 1:
            raise ConfigError(f"beta must be in (0, 1], got {self.beta}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must be in (0, 1), got {self.delta}")

    @property
    def eta(self) -> float:
        return eta_for(self.beta, self.delta)


def eta_for(beta: float, delta: float) -> float:
    return 1.0 + math.sqrt((8.0 / beta) * math.log(1.0 / delta))


def required_columns(variant: str, k: int, eps: float, beta: float = 1.0,
                     delta: float = 0.1) -> int:
    """Smallest ``c`` for which the named bound is guaranteed."""
    eta2 = eta_for(beta, delta) ** 2
    base = {
        "fro_expectation": 4.0 * k,
        "fro_high_prob": 4.0 * k * eta2,
        "spec_expectation": 4.0,
        "spec_high_prob": 4.0 * eta2,
    }
    if variant not in base:
        raise ConfigError(f"unknown bound variant {variant!r}")
    return int(math.ceil(base[variant] / (beta * eps * eps) - 1e-9))


def column_probabilities(a: np.ndarray, beta: float = 1.0) -> np.ndarray:
    """Norm-squared column probabilities mixed with uniform: ``β·p_norm + (1−β)/n``."""
    sq = np.sum(a * a, axis=0)
    total = float(sq.sum())
    if total == 0.0:
        raise InputError("A is zero; the column sampling distribution is undefined")
    n = a.shape[1]
    return beta * sq / total + (1.0 - beta) / n


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise InputError(f"expected a non-empty 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return a


def linear_time_svd(a, config: RsvdConfig, seed=None) -> np.ndarray:
    """Orthonormal ``m×k`` basis ``H_k`` from ``c`` sampled, rescaled columns."""
    a = _as_matrix(a)
    if config.k > a.shape[0]:
        raise ConfigError(f"k={config.k} exceeds the row count {a.shape[0]}")
    p = column_probabilities(a, config.beta)
    rng = make_rng(config.seed if seed is None else seed)
    idx = rng.choice(a.shape[1], size=config.c, replace=True, p=p)
    sample = a[:, idx] / np.sqrt(config.c * p[idx])
    u, _, _ = np.linalg.svd(sample, full_matrices=False)
    return u[:, : config.k]


@dataclass(frozen=True)
class BoundsReport:
    """Per-trial errors and per-variant verdicts.

    ``fro_err_sq``/``spec_err_sq`` are the squared residual norms of the
    projection, ``opt_*`` the Eckart–Young optima, ``slack`` is
    ``ε‖A‖_F²``. ``applicable[v]`` says whether ``c`` meets the column
    requirement of variant ``v``.
    """

    c: int
    k: int
    eps: float
    delta: float
    beta: float
    fro_err_sq: np.ndarray
    spec_err_sq: np.ndarray
    opt_fro_sq: float
    opt_spec_sq: float
    slack: float
    applicable: dict

    @property
    def trials(self) -> int:
        return self.fro_err_sq.shape[0]

    @property
    def fro_rhs(self) -> float:
        return self.opt_fro_sq + self.slack

    @property
    def spec_rhs(self) -> float:
        return self.opt_spec_sq + self.slack

    def pass_rate(self, variant: str) -> float:
        """Fraction of trials meeting the bound (the high-probability reading)."""
        err, rhs = (self.fro_err_sq, self.fro_rhs) if variant.startswith("fro") \
            else (self.spec_err_sq, self.spec_rhs)
        return float(np.mean(err <= rhs))

    def mean_holds(self, variant: str, n_se: float = 2.0) -> bool:
        """Sample mean within ``n_se`` standard errors of the bound."""
        err, rhs = (self.fro_err_sq, self.fro_rhs) if variant.startswith("fro") \
            else (self.spec_err_sq, self.spec_rhs)
        se = float(np.std(err, ddof=1) / math.sqrt(err.shape[0]))
        return bool(np.mean(err) <= rhs + n_se * se)

    def holds(self, variant: str) -> bool:
        if variant.endswith("high_prob"):
            return self.pass_rate(variant) >= 1.0 - self.delta
        return self.mean_holds(variant)

    def rows(self):
        """Per-trial rows for the Frobenius bound."""
        rhs = self.fro_rhs
        for i, e in enumerate(self.fro_err_sq):
            yield {"trial": i, "fro_err_sq": float(e), "opt_err_sq": self.opt_fro_sq,
                   "bound_rhs": rhs, "pass": bool(e <= rhs)}

    def summary_rows(self):
        for v in VARIANTS:
            err = self.fro_err_sq if v.startswith("fro") else self.spec_err_sq
            yield {"variant": v,
                   "c_required": required_columns(v, self.k, self.eps, self.beta, self.delta),
                   "c_used": self.c, "applicable": self.applicable[v],
                   "pass_rate": self.pass_rate(v), "mean_err_sq": float(np.mean(err)),
                   "bound_rhs": self.fro_rhs if v.startswith("fro") else self.spec_rhs,
                   "holds": self.holds(v)}


def verify_bounds(a, config: RsvdConfig, trials: int, eps: float) -> BoundsReport:
    """Run ``trials`` independent samplings and compare against exact optima."""
    if trials < 30:
        raise ConfigError(f"trials must be >= 30, got {trials}")
    if not eps > 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    a = _as_matrix(a)
    dec = svd(a)
    s2 = dec.s ** 2
    fro2 = float(s2.sum())
    k = config.k
    opt_fro = float(s2[k:].sum())
    opt_spec = float(s2[k]) if k < s2.shape[0] else 0.0
    fro_err = np.empty(trials)
    spec_err = np.empty(trials)
    for i, seed in enumerate(spawn_seeds(config.seed, trials)):
        hk = linear_time_svd(a, config, seed=seed)
        resid = a - hk @ (hk.T @ a)
        fro_err[i] = float(np.sum(resid * resid))
        spec_err[i] = float(np.linalg.norm(resid, 2) ** 2)
    applicable = {v: config.c >= required_columns(v, k, eps, config.beta, config.delta)
                  for v in VARIANTS}
    return BoundsReport(config.c, k, float(eps), config.delta, config.beta, fro_err, spec_err,
                        opt_fro, opt_spec, eps * fro2, applicable)
