"""Gradient descent, Newton, saddle-free Newton and truncated saddle-free Newton.

None of the second-order methods use a line search; ``step_scale`` in the
config is the only damping knob.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (ConfigError, DivergenceError, EmptySpectrumError,
                     SingularHessianError)
from .linalg import TruncatedSpectrum, abs_pinv_truncated, sym_eig, threshold_for_rank

METHODS = ("gd", "newton", "sfn", "tsfn")

#: newton/sfn refuse eigenvalues with |λ| below this fraction of max|λ|
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    method: str
    eta: float = 1e-3
    threshold: float | None = None
    k: int | None = None
    max_iter: int = 1000
    grad_tol: float = 1e-8
    step_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if not self.grad_tol > 0:
            raise ConfigError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.max_iter < 0:
            raise ConfigError(f"max_iter must be >= 0, got {self.max_iter}")
        if not self.step_scale > 0:
            raise ConfigError(f"step_scale must be positive, got {self.step_scale}")
        if self.method == "tsfn":
            if (self.threshold is None) == (self.k is None):
                raise ConfigError("tsfn needs exactly one of threshold or k")
            if self.threshold is not None and not self.threshold > 0:
                raise ConfigError(f"threshold must be positive, got {self.threshold}")
            if self.k is not None and self.k < 1:
                raise ConfigError(f"k must be >= 1, got {self.k}")


def _finite_gradient(obj, x):
    g = obj.gradient(x)
    if not np.all(np.isfinite(g)):
        raise DivergenceError("gradient is not finite")
    return g


def gd_step(obj, x, eta: float) -> np.ndarray:
    if not eta > 0:
        raise ConfigError(f"eta must be positive, got {eta}")
    x = np.asarray(x, dtype=float)
    return x - eta * _finite_gradient(obj, x)


def _checked_eig(obj, x):
    eig = sym_eig(obj.hessian(x))
    mags = np.abs(eig.values)
    if mags[-1] < SINGULAR_RTOL * mags[0] or mags[0] == 0.0:
        raise SingularHessianError(
            f"Hessian is singular at this point (min |λ| = {mags[-1]:.3e}, "
            f"max |λ| = {mags[0]:.3e}); use tsfn with a threshold")
    return eig


def newton_step(obj, x) -> np.ndarray:
    """``x - H⁻¹∇f``; saddles are attractors for this step."""
    x = np.asarray(x, dtype=float)
    g = _finite_gradient(obj, x)
    eig = _checked_eig(obj, x)
    v = eig.vectors
    return x - v @ ((v.T @ g) / eig.values)


def sfn_step(obj, x) -> np.ndarray:
    """``x - |H|⁻¹∇f`` with ``|H|`` the eigenvalue-magnitude matrix."""
    x = np.asarray(x, dtype=float)
    g = _finite_gradient(obj, x)
    eig = _checked_eig(obj, x)
    v = eig.vectors
    return x - v @ ((v.T @ g) / np.abs(eig.values))


def tsfn_direction(h, g, threshold=None, k=None):
    """``|H_k|⁻¹ g`` and the retained spectrum; exactly one of threshold/k."""
    if (threshold is None) == (k is None):
        raise ConfigError("give exactly one of threshold or k")
    if k is not None:
        threshold = threshold_for_rank(sym_eig(h), k)
        if threshold == 0.0:
            raise EmptySpectrumError(f"the {k}-th eigenvalue is zero")
    inv, spec = abs_pinv_truncated(h, threshold)
    return inv @ g, spec


def tsfn_step(obj, x, threshold=None, k=None) -> tuple[np.ndarray, TruncatedSpectrum]:
    """Truncated saddle-free Newton step; discarded directions get no step."""
    x = np.asarray(x, dtype=float)
    g = _finite_gradient(obj, x)
    d, spec = tsfn_direction(obj.hessian(x), g, threshold, k)
    return x - d, spec


@dataclass
class Trajectory:
    """One row per visited point. ``k_used``, ``kappa_eff`` and ``step_norm``
    describe the step taken from that point (NaN where not applicable)."""

    method: str
    iterates: list = field(default_factory=list)
    values: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    k_used: list = field(default_factory=list)
    kappa_eff: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    status: str = "running"
    message: str = ""

    @property
    def n_iter(self) -> int:
        return len(self.iterates) - 1

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def rows(self):
        for t in range(len(self.iterates)):
            yield {
                "iter": t,
                "f": self.values[t],
                "grad_norm": self.grad_norms[t],
                "k_used": self.k_used[t],
                "kappa_eff": self.kappa_eff[t],
                "step_norm": self.step_norms[t],
            }


def _step(obj, x, config: OptimizerConfig):
    if config.method == "gd":
        return gd_step(obj, x, config.eta), math.nan, math.nan
    if config.method == "newton":
        nxt = newton_step(obj, x)
    elif config.method == "sfn":
        nxt = sfn_step(obj, x)
    else:
        nxt, spec = tsfn_step(obj, x, config.threshold, config.k)
        return x + config.step_scale * (nxt - x), spec.k, spec.kappa_eff
    return x + config.step_scale * (nxt - x), math.nan, math.nan


def run(obj, config: OptimizerConfig, x0) -> Trajectory:
    """Iterate until ``‖∇f‖ <= grad_tol`` or ``max_iter`` steps.

    Non-finite values or gradients end the run with status ``"diverged"``;
    a singular Hessian (newton/sfn) or an empty truncation (tsfn) ends it
    with status ``"failed"``. Neither raises.
    """
    traj = Trajectory(method=config.method)
    x = np.array(x0, dtype=float)
    while True:
        # overflow is detected below and reported as divergence
        with np.errstate(over="ignore", invalid="ignore"):
            f = obj.value(x)
            g = obj.gradient(x)
            gn = float(np.linalg.norm(g))
        if not (math.isfinite(f) and math.isfinite(gn)):
            if not traj.iterates:
                raise DivergenceError("objective is not finite at the starting point")
            # the offending point is not recorded, so stored norms stay finite
            traj.status = "diverged"
            traj.message = f"objective or gradient became non-finite after step {traj.n_iter}"
            break
        traj.iterates.append(x.copy())
        traj.values.append(f)
        traj.grad_norms.append(gn)
        traj.k_used.append(math.nan)
        traj.kappa_eff.append(math.nan)
        traj.step_norms.append(math.nan)
        if gn <= config.grad_tol:
            traj.status = "converged"
            break
        if traj.n_iter >= config.max_iter:
            traj.status = "max_iter"
            break
        try:
            nxt, k_used, kappa = _step(obj, x, config)
        except DivergenceError as exc:
            traj.status, traj.message = "diverged", str(exc)
            break
        except (SingularHessianError, EmptySpectrumError) as exc:
            traj.status, traj.message = "failed", str(exc)
            break
        traj.k_used[-1] = k_used
        traj.kappa_eff[-1] = kappa
        traj.step_norms[-1] = float(np.linalg.norm(nxt - x))
        x = nxt
    return traj
