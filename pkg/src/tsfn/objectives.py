"""Test objectives with exact gradients and Hessians.

These are the classical stand-ins for the value/gradient/Hessian oracles:
chained Rosenbrock, Morse-form quadratics around a critical point, and a
small tanh MLP under mean-squared error.
"""

from __future__ import annotations

import math

import numpy as np

from .dataio import Dataset
from .errors import ConfigError, InputError
from .rng import make_rng

MLP_MAX_PARAMS = 4096


class Objective:
    """Value, gradient and Hessian of a smooth function on ``R^dim``."""

    dim: int
    name = "objective"

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x) -> np.ndarray:
        raise NotImplementedError

    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise InputError(f"{self.name}: expected a point of shape ({self.dim},), got {x.shape}")
        return x


class Rosenbrock(Objective):
    name = "rosenbrock"

    def __init__(self, n: int):
        if n < 2:
            raise InputError(f"rosenbrock needs n >= 2, got {n}")
        self.dim = n

    def value(self, x):
        x = self._point(x)
        return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))

    def gradient(self, x):
        x = self._point(x)
        d = x[1:] - x[:-1] ** 2
        g = np.zeros_like(x)
        g[:-1] = -400.0 * x[:-1] * d - 2.0 * (1.0 - x[:-1])
        g[1:] += 200.0 * d
        return g

    def hessian(self, x):
        x = self._point(x)
        n = self.dim
        diag = np.zeros(n)
        diag[:-1] = 1200.0 * x[:-1] ** 2 - 400.0 * x[1:] + 2.0
        diag[1:] += 200.0
        off = -400.0 * x[:-1]
        h = np.diag(diag)
        idx = np.arange(n - 1)
        h[idx, idx + 1] = off
        h[idx + 1, idx] = off
        return h


class MorseQuadratic(Objective):
    """``f(x* + Δx) = f* + ½ Σ λ_i v_i²`` with ``v = basisᵀ Δx``."""

    name = "morse"

    def __init__(self, lambdas, basis=None, x_star=None, f_star: float = 0.0):
        self.lambdas = np.asarray(lambdas, dtype=float).ravel()
        n = self.lambdas.shape[0]
        self.dim = n
        self.basis = np.eye(n) if basis is None else np.asarray(basis, dtype=float)
        if self.basis.shape != (n, n):
            raise InputError(f"basis must be {n}x{n}, got {self.basis.shape}")
        if np.max(np.abs(self.basis.T @ self.basis - np.eye(n))) > 1e-10:
            raise InputError("basis is not orthogonal")
        self.x_star = np.zeros(n) if x_star is None else np.asarray(x_star, dtype=float)
        self.f_star = float(f_star)
        self._h = (self.basis * self.lambdas) @ self.basis.T
        self._h = 0.5 * (self._h + self._h.T)

    def coordinates(self, x) -> np.ndarray:
        return self.basis.T @ (self._point(x) - self.x_star)

    def value(self, x):
        v = self.coordinates(x)
        return self.f_star + 0.5 * float(np.sum(self.lambdas * v * v))

    def gradient(self, x):
        return self.basis @ (self.lambdas * self.coordinates(x))

    def hessian(self, x):
        self._point(x)
        return self._h.copy()


class MlpObjective(Objective):
    """Mean-squared-error loss of a tanh MLP, as a function of its parameters.

    ``widths`` lists the hidden and output layer sizes; the input width is
    the dataset dimension. Parameters are packed layer by layer as the
    row-major weight matrix (out × in) followed by the bias. The output
    layer is linear.
    """

    name = "mlp"

    def __init__(self, widths, dataset: Dataset, seed=0):
        widths = [int(w) for w in widths]
        if not widths or min(widths) < 1:
            raise ConfigError(f"invalid layer widths {widths}")
        if dataset.targets is None:
            raise InputError("MLP objective needs a dataset with targets")
        if dataset.n_samples < 1:
            raise InputError("dataset is empty")
        self.x = dataset.features
        y = np.asarray(dataset.targets, dtype=float)
        self.y = y.reshape(y.shape[0], -1)
        if self.y.shape != (dataset.n_samples, widths[-1]):
            raise InputError(
                f"targets have shape {self.y.shape}, output layer expects {widths[-1]} columns")
        self.layers = [dataset.dim] + widths
        self.shapes = list(zip(self.layers[1:], self.layers[:-1]))
        self.dim = sum(o * i + o for o, i in self.shapes)
        if self.dim > MLP_MAX_PARAMS:
            raise ConfigError(
                f"MLP has {self.dim} parameters; the cap is {MLP_MAX_PARAMS}")
        self.seed = seed

    def initial_point(self, seed=None) -> np.ndarray:
        """Normal(0, 1/fan_in) weights and zero biases."""
        rng = make_rng(self.seed if seed is None else seed)
        parts = []
        for out, inp in self.shapes:
            parts.append(rng.standard_normal(out * inp) / math.sqrt(inp))
            parts.append(np.zeros(out))
        return np.concatenate(parts)

    def _unpack(self, theta):
        params, pos = [], 0
        for out, inp in self.shapes:
            w = theta[pos:pos + out * inp].reshape(out, inp)
            pos += out * inp
            params.append((w, theta[pos:pos + out]))
            pos += out
        return params

    def _forward(self, theta):
        params = self._unpack(theta)
        acts = [self.x]
        h = self.x
        last = len(params) - 1
        for i, (w, b) in enumerate(params):
            z = h @ w.T + b
            h = z if i == last else np.tanh(z)
            acts.append(h)
        return params, acts

    def value(self, x):
        theta = self._point(x)
        _, acts = self._forward(theta)
        r = acts[-1] - self.y
        return float(np.sum(r * r) / self.y.shape[0])

    def _grad(self, theta):
        # written without conjugation so complex-step differentiation works
        params, acts = self._forward(theta)
        delta = 2.0 * (acts[-1] - self.y) / self.y.shape[0]
        grads = []
        for i in range(len(params) - 1, -1, -1):
            w, _ = params[i]
            grads.append((delta.T @ acts[i], delta.sum(axis=0)))
            if i > 0:
                delta = (delta @ w) * (1.0 - acts[i] * acts[i])
        grads.reverse()
        return np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in grads])

    def gradient(self, x):
        return self._grad(self._point(x))

    def hessian(self, x):
        """Complex-step derivative of the backprop gradient, then symmetrized.

        Each column costs one complex gradient evaluation and carries no
        subtractive cancellation, so entries are accurate to rounding.
        """
        theta = self._point(x)
        step = 1e-30
        h = np.empty((self.dim, self.dim))
        pert = theta.astype(complex)
        for i in range(self.dim):
            pert[i] += 1j * step
            h[:, i] = self._grad(pert).imag / step
            pert[i] = theta[i]
        return 0.5 * (h + h.T)


def rosenbrock(n: int) -> Rosenbrock:
    return Rosenbrock(n)


def morse_quadratic(lambdas, basis=None, x_star=None) -> MorseQuadratic:
    return MorseQuadratic(lambdas, basis, x_star)


def mlp_objective(widths, dataset: Dataset, seed=0) -> MlpObjective:
    return MlpObjective(widths, dataset, seed)


def synthetic_correlated_data(n_samples: int, dim: int, planted_rank: int,
                              spike_strength: float, seed=0,
                              with_targets: bool = True) -> Dataset:
    """Gaussian samples with covariance ``I + spike·Σ_{j<rank} w_j w_jᵀ``.

    The ``w_j`` are orthonormal and drawn from the seeded stream. Targets,
    when requested, come from a fixed random tanh teacher
    ``y = tanh(x·u / sqrt(dim))`` so that the MLP has something to fit.
    """
    if not 0 <= planted_rank <= dim:
        raise ConfigError(f"planted_rank must be in [0, {dim}], got {planted_rank}")
    if n_samples < 1 or dim < 1:
        raise ConfigError("n_samples and dim must be >= 1")
    rng = make_rng(seed)
    basis, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    x = rng.standard_normal((n_samples, dim))
    if planted_rank:
        w = basis[:, :planted_rank]
        x += math.sqrt(spike_strength) * rng.standard_normal((n_samples, planted_rank)) @ w.T
    targets = None
    if with_targets:
        teacher = rng.standard_normal(dim)
        targets = np.tanh(x @ teacher / math.sqrt(dim))
    return Dataset(x, targets)


def population_covariance(dim: int, planted_rank: int, spike_strength: float, seed=0) -> np.ndarray:
    """Exact covariance of :func:`synthetic_correlated_data` for the same seed."""
    rng = make_rng(seed)
    basis, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    w = basis[:, :planted_rank]
    return np.eye(dim) + spike_strength * w @ w.T
