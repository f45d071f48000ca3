"""Wishart sampling, the Marchenko–Pastur law, and bulk/outlier separation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import InputError, NumericError
from .rng import make_rng

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class MPModel:
    """Marchenko–Pastur law for ``W = n⁻¹ A Aᵀ`` with aspect ratio ``c = m/n``."""

    c: float
    sigma2: float = 1.0

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise InputError(f"aspect ratio c must be positive, got {self.c}")
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise InputError(f"sigma2 must be positive, got {self.sigma2}")

    @property
    def edges(self) -> tuple[float, float]:
        r = math.sqrt(self.c)
        return self.sigma2 * (1 - r) ** 2, self.sigma2 * (1 + r) ** 2

    @property
    def c_minus(self) -> float:
        return self.edges[0]

    @property
    def c_plus(self) -> float:
        return self.edges[1]

    @property
    def point_mass_at_zero(self) -> float:
        return max(0.0, 1.0 - 1.0 / self.c)

    @property
    def continuous_mass(self) -> float:
        return 1.0 - self.point_mass_at_zero


@dataclass(frozen=True)
class SpectrumPartition:
    zeros: int
    bulk: np.ndarray
    outliers: np.ndarray
    below: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def n_outliers(self) -> int:
        return int(self.outliers.shape[0])

    @property
    def total(self) -> int:
        return self.zeros + self.bulk.shape[0] + self.outliers.shape[0] + self.below.shape[0]


def mp_density(lam, model: MPModel):
    """Continuous part of the MP density; zero outside the open support.

    The point mass at zero for ``c > 1`` is not included, see
    :attr:`MPModel.point_mass_at_zero`.
    """
    lam = np.asarray(lam, dtype=float)
    lo, hi = model.edges
    inside = (lam > lo) & (lam < hi)
    out = np.zeros_like(lam)
    x = lam[inside]
    out[inside] = np.sqrt((hi - x) * (x - lo)) / (2 * math.pi * model.sigma2 * model.c * x)
    return out if out.ndim else float(out)


# The substitution λ(θ) = mid - half·cos θ maps [0, π] onto the support and
# turns sqrt((c+ - λ)(λ - c-)) dλ into half² sin²θ dθ, which removes the
# square-root endpoint behaviour (and the 1/sqrt(λ) blow-up when c = 1).
def _theta_integrand(theta, model: MPModel):
    lo, hi = model.edges
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    lam = mid - half * np.cos(theta)
    s = np.sin(theta)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = half * half * s * s / (2 * math.pi * model.sigma2 * model.c * lam)
    if model.c == 1.0:
        # λ→0 at θ→0: sin²θ/λ → 2/half
        val = np.where(lam <= 0, 2.0 * half / (2 * math.pi * model.sigma2 * model.c), val)
    return val


def _theta_of(lam, model: MPModel):
    lo, hi = model.edges
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return np.arccos(np.clip((mid - lam) / half, -1.0, 1.0))


def mp_cdf(lam, model: MPModel, epsabs: float = 1e-10):
    """CDF of the MP law, point mass included.

    Scalars use adaptive quadrature (``scipy.integrate.quad``). Arrays are
    sorted and integrated segment by segment with 24-point Gauss–Legendre
    in the smooth θ variable, which keeps KS computations over 10⁵ samples
    cheap.
    """
    arr = np.asarray(lam, dtype=float)
    if arr.ndim == 0:
        return _mp_cdf_scalar(float(arr), model, epsabs)
    return _mp_cdf_array(arr, model)


def _mp_cdf_scalar(x: float, model: MPModel, epsabs: float) -> float:
    lo, hi = model.edges
    if x < 0:
        return 0.0
    if x <= lo:
        return model.point_mass_at_zero
    if x >= hi:
        return 1.0
    val, err = integrate.quad(_theta_integrand, 0.0, float(_theta_of(x, model)),
                              args=(model,), epsabs=epsabs, epsrel=0.0, limit=200)
    if not err <= max(epsabs, 1e-8):
        raise NumericError(f"MP CDF quadrature did not converge at λ={x} (err {err:.2e})")
    return min(1.0, model.point_mass_at_zero + val)


def _mp_cdf_array(arr: np.ndarray, model: MPModel) -> np.ndarray:
    flat = arr.ravel()
    order = np.argsort(flat, kind="stable")
    thetas = _theta_of(flat[order], model)
    lo_t = np.concatenate(([0.0], thetas[:-1]))
    mid = 0.5 * (thetas + lo_t)
    half = 0.5 * (thetas - lo_t)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    seg = half * (_theta_integrand(nodes, model) @ _GL_WEIGHTS)
    cum = np.cumsum(seg)
    lo, hi = model.edges
    x = flat[order]
    out = np.where(x < 0, 0.0,
                   np.where(x >= hi, 1.0, np.minimum(1.0, model.point_mass_at_zero + cum)))
    out = np.where((x >= 0) & (x <= lo), model.point_mass_at_zero, out)
    result = np.empty_like(flat)
    result[order] = out
    return result.reshape(arr.shape)


def sample_wishart(m: int, n: int, sigma: float = 1.0, seed=0) -> np.ndarray:
    """``W = n⁻¹ A Aᵀ`` with ``A`` (m×n) i.i.d. ``Normal(0, σ²)``."""
    if m < 1 or n < 1:
        raise InputError(f"m and n must be >= 1, got m={m}, n={n}")
    rng = make_rng(seed)
    a = sigma * rng.standard_normal((m, n))
    w = a @ a.T / n
    return 0.5 * (w + w.T)


def sample_spiked_wishart(m: int, n: int, rank: int, strength: float, seed=0) -> np.ndarray:
    """Sample covariance of ``n`` draws with population ``I + strength·Σ w_j w_jᵀ``."""
    rng = make_rng(seed)
    basis, _ = np.linalg.qr(rng.standard_normal((m, max(rank, 1))))
    z = rng.standard_normal((m, n))
    if rank:
        z += math.sqrt(strength) * basis[:, :rank] @ rng.standard_normal((rank, n))
    w = z @ z.T / n
    return 0.5 * (w + w.T)


def wishart_spectra(m: int, n: int, samples: int, sigma: float = 1.0, seed=0) -> np.ndarray:
    """Pooled eigenvalues of ``samples`` independent Wishart draws from one stream."""
    rng = make_rng(seed)
    out = np.empty((samples, m))
    for s in range(samples):
        out[s] = np.linalg.eigvalsh(sample_wishart(m, n, sigma, rng))
    return out.ravel()


def ks_distance(eigs, model: MPModel) -> float:
    """Kolmogorov–Smirnov distance between an empirical spectrum and the MP CDF."""
    x = np.sort(np.asarray(eigs, dtype=float))
    if x.size == 0:
        return 0.0
    f = mp_cdf(x, model)
    n = x.size
    # empirical CDF jumps at ties; evaluate both sides of each distinct value
    _, first = np.unique(x, return_index=True)
    last = np.append(first[1:], n)
    upper = last / n
    lower = first / n
    fd = f[first]
    return float(max(np.max(np.abs(upper - fd)), np.max(np.abs(fd - lower))))


def default_edge_pad(model: MPModel, m: int) -> float:
    """Tracy–Widom-scale margin ``2·m^{-2/3}·c_+`` above the bulk edge."""
    return 2.0 * m ** (-2.0 / 3.0) * model.c_plus


def partition_spectrum(eigs, model: MPModel, zero_tol=None, edge_pad=None) -> SpectrumPartition:
    """Split eigenvalues into zero modes, MP bulk, outliers and the rest."""
    x = np.asarray(eigs, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise InputError("eigenvalues must be finite")
    if x.size == 0:
        return SpectrumPartition(0, np.empty(0), np.empty(0))
    if zero_tol is None:
        zero_tol = 1e-10 * float(np.max(np.abs(x)))
    if edge_pad is None:
        edge_pad = default_edge_pad(model, x.size)
    lo, hi = model.edges
    zero = np.abs(x) < zero_tol
    nz = x[~zero]
    outlier = nz > hi + edge_pad
    bulk = (nz >= lo - edge_pad) & ~outlier
    return SpectrumPartition(
        zeros=int(np.sum(zero)),
        bulk=np.sort(nz[bulk]),
        outliers=np.sort(nz[outlier])[::-1],
        below=np.sort(nz[~bulk & ~outlier]),
    )


def wishart_null_model(eigs, n_samples: int) -> MPModel:
    """MP law a Gram matrix of ``n_samples`` isotropic vectors would follow.

    ``σ²`` is the mean eigenvalue magnitude (the MP mean) and ``c`` the
    dimension-to-sample ratio.
    """
    a = np.abs(np.asarray(eigs, dtype=float))
    mean = float(a.mean())
    if mean <= 0:
        raise InputError("spectrum is identically zero")
    return MPModel(c=a.size / n_samples, sigma2=mean)


def density_curve(model: MPModel, points: int = 400):
    """``(λ, ρ(λ))`` sampled across the support, for plotting."""
    lo, hi = model.edges
    lam = np.linspace(lo, hi, points + 2)[1:-1]
    return lam, mp_density(lam, model)
