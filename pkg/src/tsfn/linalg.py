"""Dense real symmetric linear algebra.

Eigenpairs are always ordered by descending absolute eigenvalue, because
every consumer (truncation, saddle-free inversion, phase-register
filtering) selects on magnitude rather than signed value.

The native eigensolver is Householder tridiagonalization followed by
implicit QL with Wilkinson-style shifts. For large matrices ``sym_eig``
defaults to LAPACK (``numpy.linalg.eigh``); both paths return the same
:class:`EigenDecomposition` and are cross-checked in the test-suite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmptySpectrumError, InputError, NumericError, RankError

#: Sweep cap per eigenvalue in the QL iteration.
QL_MAX_SWEEPS = 64

#: Largest dimension for which ``method="auto"`` uses the native QL solver.
QL_AUTO_MAX_DIM = 64


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted by descending ``|λ|``; ``vectors[:, i]`` pairs with ``values[i]``."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


@dataclass(frozen=True)
class SvdDecomposition:
    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray
    rank: int

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.vt


@dataclass(frozen=True)
class TruncatedSpectrum:
    """Eigenpairs retained by a magnitude threshold.

    ``kappa_eff`` is ``max|λ| / threshold``: the condition number bound
    the truncation imposes on the inverted operator.
    """

    threshold: float
    values: np.ndarray
    vectors: np.ndarray
    kappa_eff: float

    @property
    def k(self) -> int:
        return self.values.shape[0]


def tolerance(a: np.ndarray) -> float:
    """Reconstruction/orthogonality tolerance ``1e-8 * N * max|entry|``."""
    a = np.asarray(a)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    return 1e-8 * max(a.shape[0], 1) * max(scale, 1.0)


def as_symmetric(h, *, atol: float = 0.0) -> np.ndarray:
    """Validate a square, finite, symmetric matrix and return it as float64.

    With the default ``atol=0`` the stored entries must be exactly
    mirrored; pass a positive ``atol`` to accept (and symmetrize) small
    asymmetries from numerical assembly.
    """
    a = np.array(h, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InputError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    asym = np.max(np.abs(a - a.T))
    if asym > atol:
        raise InputError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
    if atol > 0:
        a = 0.5 * (a + a.T)
    return a


def _as_finite_matrix(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim != 2:
        raise InputError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return a


def _tridiagonalize(a: np.ndarray):
    """Householder reduction ``Q^T A Q = T``; returns (diag, offdiag, Q)."""
    a = a.copy()
    n = a.shape[0]
    q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        xmax = float(np.max(np.abs(x)))
        if xmax == 0.0:
            continue
        # build the reflector from x scaled to unit size so tiny entries stay normal
        v = x / xmax
        unorm = math.sqrt(float(v @ v))
        sign = -1.0 if v[0] >= 0 else 1.0
        alpha = sign * unorm * xmax
        v[0] -= sign * unorm
        vv = float(v @ v)
        sub = a[k + 1:, k + 1:]
        p = (2.0 / vv) * (sub @ v)
        w = p - (float(v @ p) / vv) * v
        sub -= np.outer(v, w) + np.outer(w, v)
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = a[k, k + 1] = alpha
        qv = q[:, k + 1:] @ v
        q[:, k + 1:] -= (2.0 / vv) * np.outer(qv, v)
    d = np.diag(a).copy()
    e = np.zeros(n)
    e[:-1] = np.diag(a, -1)
    return d, e, q


def _tridiagonal_ql(d: np.ndarray, e: np.ndarray, z: np.ndarray) -> None:
    """Implicit QL on a symmetric tridiagonal matrix, in place.

    ``e[i]`` couples rows ``i`` and ``i+1``. Rotations are accumulated
    into the columns of ``z``.
    """
    n = d.shape[0]
    eps = np.finfo(float).eps
    # absolute floor so couplings beside a near-zero diagonal still deflate
    floor = eps * eps * max(float(np.max(np.abs(d))), float(np.max(np.abs(e), initial=0.0)))
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= max(eps * dd, floor):
                    break
                m += 1
            if m == l:
                break
            if sweeps == QL_MAX_SWEEPS:
                raise NumericError(
                    f"QL iteration did not converge for eigenvalue {l} "
                    f"after {QL_MAX_SWEEPS} sweeps")
            sweeps += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * zi1
                z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0


def _sort_by_magnitude(values: np.ndarray, vectors: np.ndarray) -> EigenDecomposition:
    # primary key -|λ|, ties broken by larger signed value first
    order = np.lexsort((-values, -np.abs(values)))
    return EigenDecomposition(values[order].copy(), vectors[:, order].copy())


def sym_eig(h, method: str = "auto") -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix.

    ``method`` is ``"ql"`` (native Householder + implicit QL),
    ``"lapack"`` or ``"auto"`` (QL up to :data:`QL_AUTO_MAX_DIM`).
    """
    a = as_symmetric(h)
    n = a.shape[0]
    if method == "auto":
        method = "ql" if n <= QL_AUTO_MAX_DIM else "lapack"
    if method == "lapack":
        w, v = np.linalg.eigh(a)
        return _sort_by_magnitude(w, v)
    if method != "ql":
        raise ValueError(f"unknown eigensolver method {method!r}")
    if n == 1:
        return EigenDecomposition(a[0].copy(), np.ones((1, 1)))
    # unit scaling keeps the rotations clear of underflow and overflow
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return EigenDecomposition(np.zeros(n), np.eye(n))
    d, e, z = _tridiagonalize(a / scale)
    _tridiagonal_ql(d, e, z)
    return _sort_by_magnitude(d * scale, z)


def svd(a) -> SvdDecomposition:
    """Thin SVD with singular values descending (LAPACK-backed)."""
    a = _as_finite_matrix(a)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    cutoff = max(a.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    return SvdDecomposition(u, s, vt, rank)


def truncate_spectrum(eig: EigenDecomposition, threshold: float) -> TruncatedSpectrum:
    """Keep eigenpairs with ``|λ| >= threshold``."""
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    keep = np.abs(eig.values) >= threshold
    if not np.any(keep):
        raise EmptySpectrumError(
            f"no eigenvalue reaches |λ| >= {threshold:g} "
            f"(max |λ| = {np.max(np.abs(eig.values)):g}); lower the threshold")
    values = eig.values[keep]
    return TruncatedSpectrum(
        threshold=float(threshold),
        values=values,
        vectors=eig.vectors[:, keep],
        kappa_eff=float(np.max(np.abs(values)) / threshold),
    )


def threshold_for_rank(eig: EigenDecomposition, k: int) -> float:
    """Threshold that retains the ``k`` largest ``|λ|`` (``|λ_k|``)."""
    if not 1 <= k <= eig.dim:
        raise ValueError(f"k must be in [1, {eig.dim}], got {k}")
    return float(abs(eig.values[k - 1]))


def abs_pinv_truncated(h, threshold: float, method: str = "auto"):
    """Truncated absolute pseudo-inverse ``Σ_{|λ|>=thr} |λ|⁻¹ s sᵀ``.

    Returns ``(matrix, TruncatedSpectrum)``. Eigen-directions below the
    threshold get a zero inverse.
    """
    spec = truncate_spectrum(sym_eig(h, method=method), threshold)
    inv = (spec.vectors / np.abs(spec.values)) @ spec.vectors.T
    return inv, spec


def low_rank_inverse(a, r: int) -> np.ndarray:
    """Optimal rank-``r`` approximate inverse ``V_r Σ_r⁻¹ U_rᵀ``.

    This minimizes ``‖Z A - I‖_F`` over matrices of rank at most ``r``;
    the minimizer is unique only when ``σ_r > σ_{r+1}``.
    """
    dec = svd(a)
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if r > dec.rank:
        raise RankError(f"r={r} exceeds numerical rank {dec.rank}")
    s = dec.s
    if r < s.shape[0] and math.isclose(s[r - 1], s[r], rel_tol=1e-10, abs_tol=0.0):
        warnings.warn(
            f"σ_{r} == σ_{r + 1} ({s[r - 1]:.6g}); the rank-{r} inverse is not unique",
            RuntimeWarning, stacklevel=2)
    return (dec.vt[:r].T / s[:r]) @ dec.u[:, :r].T


def truncation_error(h, k: int, method: str = "auto"):
    """Spectral and Frobenius error of the best rank-``k`` approximation.

    Returns ``(|λ_{k+1}|, sqrt(Σ_{i>k} λ_i²))`` with eigenvalues ordered
    by magnitude.
    """
    eig = sym_eig(h, method=method)
    n = eig.dim
    if not 0 <= k < n:
        raise ValueError(f"k must satisfy 0 <= k < {n}, got {k}")
    tail = eig.values[k:]
    return float(abs(tail[0])), float(math.sqrt(float(tail @ tail)))


def norms(a):
    """``(spectral, frobenius)`` norms of a real matrix."""
    a = _as_finite_matrix(a)
    if a.size == 0:
        return 0.0, 0.0
    fro = float(np.sqrt(np.sum(a * a)))
    if fro == 0.0:
        return 0.0, 0.0
    return float(svd(a).s[0]), fro
