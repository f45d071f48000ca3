"""Density-matrix exponentiation by repeated partial swaps.

One step with a fresh copy of ``ρ`` maps ``σ`` to
``tr₁(e^{−iSΔt} (ρ⊗σ) e^{iSΔt}) = σ − iΔt[ρ, σ] + O(Δt²)``, so ``n`` steps of
size ``t/n`` approximate ``e^{−iρt} σ e^{iρt}`` with error ``O(t²/n)``.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg as sla

from ..errors import InputError
from .states import DensityMatrix, as_density


def swap_operator(d: int) -> np.ndarray:
    """``S = Σ |m⟩⟨n| ⊗ |n⟩⟨m|`` on ``C^d ⊗ C^d``."""
    s = np.zeros((d * d, d * d))
    idx = np.arange(d)
    m, n = np.meshgrid(idx, idx, indexing="ij")
    s[(m * d + n).ravel(), (n * d + m).ravel()] = 1.0
    return s


def _pair(rho, sigma):
    rho, sigma = as_density(rho), as_density(sigma)
    if rho.dim != sigma.dim:
        raise InputError(f"dimension mismatch: ρ is {rho.dim}, σ is {sigma.dim}")
    return rho, sigma


def swap_step(rho, sigma, dt: float) -> DensityMatrix:
    """One partial swap, simulated on the doubled space and traced back.

    The exponential ``e^{−iSΔt}`` is taken with ``scipy.linalg.expm``.
    """
    rho, sigma = _pair(rho, sigma)
    d = rho.dim
    u = sla.expm(-1j * dt * swap_operator(d))
    joint = u @ np.kron(rho.matrix, sigma.matrix) @ u.conj().T
    out = np.trace(joint.reshape(d, d, d, d), axis1=0, axis2=2)
    return DensityMatrix(out)


def swap_step_closed(rho: np.ndarray, sigma: np.ndarray, dt: float) -> np.ndarray:
    """``cos²Δt·σ + sin²Δt·ρ − i sinΔt cosΔt [ρ, σ]``: the same map, on raw arrays."""
    c, s = np.cos(dt), np.sin(dt)
    return c * c * sigma + s * s * rho - 1j * s * c * (rho @ sigma - sigma @ rho)


def exact_conjugation(rho, sigma, t: float) -> np.ndarray:
    """``e^{−iρt} σ e^{iρt}``."""
    rho, sigma = _pair(rho, sigma)
    w, v = np.linalg.eigh(rho.matrix)
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    return u @ sigma.matrix @ u.conj().T


def density_exponentiation(rho, sigma, t: float, n_steps: int) -> DensityMatrix:
    """``n_steps`` partial swaps of size ``t / n_steps``, one fresh ``ρ`` copy each."""
    if n_steps < 1:
        raise InputError(f"n_steps must be >= 1, got {n_steps}")
    rho, sigma = _pair(rho, sigma)
    dt = t / n_steps
    out = sigma.matrix.copy()
    for _ in range(n_steps):
        out = swap_step_closed(rho.matrix, out, dt)
    return DensityMatrix(0.5 * (out + out.conj().T))


def swap_channel_superoperator(rho: np.ndarray, dt: float) -> np.ndarray:
    """Matrix of ``σ ↦ swap_step(ρ, σ, dt)`` acting on row-major ``vec(σ)``.

    The map is linear in ``σ`` also for non-unit-trace arguments, with the
    ``ρ`` term weighted by ``tr σ``.
    """
    d = rho.shape[0]
    c, s = np.cos(dt), np.sin(dt)
    eye = np.eye(d)
    # vec(A X B) = (A ⊗ Bᵀ) vec(X) for row-major vec
    comm = np.kron(rho, eye) - np.kron(eye, rho.T)
    trace_part = np.outer(rho.ravel(), eye.ravel())
    return c * c * np.eye(d * d) + s * s * trace_part - 1j * s * c * comm
