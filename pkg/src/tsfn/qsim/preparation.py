"""Preparation of ``ρ = H Hᵀ / tr(H Hᵀ)`` from entry oracles.

The circuit mode runs the register-level construction: a uniform
superposition over index pairs ``(i, j)``, dephasing of ``j``, an oracle
writing ``H_ij`` into a value register, a controlled ancilla rotation with
amplitude ``H_ij / c``, postselection of the ancilla on ``|1⟩``, uncomputation
of the value register and a partial trace over everything except ``i``.

Mixed states are carried as ensembles ``{(w_m, |ψ_m⟩)}``. After dephasing the
ensemble members are the ``j`` branches and every later stage acts on each
branch separately, so no full density matrix over all registers is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, InputError
from ..linalg import as_symmetric
from .states import DensityMatrix, pad_matrix

CIRCUIT_MAX_DIM = 16


def _checked_h(h) -> np.ndarray:
    a = as_symmetric(h, atol=1e-12 * max(1.0, float(np.max(np.abs(h)))))
    if not np.any(a):
        raise InputError("H is zero; ρ = HHᵀ/tr(HHᵀ) is undefined")
    return a


def rho_hh_exact(h) -> np.ndarray:
    """``HHᵀ / tr(HHᵀ)``, zero-padded to a power-of-2 dimension."""
    a = pad_matrix(_checked_h(h))
    g = a @ a.T
    return g / np.trace(g)


@dataclass
class Ensemble:
    """Mixed state ``Σ w_m |ψ_m⟩⟨ψ_m|`` over registers of the given shape."""

    shape: tuple
    weights: list = field(default_factory=list)
    members: list = field(default_factory=list)

    @property
    def trace(self) -> float:
        return float(sum(self.weights))

    def density(self) -> np.ndarray:
        """Full density matrix (only sensible for small registers)."""
        size = int(np.prod(self.shape))
        out = np.zeros((size, size), dtype=complex)
        for w, psi in zip(self.weights, self.members):
            v = psi.ravel()
            out += w * np.outer(v, v.conj())
        return out


@dataclass(frozen=True)
class PreparationResult:
    rho: DensityMatrix
    p_postselect: float
    c: float
    stages: dict


def prepare_rho_hh(h, mode: str = "oracle", c: float | None = None) -> DensityMatrix:
    """``ρ_{HHᵀ}`` either directly (``"oracle"``) or by register simulation (``"circuit"``)."""
    if mode == "oracle":
        return DensityMatrix(rho_hh_exact(h))
    if mode == "circuit":
        return prepare_rho_hh_circuit(h, c).rho
    raise ConfigError(f"mode must be 'oracle' or 'circuit', got {mode!r}")


def prepare_rho_hh_circuit(h, c: float | None = None, keep_stages: bool = False) -> PreparationResult:
    """Register-level preparation of ``ρ_{HHᵀ}``.

    ``c`` is the rotation constant; it defaults to ``max|H_ij|`` and must
    not be smaller, otherwise the rotation amplitude ``H_ij / c`` exceeds 1.
    With ``keep_stages`` the intermediate ensembles are returned keyed by
    stage name.
    """
    a = pad_matrix(_checked_h(h))
    d = a.shape[0]
    if d > CIRCUIT_MAX_DIM:
        raise ConfigError(f"circuit mode supports dimension <= {CIRCUIT_MAX_DIM}, got {d}")
    hmax = float(np.max(np.abs(a)))
    c = hmax if c is None else float(c)
    if c < hmax * (1 - 1e-12):
        raise ConfigError(f"rotation constant c={c:g} is below max|H_ij|={hmax:g}; "
                          "rotation amplitudes would exceed 1")

    # value register: basis state 0 holds 0.0, the rest the distinct nonzero entries
    values = np.concatenate(([0.0], np.unique(a[a != 0.0])))
    code = np.searchsorted(values[1:], a) + 1
    code[a == 0.0] = 0
    nv = values.shape[0]
    shape = (d, d, nv, 2)
    stages = {}

    def snap(name, ens):
        if keep_stages:
            stages[name] = Ensemble(ens.shape, list(ens.weights), [m.copy() for m in ens.members])

    # uniform superposition Σ_ij |i,j⟩|0⟩|0⟩ / d
    psi = np.zeros(shape, dtype=complex)
    psi[:, :, 0, 0] = 1.0 / d
    snap("uniform", Ensemble(shape, [1.0], [psi]))

    # dephase j: Σ_j P_j ρ P_j, one branch per j
    ens = Ensemble(shape)
    for j in range(d):
        branch = np.zeros(shape, dtype=complex)
        branch[:, j] = psi[:, j]
        w = float(np.vdot(branch, branch).real)
        ens.weights.append(w)
        ens.members.append(branch / np.sqrt(w))
    snap("dephased", ens)

    def oracle(ens, sign):
        for m in ens.members:
            for i in range(d):
                for j in range(d):
                    m[i, j] = np.roll(m[i, j], sign * code[i, j], axis=0)

    oracle(ens, +1)
    snap("oracle", ens)

    # controlled R_y on the ancilla: |0⟩ → sqrt(1 - (x/c)²)|0⟩ + (x/c)|1⟩
    s = values / c
    co = np.sqrt(np.clip(1.0 - s * s, 0.0, None))
    for m in ens.members:
        a0, a1 = m[..., 0].copy(), m[..., 1].copy()
        m[..., 0] = co * a0 - s * a1
        m[..., 1] = s * a0 + co * a1
    snap("rotated", ens)

    # postselect the ancilla on |1⟩
    before = ens.trace
    post = Ensemble(shape)
    for w, m in zip(ens.weights, ens.members):
        proj = np.zeros_like(m)
        proj[..., 1] = m[..., 1]
        pw = float(np.vdot(proj, proj).real)
        if pw > 0.0:
            post.weights.append(w * pw)
            post.members.append(proj / np.sqrt(pw))
    p_post = post.trace / before
    snap("postselected", post)

    oracle(post, -1)
    snap("uncomputed", post)

    # trace out j, the value register and the ancilla
    rho = np.zeros((d, d), dtype=complex)
    for w, m in zip(post.weights, post.members):
        v = m.reshape(d, -1)
        rho += w * v @ v.conj().T
    rho /= np.trace(rho).real
    return PreparationResult(DensityMatrix(rho), p_post, c, stages)
