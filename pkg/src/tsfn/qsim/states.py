"""Pure and mixed states on a register of qubits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InputError, ZeroGradientError

NORM_TOL = 1e-10


def n_qubits_for(n: int) -> int:
    """Qubits needed to index ``n`` basis states."""
    if n < 1:
        raise InputError(f"dimension must be >= 1, got {n}")
    return max(0, math.ceil(math.log2(n)))


def pad_vector(v, size: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    size = 2 ** n_qubits_for(v.shape[0]) if size is None else size
    out = np.zeros(size, dtype=v.dtype)
    out[: v.shape[0]] = v
    return out


def pad_matrix(a, size: int | None = None) -> np.ndarray:
    a = np.asarray(a)
    size = 2 ** n_qubits_for(a.shape[0]) if size is None else size
    out = np.zeros((size, size), dtype=a.dtype)
    out[: a.shape[0], : a.shape[1]] = a
    return out


@dataclass(frozen=True)
class QuantumState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).ravel()
        n = amp.shape[0]
        if n < 1 or n & (n - 1):
            raise InputError(f"state length must be a power of 2, got {n}")
        if not np.all(np.isfinite(amp)):
            raise InputError("amplitudes must be finite")
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise InputError(f"state is not normalized (Σ|a|² = {norm:.12g})")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def n_qubits(self) -> int:
        return n_qubits_for(self.amplitudes.shape[0])

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def from_vector(cls, v) -> "QuantumState":
        """Normalize ``v`` and pad it to a power-of-2 length."""
        v = np.asarray(v, dtype=complex).ravel()
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise InputError("cannot normalize the zero vector")
        return cls(pad_vector(v / norm))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError(f"density matrix must be square, got {m.shape}")
        n = m.shape[0]
        if n < 1 or n & (n - 1):
            raise InputError(f"density matrix dimension must be a power of 2, got {n}")
        if not np.all(np.isfinite(m)):
            raise InputError("density matrix has non-finite entries")
        if np.max(np.abs(m - m.conj().T)) > NORM_TOL:
            raise InputError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > NORM_TOL:
            raise InputError(f"density matrix trace is {tr:.12g}, expected 1")
        m = 0.5 * (m + m.conj().T)
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -NORM_TOL:
            raise InputError(f"density matrix is not positive semidefinite (min eigenvalue {lo:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return n_qubits_for(self.dim)


def as_density(x) -> DensityMatrix:
    if isinstance(x, DensityMatrix):
        return x
    if isinstance(x, QuantumState):
        return x.density()
    return DensityMatrix(x)


def trace_distance(a, b) -> float:
    """``½‖a − b‖₁`` for Hermitian matrices (or DensityMatrix objects)."""
    a = a.matrix if isinstance(a, DensityMatrix) else np.asarray(a)
    b = b.matrix if isinstance(b, DensityMatrix) else np.asarray(b)
    if a.shape != b.shape:
        raise InputError(f"shape mismatch {a.shape} vs {b.shape}")
    d = a - b
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))


def fidelity_pure(state, rho) -> float:
    """``⟨ψ|ρ|ψ⟩``."""
    psi = state.amplitudes if isinstance(state, QuantumState) else np.asarray(state)
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(np.vdot(psi, m @ psi).real)


def state_distance(a, b) -> float:
    """``sqrt(2(1 − Re⟨a|b⟩))`` for unit vectors."""
    a = a.amplitudes if isinstance(a, QuantumState) else np.asarray(a)
    b = b.amplitudes if isinstance(b, QuantumState) else np.asarray(b)
    return math.sqrt(max(0.0, 2.0 * (1.0 - float(np.vdot(a, b).real))))


def encode_gradient(grad) -> QuantumState:
    """Amplitude-encode ``grad/‖grad‖``, zero-padded to a power-of-2 length.

    A zero gradient raises :class:`ZeroGradientError`: there is no state to
    prepare, and the caller is already at a critical point.
    """
    g = np.asarray(grad, dtype=float).ravel()
    if g.size == 0 or not np.all(np.isfinite(g)):
        raise InputError("gradient must be a non-empty finite vector")
    norm = float(np.linalg.norm(g))
    if norm == 0.0:
        raise ZeroGradientError("gradient is zero; already at a critical point")
    return QuantumState(pad_vector(g / norm).astype(complex))
