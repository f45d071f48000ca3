"""Sign-resolving readout of a real amplitude vector.

The state ``(|0⟩_A|+⟩^p + |1⟩_A|ψ⟩)/√2`` is measured with the ancilla in the
``|±⟩`` basis and the register in the computational basis. Outcome
``(±, j)`` has probability ``(u ± α_j)²/4`` with ``u = 2^{-p/2}``, so the
difference of the two branches gives ``α_j = (P₊(j) − P₋(j))/u``, sign
included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, InputError
from ..rng import make_rng
from .states import QuantumState, n_qubits_for, pad_vector


@dataclass(frozen=True)
class ReadoutResult:
    amplitudes: np.ndarray
    stderr: np.ndarray
    unresolved: np.ndarray
    p: int
    shots: int

    @property
    def signs(self) -> np.ndarray:
        return np.sign(self.amplitudes)


def _amplitudes(state) -> np.ndarray:
    if isinstance(state, QuantumState):
        a = state.amplitudes
    else:
        a = np.asarray(state, dtype=complex).ravel()
        norm = float(np.linalg.norm(a))
        if not abs(norm - 1.0) <= 1e-10:
            raise InputError(f"readout expects a unit vector, got norm {norm:.12g}")
    if np.max(np.abs(a.imag)) > 1e-12:
        raise InputError("readout recovers real amplitudes only")
    return a.real


def outcome_probabilities(alpha, p: int) -> np.ndarray:
    """Joint distribution ``[(P₊(j))_j, (P₋(j))_j]`` of the interference measurement."""
    a = pad_vector(np.asarray(alpha, dtype=float), 2 ** p)
    u = 2.0 ** (-p / 2)
    return np.stack([(u + a) ** 2, (u - a) ** 2]) / 4.0


def interference_distribution(alpha, p: int) -> np.ndarray:
    """Register distribution in the ``+`` branch, normalized by ``2 + 2u·Σα``.

    The normalization depends on the overlap of ``|+⟩^p`` and ``|ψ⟩``.
    """
    plus = outcome_probabilities(alpha, p)[0]
    return plus / plus.sum()


def readout_signed(state, p: int | None = None, shots: int = 0, seed=0,
                   z: float = 3.0) -> ReadoutResult:
    """Estimate the signed amplitudes of ``state`` from ``shots`` measurements.

    ``shots=0`` returns the exact amplitudes. Otherwise each estimate comes
    with a binomial standard error, and components with ``|α̂| < z·SE`` are
    flagged as unresolved (their sign is not trustworthy).
    """
    alpha = _amplitudes(state)
    n = alpha.shape[0]
    p = n_qubits_for(n) if p is None else int(p)
    if 2 ** p < n:
        raise ConfigError(f"p={p} is too small: 2^p must be >= {n}")
    if shots < 0:
        raise ConfigError(f"shots must be >= 0, got {shots}")
    if shots == 0:
        return ReadoutResult(alpha.copy(), np.zeros(n), np.zeros(n, dtype=bool), p, 0)
    probs = outcome_probabilities(alpha, p)
    rng = make_rng(seed)
    counts = rng.multinomial(shots, probs.ravel() / probs.sum()).reshape(probs.shape)
    f = counts / shots
    u = 2.0 ** (-p / 2)
    est = (f[0] - f[1]) / u
    var = (f[0] + f[1] - (f[0] - f[1]) ** 2) / shots
    se = np.sqrt(np.clip(var, 0.0, None)) / u
    # a component never observed has no sign information at all
    unresolved = (np.abs(est) < z * se) | (counts[0] + counts[1] == 0)
    return ReadoutResult(est[:n], se[:n], unresolved[:n], p, int(shots))


def shots_for(n: int, kappa: float, factor: float = 10.0) -> int:
    """``factor·N·log₂N·κ²`` measurements."""
    return int(math.ceil(factor * n * max(1.0, math.log2(n)) * kappa * kappa))
