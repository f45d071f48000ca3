"""Pipeline configuration and phase estimation of ``e^{−iρt}``.

Phases are stored as ``b``-bit register values ``m`` with
``μ̄ = m·2π/(t·2^b)``, where ``μ`` are the eigenvalues of ``ρ_{HHᵀ}``
(``λ²/‖H‖_F²``). The oracle mode rounds exact phases to the nearest
register value. The circuit mode simulates the ancilla register and the
controlled density-exponentiation channel, applies the inverse QFT and reads
the most likely register value of each eigencomponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, InputError
from ..linalg import as_symmetric, sym_eig
from .exponentiation import swap_channel_superoperator
from .preparation import CIRCUIT_MAX_DIM, prepare_rho_hh
from .states import DensityMatrix, QuantumState

#: Largest ancilla-times-system dimension simulated in circuit mode.
CIRCUIT_MAX_REGISTER = 1024


@dataclass(frozen=True)
class PipelineConfig:
    """Settings for one quantum step.

    ``threshold`` and ``c_rot`` are in the units of ``H`` (eigenvalue
    magnitudes); they are normalized by ``‖H‖_F`` internally. ``t=None``
    picks ``2π`` (or ``π`` if an eigenvalue of ``ρ`` is so close to 1 that
    its register value would wrap). ``n_trotter`` is the number of partial
    swaps making up one application of ``e^{iρt}`` in circuit mode.
    """

    pe_bits: int = 12
    t: float | None = None
    n_trotter: int | None = None
    c_rot: float | None = None
    threshold: float | None = None
    shots: int = 0
    p: int | None = None
    mode: str = "oracle"
    seed: int = 0

    def __post_init__(self):
        if self.pe_bits < 1:
            raise ConfigError(f"pe_bits must be >= 1, got {self.pe_bits}")
        if self.mode not in ("oracle", "circuit"):
            raise ConfigError(f"mode must be 'oracle' or 'circuit', got {self.mode!r}")
        if self.t is not None and not self.t > 0:
            raise ConfigError(f"t must be positive, got {self.t}")
        if self.n_trotter is not None and self.n_trotter < 1:
            raise ConfigError(f"n_trotter must be >= 1, got {self.n_trotter}")
        if self.threshold is not None and not self.threshold > 0:
            raise ConfigError(f"threshold must be positive, got {self.threshold}")
        if self.c_rot is not None:
            if not self.c_rot > 0:
                raise ConfigError(f"c_rot must be positive, got {self.c_rot}")
            if self.threshold is not None and self.c_rot > self.threshold:
                raise ConfigError(f"c_rot={self.c_rot:g} exceeds threshold={self.threshold:g}; "
                                  "rotation amplitudes would exceed 1")
        if self.shots < 0:
            raise ConfigError(f"shots must be >= 0, got {self.shots}")
        if self.p is not None and self.p < 0:
            raise ConfigError(f"p must be >= 0, got {self.p}")


@dataclass(frozen=True)
class EigenReadout:
    """Phase-register estimates per eigencomponent of ``ρ``.

    Components are ordered by descending exact ``μ``; ``vectors[:, i]`` is
    the eigenvector, ``eta[i]`` the input amplitude on it and
    ``registers[i]`` the register value read for it.
    """

    mu_bar: np.ndarray
    eta: np.ndarray
    vectors: np.ndarray
    registers: np.ndarray
    mu_exact: np.ndarray
    t: float
    pe_bits: int
    frob: float
    mode: str
    bin_probabilities: np.ndarray | None = field(default=None, repr=False)

    @property
    def bin_width(self) -> float:
        """Spacing of representable ``μ̄`` values, ``2π / (t·2^b)``."""
        return 2 * math.pi / (self.t * 2 ** self.pe_bits)

    @property
    def lambda_bar(self) -> np.ndarray:
        """Estimated ``|λ|`` in the units of ``H``."""
        return np.sqrt(self.mu_bar) * self.frob

    def entries(self):
        return [(float(m), float(e), i) for i, (m, e) in enumerate(zip(self.mu_bar, self.eta))]


def default_time(mu_max: float, pe_bits: int) -> float:
    return 2 * math.pi if mu_max < 1 - 2.0 ** (-pe_bits - 1) else math.pi


def check_time(t: float, mu_max: float, pe_bits: int) -> None:
    if mu_max * t / (2 * math.pi) >= 1 - 2.0 ** (-pe_bits - 1):
        raise ConfigError(
            f"t={t:g} wraps the phase register: max eigenvalue of ρ is {mu_max:.6g}, "
            f"so t must be below {2 * math.pi * (1 - 2.0 ** (-pe_bits - 1)) / mu_max:.6g}")


def default_trotter(t: float, pe_bits: int) -> int:
    """Swaps per ``e^{iρt}`` keeping the ``O(t²/n)`` error of the largest power near 1e-3."""
    return int(math.ceil(1e3 * t * t * 2 ** (pe_bits - 1)))


def _rho_eigen(rho: DensityMatrix):
    eig = sym_eig(rho.matrix.real)
    return np.clip(eig.values, 0.0, None), eig.vectors


def phase_estimation(h, chi: QuantumState, config: PipelineConfig,
                     rho: DensityMatrix | None = None) -> EigenReadout:
    """Estimate the eigenphases of ``e^{−iρt}`` seen by the input state ``χ``."""
    a = as_symmetric(h, atol=1e-12 * max(1.0, float(np.max(np.abs(h)))))
    frob = float(np.linalg.norm(a))
    if frob == 0.0:
        raise InputError("H is zero")
    if rho is None:
        rho = prepare_rho_hh(a, mode="oracle")
    if chi.dim != rho.dim:
        raise InputError(f"state has dimension {chi.dim}, ρ has {rho.dim}")
    mu, vecs = _rho_eigen(rho)
    b = config.pe_bits
    t = default_time(mu[0], b) if config.t is None else float(config.t)
    check_time(t, mu[0], b)
    amp = chi.amplitudes
    if np.max(np.abs(amp.imag)) > 1e-12:
        raise InputError("phase estimation expects a real input state")
    eta = vecs.T @ amp.real
    if config.mode == "oracle":
        regs = np.floor(mu * t * 2 ** b / (2 * math.pi) + 0.5).astype(np.int64)
        probs = None
    else:
        regs, probs = _circuit_registers(rho.matrix, amp, vecs, eta, t, b, config.n_trotter)
    mu_bar = regs * (2 * math.pi / (t * 2 ** b))
    return EigenReadout(mu_bar=mu_bar, eta=eta, vectors=vecs, registers=regs, mu_exact=mu,
                        t=t, pe_bits=b, frob=frob, mode=config.mode, bin_probabilities=probs)


def _apply_controlled_channel(omega, q, b, m01, m10, lk):
    """Apply the channel powers controlled by qubit ``q`` to ``Ω``."""
    p = b - 1 - q
    t = np.moveaxis(omega, [p, b + 1 + p], [0, 1]).copy()
    # after removing the two control axes: rows (b-1 qubits, sys), cols (b-1 qubits, sys)
    sys_row = b - 1
    t[0, 1] = np.tensordot(t[0, 1], m01, axes=([-1], [0]))
    t[1, 0] = np.moveaxis(np.tensordot(m10, t[1, 0], axes=([1], [sys_row])), 0, sys_row)
    y = np.moveaxis(t[1, 1], sys_row, -2)
    y = np.einsum("ijkl,...kl->...ij", lk, y)
    t[1, 1] = np.moveaxis(y, -2, sys_row)
    return np.moveaxis(t, [0, 1], [p, b + 1 + p])


def controlled_channel_blocks(rho: np.ndarray, tau: float, reps: int):
    """Block maps of ``reps`` controlled partial swaps of size ``tau``.

    With the control on the first tensor factor, the coherence blocks
    transform as ``Ω01 ↦ Ω01 (cI + isρ)^K`` and ``Ω10 ↦ (cI − isρ)^K Ω10``,
    and the ``|1⟩⟨1|`` block by the ``K``-th power of the swap channel.
    """
    d = rho.shape[0]
    c, s = math.cos(tau), math.sin(tau)
    eye = np.eye(d)
    m01 = np.linalg.matrix_power(c * eye + 1j * s * rho, reps)
    m10 = np.linalg.matrix_power(c * eye - 1j * s * rho, reps)
    lk = np.linalg.matrix_power(swap_channel_superoperator(rho, tau), reps).reshape(d, d, d, d)
    return m01, m10, lk


def simulate_phase_register(rho: np.ndarray, sigma: np.ndarray, t: float, b: int,
                            n_trotter: int) -> np.ndarray:
    """Joint state of the ``b``-qubit register and the system after the inverse QFT.

    Returned with shape ``(2^b, d, 2^b, d)``. Qubit ``q`` controls
    ``2^q·n_trotter`` partial swaps of size ``−1/n_trotter`` (a controlled
    ``e^{+iρ·2^q}`` up to Trotter error), so register value ``m`` encodes
    the phase ``μt/2π ≈ m/2^b``.
    """
    d = rho.shape[0]
    size = 2 ** b
    if size * d > CIRCUIT_MAX_REGISTER:
        raise ConfigError(f"circuit phase estimation needs 2^b·dim <= {CIRCUIT_MAX_REGISTER}, "
                          f"got 2^{b}·{d}")
    omega = np.kron(np.full((size, size), 1.0 / size), sigma).astype(complex)
    omega = omega.reshape((2,) * b + (d,) + (2,) * b + (d,))
    tau = -t / n_trotter
    for q in range(b):
        m01, m10, lk = controlled_channel_blocks(rho, tau, n_trotter * 2 ** q)
        omega = _apply_controlled_channel(omega, q, b, m01, m10, lk)
    omega = omega.reshape(size, d, size, d)
    k = np.arange(size)
    f_inv = np.exp(-2j * math.pi * np.outer(k, k) / size) / math.sqrt(size)
    # (F† ⊗ I) Ω (F ⊗ I)
    omega = np.tensordot(f_inv, omega, axes=([1], [0]))
    omega = np.tensordot(omega, f_inv.conj(), axes=([2], [1]))
    return np.moveaxis(omega, 3, 2)


def _circuit_registers(rho, amp, vecs, eta, t, b, n_trotter):
    d = rho.shape[0]
    if d > CIRCUIT_MAX_DIM:
        raise ConfigError(f"circuit mode supports dimension <= {CIRCUIT_MAX_DIM}, got {d}")
    n = default_trotter(t, b) if n_trotter is None else int(n_trotter)
    sigma = np.outer(amp, amp.conj())
    omega = simulate_phase_register(rho, sigma, t, b, n)
    diag = np.einsum("mkml->mkl", omega)
    probs = np.einsum("ki,mkl,li->im", vecs, diag, vecs).real
    weak = np.sum(probs, axis=1) < 1e-12
    if np.any(weak):
        # components χ does not populate: read their phases from a maximally mixed input
        omega_mixed = simulate_phase_register(rho, np.eye(d) / d, t, b, n)
        diag_m = np.einsum("mkml->mkl", omega_mixed)
        probs_m = np.einsum("ki,mkl,li->im", vecs, diag_m, vecs).real
        probs = np.where(weak[:, None], probs_m, probs)
    return np.argmax(probs, axis=1).astype(np.int64), probs
