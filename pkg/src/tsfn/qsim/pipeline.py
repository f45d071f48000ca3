"""One quantum truncated saddle-free Newton step, end to end."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..linalg import as_symmetric
from .inversion import InversionResult, conditional_invert
from .phase import EigenReadout, PipelineConfig, phase_estimation
from .preparation import prepare_rho_hh, prepare_rho_hh_circuit
from .readout import ReadoutResult, readout_signed
from .states import encode_gradient

DIAGNOSTIC_COLUMNS = ("stage", "k", "p_success", "pe_bits", "fidelity_to_classical")


def cosine(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


@dataclass
class Diagnostics:
    """Per-stage record of a hybrid step.

    ``lambda_bar`` holds the estimated ``|λ|`` (units of ``H``) of the
    retained components, largest first.
    """

    pe_bits: int
    t: float
    mode: str
    p_postselect_rho: float
    readout: EigenReadout
    inversion: InversionResult
    signed: ReadoutResult
    lambda_bar: np.ndarray
    stages: list = field(default_factory=list)

    @property
    def p_success(self) -> float:
        return self.inversion.p_success

    @property
    def k(self) -> int:
        return self.inversion.k

    @property
    def kappa_eff(self) -> float:
        return self.inversion.kappa_eff

    @property
    def expected_repetitions(self) -> float:
        return self.inversion.expected_repetitions

    @property
    def amplified_repetitions(self) -> float:
        return self.inversion.amplified_repetitions

    def rows(self, classical=None):
        """Rows in :data:`DIAGNOSTIC_COLUMNS` order.

        With a classical reference direction the invert and readout rows
        carry the cosine similarity to it; other rows carry NaN.
        """
        out = []
        for stage, k, p, vec in self.stages:
            fid = cosine(vec, classical) if (classical is not None and vec is not None) else math.nan
            out.append({"stage": stage, "k": k, "p_success": p, "pe_bits": self.pe_bits,
                        "fidelity_to_classical": fid})
        return out


def hybrid_step(h, grad, config: PipelineConfig):
    """Quantum estimate of ``|H_k|⁻¹ ∇f`` and its diagnostics.

    The readout yields the unit vector along ``|H_k|⁻¹ χ`` with
    ``χ = ∇f/‖∇f‖``. Its length follows from postselection bookkeeping:
    the rotated amplitudes are ``η_i·c/λ̄_i`` in ``‖H‖_F``-normalized units,
    so ``‖|H_k|⁻¹∇f‖ = ‖∇f‖·sqrt(p_success)/(c·‖H‖_F)``.
    """
    a = as_symmetric(h, atol=1e-12 * max(1.0, float(np.max(np.abs(h)))))
    g = np.asarray(grad, dtype=float).ravel()
    n = a.shape[0]
    if g.shape[0] != n:
        raise InputError(f"gradient has length {g.shape[0]}, H is {n}x{n}")
    chi = encode_gradient(g)
    if config.mode == "circuit":
        prep = prepare_rho_hh_circuit(a)
        rho, p_rho = prep.rho, prep.p_postselect
    else:
        rho, p_rho = prepare_rho_hh(a, mode="oracle"), 1.0
    readout = phase_estimation(a, chi, config, rho=rho)
    inv = conditional_invert(readout, config)
    psi = readout.vectors @ inv.state.amplitudes.real
    exact_dir = psi[:n]
    signed = readout_signed(psi, p=config.p, shots=config.shots, seed=config.seed)
    scale = float(np.linalg.norm(g)) * math.sqrt(inv.p_success) / (inv.c * readout.frob)
    direction = scale * signed.amplitudes[:n]
    stages = [
        ("encode", n, 1.0, None),
        ("prepare", n, p_rho, None),
        ("phase_estimation", int(np.sum(readout.registers > 0)), 1.0, None),
        ("invert", inv.k, inv.p_success, exact_dir),
        ("readout", inv.k, inv.p_success, direction),
    ]
    lam = np.sort(readout.lambda_bar[inv.retained])[::-1]
    diag = Diagnostics(pe_bits=config.pe_bits, t=readout.t, mode=config.mode,
                       p_postselect_rho=p_rho, readout=readout, inversion=inv,
                       signed=signed, lambda_bar=lam, stages=stages)
    return direction, diag


def pe_bits_for_accuracy(epsilon: float, mu_min: float, t: float) -> int:
    """Register width with total evolution time ``t·2^b >= π/(ε·μ_min)``.

    Rounding moves each ``μ`` by at most half a bin, ``π/(t·2^b)``, which
    rescales each inverted component by at most a relative ``δ/(2μ)``; the
    normalized output then moves by at most about ``δ/μ_min ≤ ε``.
    """
    if not (epsilon > 0 and mu_min > 0 and t > 0):
        raise InputError("epsilon, mu_min and t must be positive")
    total = math.pi / (epsilon * mu_min)
    return max(1, math.ceil(math.log2(total / t)))
