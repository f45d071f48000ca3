"""Threshold-filtered conditional rotation ``η_i ↦ η_i·c/|λ̄_i|`` with postselection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, EmptySpectrumError
from .phase import EigenReadout, PipelineConfig
from .states import QuantumState


@dataclass(frozen=True)
class InversionResult:
    """Postselected state in the eigenbasis of ``ρ`` and its bookkeeping.

    ``c`` and ``lambda_bar`` are normalized by ``‖H‖_F``. The repetition
    counts are the expected number of attempts until the ancilla reads
    ``|1⟩``, without and with amplitude amplification.
    """

    state: QuantumState
    p_success: float
    retained: np.ndarray
    lambda_bar: np.ndarray
    c: float
    kappa_eff: float

    @property
    def k(self) -> int:
        return int(np.sum(self.retained))

    @property
    def expected_repetitions(self) -> float:
        return 1.0 / self.p_success

    @property
    def amplified_repetitions(self) -> float:
        return 1.0 / math.sqrt(self.p_success)


def threshold_register(threshold: float, frob: float, t: float, pe_bits: int) -> int:
    """Register encoding of the threshold, rounded like any eigenphase."""
    mu = (threshold / frob) ** 2
    return int(math.floor(mu * t * 2 ** pe_bits / (2 * math.pi) + 0.5))


def conditional_invert(readout: EigenReadout, config: PipelineConfig) -> InversionResult:
    """Rotate an ancilla by ``c/|λ̄_i|`` on retained components and postselect.

    A component is retained when its register is nonzero and, if a
    threshold is set, not below the register encoding of the threshold.
    Comparing registers rather than real values means every eigenvalue at
    or above the threshold survives the rounding. ``c`` defaults to the
    smallest retained ``|λ̄|``.
    """
    regs = readout.registers
    retained = regs > 0
    if config.threshold is not None:
        retained &= regs >= max(1, threshold_register(config.threshold, readout.frob,
                                                      readout.t, readout.pe_bits))
    if not np.any(retained):
        raise EmptySpectrumError("no eigencomponent passed the threshold filter")
    lam = np.sqrt(readout.mu_bar)
    lam_min = float(np.min(lam[retained]))
    if config.c_rot is None:
        c = lam_min
    else:
        c = config.c_rot / readout.frob
        if c > lam_min * (1 + 1e-12):
            raise ConfigError(
                f"c_rot={config.c_rot:g} exceeds the smallest retained |λ̄| "
                f"({lam_min * readout.frob:g}); rotation amplitude would exceed 1")
    amp = np.where(retained, readout.eta * c / np.where(retained, lam, 1.0), 0.0)
    p = float(amp @ amp)
    if p == 0.0:
        raise EmptySpectrumError("the input state has no weight on the retained components")
    state = QuantumState(amp / math.sqrt(p))
    kappa = float(np.max(lam[retained]) / c)
    return InversionResult(state, p, retained, lam, c, kappa)
