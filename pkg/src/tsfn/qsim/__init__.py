"""Exact desk-scale simulation of the quantum Newton-step pipeline."""

from .exponentiation import (density_exponentiation, exact_conjugation, swap_operator,
                             swap_step, swap_step_closed)
from .inversion import InversionResult, conditional_invert
from .phase import EigenReadout, PipelineConfig, phase_estimation
from .pipeline import DIAGNOSTIC_COLUMNS, Diagnostics, cosine, hybrid_step, pe_bits_for_accuracy
from .preparation import prepare_rho_hh, prepare_rho_hh_circuit, rho_hh_exact
from .readout import ReadoutResult, interference_distribution, readout_signed, shots_for
from .states import (DensityMatrix, QuantumState, encode_gradient, state_distance,
                     trace_distance)

__all__ = [
    "DIAGNOSTIC_COLUMNS", "DensityMatrix", "Diagnostics", "EigenReadout", "InversionResult",
    "PipelineConfig", "QuantumState", "ReadoutResult", "conditional_invert", "cosine",
    "density_exponentiation", "encode_gradient", "exact_conjugation", "hybrid_step",
    "interference_distribution", "pe_bits_for_accuracy", "phase_estimation",
    "prepare_rho_hh", "prepare_rho_hh_circuit", "readout_signed", "rho_hh_exact",
    "shots_for", "state_distance", "swap_operator", "swap_step", "swap_step_closed",
    "trace_distance",
]
