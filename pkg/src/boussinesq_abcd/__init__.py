"""Pseudo-spectral simulator and harmonic-analysis diagnostics for the abcd Boussinesq family."""

from .energy import EnergyReport, energy_report, hamiltonian, long_time_bounds
from .initial import make_initial
from .integrator import BlowUpNumeric, ConfigInvalid, ExitStatus, RunConfig, simulate, step
from .littlewood_paley import DyadicPartition, besov_norm, build_partition
from .model import AbcdParams, Classification, WaveState, decompose_initial, preset, validate_params
from .spectral import GridSpec

__all__ = [
    "AbcdParams",
    "BlowUpNumeric",
    "Classification",
    "ConfigInvalid",
    "DyadicPartition",
    "EnergyReport",
    "ExitStatus",
    "GridSpec",
    "RunConfig",
    "WaveState",
    "besov_norm",
    "build_partition",
    "decompose_initial",
    "energy_report",
    "hamiltonian",
    "long_time_bounds",
    "make_initial",
    "preset",
    "simulate",
    "step",
    "validate_params",
]

__version__ = "0.1.0"
