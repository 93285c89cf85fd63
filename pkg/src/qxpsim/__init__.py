"""Simulator for kinetically constrained chains with a seeded edge domain.

The package covers four views of the same physics: the full constrained
spin model, its Rydberg facilitation realization, the exact
single-particle domain-wall chain, and the classical rate-equation
limit.  On the domain chain, staggered hops give topological edge-state
oscillations and slow three-site modulation gives quantized wall
pumping.
"""

__version__ = "0.1.0"

from .basis import QuantumState, SpinConfiguration, enumerate_basis
from .classical import ClassicalParameters, classical_evolve
from .config import ExperimentConfig, load_config, parse_raw, resolve
from .domain import (DomainParameters, DomainScheduleHamiltonian,
                     build_domain_hamiltonian, domain_center_of_mass,
                     project_to_domain, ssh_couplings)
from .errors import (CapacityError, ConfigError, NormalizationError,
                     NumericalError, ParameterError, QxpError, WindowError)
from .evolution import EvolutionResult, evolve, lanczos_expm, verify_by_halving
from .hamiltonians import (QxpParameters, RydbergParameters,
                           RydbergScheduleHamiltonian, build_qxp_hamiltonian,
                           build_rydberg_hamiltonian)
from .presets import PRESET_NAMES, preset, preset_raw
from .pump import (AahSchedule, PumpProgram, PumpSegment, adiabaticity_check,
                   composite_program, pump_markers)
from .runner import analyze_pump, analyze_ssh, run_experiment, run_sweep
from .topology import (band_chern_numbers, com_displacement,
                       edge_pair_splitting, edge_state_report,
                       localization_length, oscillation_period,
                       winding_number)

__all__ = [
    "AahSchedule", "CapacityError", "ClassicalParameters", "ConfigError",
    "DomainParameters", "DomainScheduleHamiltonian", "EvolutionResult",
    "ExperimentConfig", "NormalizationError", "NumericalError",
    "ParameterError", "PRESET_NAMES", "PumpProgram", "PumpSegment",
    "QuantumState", "QxpError", "QxpParameters", "RydbergParameters",
    "RydbergScheduleHamiltonian", "SpinConfiguration", "WindowError",
    "adiabaticity_check", "analyze_pump", "analyze_ssh",
    "band_chern_numbers", "build_domain_hamiltonian",
    "build_qxp_hamiltonian", "build_rydberg_hamiltonian", "classical_evolve",
    "com_displacement", "composite_program", "domain_center_of_mass",
    "edge_pair_splitting", "edge_state_report", "enumerate_basis", "evolve",
    "lanczos_expm", "load_config", "localization_length",
    "oscillation_period", "parse_raw", "preset", "preset_raw",
    "project_to_domain", "pump_markers", "resolve", "run_experiment",
    "run_sweep", "ssh_couplings", "verify_by_halving", "winding_number",
]
