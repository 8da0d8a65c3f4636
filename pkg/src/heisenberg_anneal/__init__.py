"""Quantum annealing of spin-1/2 Heisenberg chains.

The annealing Hamiltonian interpolates linearly from a staggered transverse
field to Heisenberg exchange plus a uniform Zeeman field; the package builds
these operators, integrates the Schroedinger equation, diagonalizes
instantaneous Hamiltonians and analyses the resulting states.
"""

from .basis import SpinBasis, SpinConfiguration, index_to_spins, spins_to_index
from .errors import CapabilityError, ConfigError, ContractError, NormDriftError, UndefinedPhaseError
from .experiments import PRESETS, AnnealConfig, compare_oracle, oracle_propagate, preset, run_preset
from .operators import (
    CouplingGraph,
    FieldParams,
    SparseHermitian,
    apply,
    build_exchange_zeeman,
    build_staggered_driver,
    build_total_spin_squared,
)
from .propagator import IntegratorConfig, Trajectory, evolve, prepare_driver_ground, rk4_step
from .schedule import AnnealHamiltonian, AnnealSchedule, apply_at, s_of_t
from .spectrum import eigen_decompose, ground_space, spectrum_series

__version__ = "0.1.0"
