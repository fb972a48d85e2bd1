"""Simulation and benchmarking toolkit for diabatic two-qubit gates.

Covers the two-transmon block Hamiltonians, rounded-trapezoid frequency
pulses, swap/leakage propagation, synchronization landscapes, the
five-angle photon-conserving unitary fit, and cross-entropy benchmarking
with purity, leakage and error-budget analysis.
"""

__version__ = "0.1.0"

from diabatic.device import (
    Block,
    BlockHamiltonian,
    CouplingModel,
    DeviceParams,
    QubitParams,
    bright_dark_basis,
    coupling_at,
    hamiltonian_1ex,
    hamiltonian_2ex,
    reference_device,
)
from diabatic.pulse import SampledTrajectory, TrapezoidPulse, rectangular, sample
from diabatic.propagator import (
    BlockState,
    PropagationResult,
    effective_unitary,
    evolve_block,
    full_unitary,
    ideal_leakage,
    ideal_swap_prob,
    leakage_error,
    propagate,
    swap_error,
    sync_coupling,
)
from diabatic.optimize import nelder_mead
from diabatic.unitary import (
    ErrorMetrics,
    FitResult,
    FsimAngles,
    build_unitary,
    error_metrics,
    fit_unitary,
    gate_error_from_cycle,
)
from diabatic.landscape import ErrorGrid, SweepSpec, SyncPoint, TuneResult, find_dips, optimize, sweep, sync_spectrum, tune
from diabatic.xeb import (
    ErrorBudget,
    NoiseModel,
    RandomCircuit,
    XebReport,
    alpha,
    cross_entropy,
    error_budget,
    fit_exponential,
    fit_leakage,
    gen_circuit,
    purity_series,
    run_xeb,
    simulate_ideal,
    simulate_noisy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
