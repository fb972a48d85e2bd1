"""Time evolution of the one- and two-excitation blocks under a frequency trajectory.

Each pair of grid intervals [t_k, t_k+2] is integrated with the fourth-order
Magnus expansion built from the three node Hamiltonians (Simpson weights
plus the leading commutator). Every step is the exponential of a Hermitian
matrix, so the propagator is unitary by construction; for a constant
Hamiltonian the commutator vanishes and the step is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from diabatic.device import Block, DeviceParams, block_matrices
from diabatic.pulse import SampledTrajectory

TWO_PI = 2.0 * math.pi

# Row index of each two-qutrit basis state |ab> is 3*a + b.
COMPUTATIONAL = (0, 1, 3, 4)
_BLOCK_INDICES = {Block.ONE_EXCITATION: (1, 3), Block.TWO_EXCITATION: (2, 4, 6)}


@dataclass(frozen=True)
class BlockState:
    block: Block
    amplitudes: np.ndarray

    @classmethod
    def basis(cls, block: Block, label: str) -> "BlockState":
        amps = np.zeros(block.dim, dtype=complex)
        amps[block.labels.index(label)] = 1.0
        return cls(block, amps)

    def population(self, label: str) -> float:
        return float(abs(self.amplitudes[self.block.labels.index(label)]) ** 2)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class PropagationResult:
    final_1ex: BlockState
    final_2ex: BlockState
    eps_swap: float
    eps_leak: float
    history: np.ndarray | None = None  # columns: t_ns, p01, p10, p11, p02, p20


def _expm_hermitian(k: np.ndarray) -> np.ndarray:
    """exp(-i K) for a stack of Hermitian matrices via eigendecomposition."""
    w, v = np.linalg.eigh(k)
    return (v * np.exp(-1j * w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def step_unitaries(trajectory: SampledTrajectory, device: DeviceParams, block: Block) -> np.ndarray:
    """Stack of per-step propagators, each covering two grid intervals."""
    d = block.dim
    if trajectory.n_steps == 0:
        return np.eye(d, dtype=complex)[None]
    if trajectory.n_steps % 2:
        raise ValueError("trajectory must have an even number of intervals")
    h = block_matrices(block, device, trajectory.f_a, trajectory.f_b)
    h_start, h_mid, h_end = h[0:-1:2], h[1::2], h[2::2]
    step = 2.0 * trajectory.dt
    comm = h_end @ h_start - h_start @ h_end
    k = (TWO_PI * step / 6.0) * (h_start + 4.0 * h_mid + h_end) - 1j * (TWO_PI * step) ** 2 / 12.0 * comm
    return _expm_hermitian(k)


def _ordered_product(unitaries: np.ndarray) -> np.ndarray:
    # Pairwise reduction with later times on the left.
    u = unitaries
    while len(u) > 1:
        if len(u) % 2:
            u = np.concatenate([u, np.eye(u.shape[-1], dtype=complex)[None]])
        u = u[1::2] @ u[0::2]
    return u[0]


def block_propagator(trajectory: SampledTrajectory, device: DeviceParams, block: Block) -> np.ndarray:
    return _ordered_product(step_unitaries(trajectory, device, block))


def evolve_block(
    trajectory: SampledTrajectory,
    device: DeviceParams,
    block: Block,
    psi0: BlockState,
    dt: float | None = None,
) -> BlockState:
    if dt is not None and not math.isclose(dt, trajectory.dt, rel_tol=1e-9):
        raise ValueError(f"dt={dt} does not match the trajectory sampling ({trajectory.dt})")
    if psi0.block is not block:
        raise ValueError("initial state belongs to a different block")
    if abs(psi0.norm - 1.0) > 1e-9:
        raise ValueError(f"initial state is not normalized (norm={psi0.norm})")
    u = block_propagator(trajectory, device, block)
    return BlockState(block, u @ psi0.amplitudes)


def swap_error(trajectory: SampledTrajectory, device: DeviceParams) -> float:
    """1 - P(|10>) after starting in |01>."""
    u = block_propagator(trajectory, device, Block.ONE_EXCITATION)
    return float(min(1.0, max(0.0, 1.0 - abs(u[1, 0]) ** 2)))


def leakage_error(trajectory: SampledTrajectory, device: DeviceParams) -> float:
    """Population of |02> and |20> after starting in |11>."""
    u = block_propagator(trajectory, device, Block.TWO_EXCITATION)
    return float(min(1.0, abs(u[0, 1]) ** 2 + abs(u[2, 1]) ** 2))


def _history(trajectory, device, psi1, psi2) -> np.ndarray:
    u1 = step_unitaries(trajectory, device, Block.ONE_EXCITATION)
    u2 = step_unitaries(trajectory, device, Block.TWO_EXCITATION)
    n = len(u1) if trajectory.n_steps else 0
    rows = np.empty((n + 1, 6))
    times = np.linspace(0.0, trajectory.total_time, n + 1)
    for i in range(n + 1):
        p1, p2 = np.abs(psi1) ** 2, np.abs(psi2) ** 2
        rows[i] = (times[i], p1[0], p1[1], p2[1], p2[0], p2[2])
        if i < n:
            psi1 = u1[i] @ psi1
            psi2 = u2[i] @ psi2
    return rows


def propagate(trajectory: SampledTrajectory, device: DeviceParams, history: bool = False) -> PropagationResult:
    """Evolve |01> and |11> and report both error channels."""
    start1 = BlockState.basis(Block.ONE_EXCITATION, "01")
    start2 = BlockState.basis(Block.TWO_EXCITATION, "11")
    final1 = evolve_block(trajectory, device, Block.ONE_EXCITATION, start1)
    final2 = evolve_block(trajectory, device, Block.TWO_EXCITATION, start2)
    eps_swap = min(1.0, max(0.0, 1.0 - final1.population("10")))
    eps_leak = min(1.0, final2.population("02") + final2.population("20"))
    hist = _history(trajectory, device, start1.amplitudes, start2.amplitudes) if history else None
    return PropagationResult(final1, final2, eps_swap, eps_leak, hist)


def ideal_swap_prob(g: float, t: float) -> float:
    """Transferred population sin^2(2 pi g t) for an instantaneous resonant pulse."""
    if g < 0 or t < 0:
        raise ValueError("g and t must be non-negative")
    return math.sin(TWO_PI * g * t) ** 2


def ideal_leakage(g: float, eta: float, t: float) -> float:
    """Bright-state population after a rectangular resonant pulse (equal nonlinearities)."""
    if not eta > 0 or g < 0 or t < 0:
        raise ValueError("need eta > 0, g >= 0, t >= 0")
    omega = math.sqrt(eta**2 + 16 * g**2)
    return 16 * g**2 / omega**2 * math.sin(math.pi * omega * t) ** 2


def sync_coupling(eta: float, n: int) -> float:
    """Coupling at which the full swap coincides with the n-th leakage zero."""
    if int(n) != n or n < 2:
        raise ValueError(f"synchronization order must be an integer >= 2, got {n}")
    return eta / (4.0 * math.sqrt(n * n - 1))


def _idle_energies(f_a: float, f_b: float, device: DeviceParams) -> np.ndarray:
    levels_a = np.array([0.0, f_a, 2 * f_a - device.qubit_a.eta])
    levels_b = np.array([0.0, f_b, 2 * f_b - device.qubit_b.eta])
    return (levels_a[:, None] + levels_b[None, :]).ravel()


def full_unitary(trajectory: SampledTrajectory, device: DeviceParams) -> np.ndarray:
    """9x9 two-qutrit propagator in the frame rotating at the idle frequencies.

    States with three or more excitations are not simulated and are left
    untouched (identity).
    """
    u = np.eye(9, dtype=complex)
    for block, idx in _BLOCK_INDICES.items():
        u[np.ix_(idx, idx)] = block_propagator(trajectory, device, block)
    energies = _idle_energies(trajectory.f_a[0], trajectory.f_b[0], device)
    frame = np.exp(1j * TWO_PI * energies * trajectory.total_time)
    frame[[5, 7, 8]] = 1.0
    return frame[:, None] * u


def effective_unitary(trajectory: SampledTrajectory, device: DeviceParams) -> np.ndarray:
    """Computational-subspace block (|00>, |01>, |10>, |11>) of the rotating-frame propagator.

    The result is sub-unitary whenever population leaks to |02> or |20>.
    """
    u = full_unitary(trajectory, device)
    return u[np.ix_(COMPUTATIONAL, COMPUTATIONAL)]

