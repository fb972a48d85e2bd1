"""Two-transmon device parameters and photon-conserving block Hamiltonians.

All frequencies are cyclic (GHz) and times are in ns; the 2*pi factor is
applied only by the propagator. Each transmon is truncated at |2>, and the
rotating-wave approximation keeps the excitation number conserved, so the
dynamics splits into the blocks

    one excitation:  (|01>, |10>)
    two excitations: (|02>, |11>, |20>)

where the left label is qubit A and the right label is qubit B.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Any, Mapping

import numpy as np

OPERATING_BAND = (4.0, 7.0)  # GHz


class Block(enum.Enum):
    ONE_EXCITATION = 1
    TWO_EXCITATION = 2

    @property
    def dim(self) -> int:
        return 2 if self is Block.ONE_EXCITATION else 3

    @property
    def labels(self) -> tuple[str, ...]:
        if self is Block.ONE_EXCITATION:
            return ("01", "10")
        return ("02", "11", "20")


@dataclass(frozen=True)
class QubitParams:
    f_max: float
    eta: float
    t1: float | None = None
    tphi: float | None = None

    def __post_init__(self):
        if not self.f_max > 0:
            raise ValueError(f"f_max must be positive, got {self.f_max}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        for name in ("t1", "tphi"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive when given, got {value}")


@dataclass(frozen=True)
class CouplingModel:
    """Capacitive coupling that scales linearly with frequency.

    ``g_ref`` is the coupling (GHz) when both qubits sit at ``omega_ref``.
    """

    g_ref: float
    omega_ref: float

    def __post_init__(self):
        if not (self.g_ref > 0 and self.omega_ref > 0):
            raise ValueError("g_ref and omega_ref must be positive")


@dataclass(frozen=True)
class DeviceParams:
    qubit_a: QubitParams
    qubit_b: QubitParams
    coupling: CouplingModel

    def __post_init__(self):
        lo, hi = OPERATING_BAND
        if not (coupling_at(self.coupling, lo, lo) > 0 and coupling_at(self.coupling, hi, hi) > 0):
            raise ValueError("coupling must be positive over the operating band")

    def coupling_at(self, f_a, f_b):
        return coupling_at(self.coupling, f_a, f_b)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DeviceParams":
        try:
            return cls(
                qubit_a=QubitParams(**data["qubit_a"]),
                qubit_b=QubitParams(**data["qubit_b"]),
                coupling=CouplingModel(**data["coupling"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed device description: {exc}") from exc


def reference_device(t1: float | None = 20_000.0, tphi: float | None = None) -> DeviceParams:
    """Qubit pair with f_max 6.28/6.16 GHz, eta 223/240 MHz and 16.2 MHz coupling at 6 GHz."""
    return DeviceParams(
        qubit_a=QubitParams(f_max=6.28, eta=0.223, t1=t1, tphi=tphi),
        qubit_b=QubitParams(f_max=6.16, eta=0.240, t1=t1, tphi=tphi),
        coupling=CouplingModel(g_ref=0.0162, omega_ref=6.0),
    )


def coupling_at(model: CouplingModel, f_a, f_b):
    """Coupling strength at qubit frequencies ``f_a``, ``f_b`` (GHz).

    For detuned qubits the geometric mean of the two frequencies plays the
    role of the single frequency in g = omega * C_c / 2C. Accepts arrays.
    """
    f_a = np.asarray(f_a, dtype=float)
    f_b = np.asarray(f_b, dtype=float)
    if np.any(f_a <= 0) or np.any(f_b <= 0):
        raise ValueError("qubit frequencies must be positive")
    g = model.g_ref * np.sqrt(f_a * f_b) / model.omega_ref
    return float(g) if g.ndim == 0 else g


@dataclass(frozen=True)
class BlockHamiltonian:
    block: Block
    matrix: np.ndarray

    def __post_init__(self):
        d = self.block.dim
        if self.matrix.shape != (d, d):
            raise ValueError(f"{self.block.name} block must be {d}x{d}")
        if np.max(np.abs(self.matrix - self.matrix.conj().T)) > 1e-12:
            raise ValueError("block Hamiltonian is not Hermitian")


def hamiltonian_1ex(f_a: float, f_b: float, g: float) -> BlockHamiltonian:
    if g < 0:
        raise ValueError("g must be non-negative")
    m = np.array([[f_b, g], [g, f_a]], dtype=complex)
    return BlockHamiltonian(Block.ONE_EXCITATION, m)


def hamiltonian_2ex(f_a: float, f_b: float, eta_a: float, eta_b: float, g: float) -> BlockHamiltonian:
    if g < 0:
        raise ValueError("g must be non-negative")
    if not (eta_a > 0 and eta_b > 0):
        raise ValueError("nonlinearities must be positive")
    s = math.sqrt(2.0) * g
    m = np.array(
        [
            [2 * f_b - eta_b, s, 0.0],
            [s, f_a + f_b, s],
            [0.0, s, 2 * f_a - eta_a],
        ],
        dtype=complex,
    )
    return BlockHamiltonian(Block.TWO_EXCITATION, m)


def block_matrices(block: Block, device: DeviceParams, f_a, f_b) -> np.ndarray:
    """Stack of real block Hamiltonians, shape (n, d, d), for frequency series."""
    f_a = np.atleast_1d(np.asarray(f_a, dtype=float))
    f_b = np.atleast_1d(np.asarray(f_b, dtype=float))
    g = np.atleast_1d(coupling_at(device.coupling, f_a, f_b))
    n = f_a.shape[0]
    if block is Block.ONE_EXCITATION:
        h = np.zeros((n, 2, 2))
        h[:, 0, 0] = f_b
        h[:, 1, 1] = f_a
        h[:, 0, 1] = h[:, 1, 0] = g
        return h
    eta_a, eta_b = device.qubit_a.eta, device.qubit_b.eta
    s = math.sqrt(2.0) * g
    h = np.zeros((n, 3, 3))
    h[:, 0, 0] = 2 * f_b - eta_b
    h[:, 1, 1] = f_a + f_b
    h[:, 2, 2] = 2 * f_a - eta_a
    h[:, 0, 1] = h[:, 1, 0] = s
    h[:, 1, 2] = h[:, 2, 1] = s
    return h


def bright_dark_basis() -> tuple[np.ndarray, np.ndarray]:
    """Bright and dark states in the (|02>, |11>, |20>) basis."""
    r = 1.0 / math.sqrt(2.0)
    bright = np.array([r, 0.0, r], dtype=complex)
    dark = np.array([-r, 0.0, r], dtype=complex)
    return bright, dark
