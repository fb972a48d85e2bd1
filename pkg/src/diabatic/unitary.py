"""Five-angle photon-conserving two-qubit unitary, its fit, and error conversions.

The unitary is the ordered product

    exp(-i(IZ-ZI) d_a/4) exp(-i(XX+YY) theta/2) exp(-i ZZ phi/4)
        exp(-i(IZ-ZI) d_b/4) exp(-i(IZ+ZI) d_plus/4)

with d_b = (d_c + d_d)/2 and d_a = (d_c - d_d)/2, in the basis
(|00>, |01>, |10>, |11>) with qubit A on the left.

Angles are not unique. Up to a global phase the matrix is unchanged by

    (theta, d_d)        -> (-theta, d_d + 2pi)
    (theta, d_c)        -> (pi - theta, d_c + 2pi)
    (theta, phi)        -> (theta + pi, phi + 2pi)
    (phi, d_plus)       -> (phi + 2pi, d_plus + 2pi)
    any single angle    -> angle + 4pi

``FsimAngles.canonical`` picks the representative with theta in [0, pi/2],
phi and d_c in (-pi, pi], and d_plus and d_d in (-2pi, 2pi].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from diabatic.optimize import nelder_mead

TWO_PI = 2.0 * math.pi
_NAMES = ("theta", "phi", "delta_plus", "delta_c", "delta_d")
# Gauge periods used when comparing angle sets component by component.
PERIODS = {"theta": math.pi, "phi": TWO_PI, "delta_plus": 2 * TWO_PI, "delta_c": TWO_PI, "delta_d": 2 * TWO_PI}


def _wrap(x: float, half_width: float) -> float:
    """Map x into (-half_width, half_width]."""
    period = 2 * half_width
    y = math.fmod(x + half_width, period)
    if y <= 0:
        y += period
    return y - half_width


@dataclass(frozen=True)
class FsimAngles:
    theta: float = 0.0
    phi: float = 0.0
    delta_plus: float = 0.0
    delta_c: float = 0.0
    delta_d: float = 0.0

    @property
    def delta_a(self) -> float:
        return (self.delta_c - self.delta_d) / 2

    @property
    def delta_b(self) -> float:
        return (self.delta_c + self.delta_d) / 2

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.phi, self.delta_plus, self.delta_c, self.delta_d])

    @classmethod
    def from_array(cls, x) -> "FsimAngles":
        return cls(*(float(v) for v in x))

    def to_dict(self) -> dict[str, float]:
        return dict(zip(_NAMES, (float(v) for v in self.as_array())))

    def canonical(self) -> "FsimAngles":
        theta, phi, dp, dc, dd = (float(v) for v in self.as_array())
        theta = _wrap(theta, math.pi)
        if theta < 0:
            theta, dd = -theta, dd + TWO_PI
        if theta > math.pi / 2:
            theta, dc = math.pi - theta, dc + TWO_PI
        k = math.ceil((dc - math.pi) / TWO_PI)
        dc, dd, phi = dc - k * TWO_PI, dd - k * TWO_PI, phi - k * TWO_PI
        k = math.ceil((phi - math.pi) / TWO_PI)
        phi, dp = phi - k * TWO_PI, dp - k * TWO_PI
        dp = _wrap(dp, TWO_PI)
        dd = _wrap(dd, TWO_PI)
        return FsimAngles(theta, phi, dp, dc, dd)


def angle_errors(a: FsimAngles, b: FsimAngles) -> dict[str, float]:
    """Componentwise distance between the canonical forms of two angle sets."""
    ca, cb = a.canonical().as_array(), b.canonical().as_array()
    out = {}
    for name, x, y in zip(_NAMES, ca, cb):
        p = PERIODS[name]
        d = abs(x - y) % p
        out[name] = min(d, p - d) if name != "theta" else abs(x - y)
    return out


def _diag(*phases) -> np.ndarray:
    return np.diag(np.exp(1j * np.asarray(phases)))


def build_unitary(angles: FsimAngles) -> np.ndarray:
    a = angles
    c, s = math.cos(a.theta), math.sin(a.theta)
    swap = np.array(
        [[1, 0, 0, 0], [0, c, -1j * s, 0], [0, -1j * s, c, 0], [0, 0, 0, 1]],
        dtype=complex,
    )
    # Diagonals of IZ - ZI = (0, -2, 2, 0), ZZ = (1, -1, -1, 1), IZ + ZI = (2, 0, 0, -2).
    phase_a = _diag(0, a.delta_a / 2, -a.delta_a / 2, 0)
    cond = _diag(-a.phi / 4, a.phi / 4, a.phi / 4, -a.phi / 4)
    phase_b = _diag(0, a.delta_b / 2, -a.delta_b / 2, 0)
    phase_plus = _diag(-a.delta_plus / 2, 0, 0, a.delta_plus / 2)
    return phase_a @ swap @ cond @ phase_b @ phase_plus


def infidelity(target: np.ndarray, model: np.ndarray) -> float:
    """1 - |Tr(V^dag U)|^2 / 16, insensitive to global phase."""
    overlap = np.trace(model.conj().T @ target)
    return float(1.0 - abs(overlap) ** 2 / 16.0)


def conditional_phase(u: np.ndarray) -> float:
    """arg U00 + arg U33 - arg U11 - arg U22, wrapped to (-pi, pi]."""
    total = np.angle(u[0, 0]) + np.angle(u[3, 3]) - np.angle(u[1, 1]) - np.angle(u[2, 2])
    return _wrap(float(total), math.pi)


def estimate_angles(u: np.ndarray) -> FsimAngles:
    """Closed-form angle estimate from matrix elements, used to seed the fit."""
    theta = math.atan2(abs(u[1, 2]) + abs(u[2, 1]), abs(u[1, 1]) + abs(u[2, 2]))
    delta_plus = float(np.angle(u[3, 3] / u[0, 0])) if abs(u[0, 0] * u[3, 3]) > 0 else 0.0
    phi = float(np.angle(u[1, 1] * u[2, 2] / (u[0, 0] * u[3, 3]))) if abs(u[1, 1] * u[2, 2]) > 1e-12 else 0.0
    delta_c = float(np.angle(u[1, 1] / u[2, 2])) if abs(u[1, 1] * u[2, 2]) > 1e-12 else 0.0
    delta_d = float(np.angle(u[2, 1] / u[1, 2])) if abs(u[1, 2] * u[2, 1]) > 1e-12 else 0.0
    # Phase ratios fix these angles mod 2pi but the matrix depends on them mod 4pi.
    candidates = [
        FsimAngles(theta, phi, delta_plus + i * TWO_PI, delta_c + j * TWO_PI, delta_d + k * TWO_PI)
        for i in (0, 1)
        for j in (0, 1)
        for k in (0, 1)
    ]
    return min(candidates, key=lambda a: infidelity(u, build_unitary(a)))


_OFF_BLOCK = np.ones((4, 4), dtype=bool)
_OFF_BLOCK[0, 0] = _OFF_BLOCK[3, 3] = False
_OFF_BLOCK[1:3, 1:3] = False


@dataclass(frozen=True)
class FitResult:
    angles: FsimAngles
    residual: float
    iterations: int
    converged: bool
    photon_conserving: bool = True
    weak_angles: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = self.angles.to_dict()
        out.update(
            residual=self.residual,
            iterations=self.iterations,
            converged=self.converged,
            photon_conserving=self.photon_conserving,
            weak_angles=list(self.weak_angles),
        )
        return out


def weakly_constrained(theta: float, threshold: float = 0.1) -> tuple[str, ...]:
    """Angles the fit barely constrains: delta_c near a full swap, delta_d near no swap."""
    weak = []
    if abs(math.cos(theta)) < threshold:
        weak.append("delta_c")
    if abs(math.sin(theta)) < threshold:
        weak.append("delta_d")
    return tuple(weak)


def fit_unitary(
    target,
    initial: FsimAngles | None = None,
    *,
    max_iter: int = 20_000,
    tol_x: float = 1e-11,
) -> FitResult:
    """Fit the five angles to a (possibly sub-unitary) 4x4 matrix.

    A target with off-block elements above 0.05 is not photon conserving;
    it is projected onto the photon-conserving pattern, fitted anyway, and
    the result is flagged.
    """
    u = np.array(target, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError(f"target must be 4x4, got {u.shape}")
    conserving = bool(np.max(np.abs(u[_OFF_BLOCK]), initial=0.0) < 0.05)
    if not conserving:
        warnings.warn("target is not photon conserving; fitting its projection", stacklevel=2)
        u = np.where(_OFF_BLOCK, 0.0, u)
    if initial is None:
        initial = estimate_angles(u)

    def objective(x):
        return infidelity(u, build_unitary(FsimAngles.from_array(x)))

    res = nelder_mead(objective, initial.as_array(), max_iter=max_iter, tol_x=tol_x, tol_f=0.0, step=0.1, restarts=4)
    angles = FsimAngles.from_array(res.x).canonical()
    return FitResult(
        angles=angles,
        residual=max(0.0, res.fun),
        iterations=res.iterations,
        converged=res.converged,
        photon_conserving=conserving,
        weak_angles=weakly_constrained(angles.theta),
    )


@dataclass(frozen=True)
class ErrorMetrics:
    p: float
    r: float
    r_pauli: float
    fidelity: float
    dimension: int


def error_metrics(p: float, n_qubits: int) -> ErrorMetrics:
    """Average and Pauli error from a depolarizing decay parameter, N = 2**n_qubits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"decay parameter must lie in [0, 1], got {p}")
    n = 2**n_qubits
    r = (n - 1) / n * (1 - p)
    return ErrorMetrics(p=p, r=r, r_pauli=(n + 1) / n * r, fidelity=1 - r, dimension=n)


def metrics_from_pauli(r_pauli: float, n_qubits: int) -> ErrorMetrics:
    """Inverse of ``error_metrics``: start from a Pauli error."""
    n = 2**n_qubits
    r = n / (n + 1) * r_pauli
    return error_metrics(1 - r * n / (n - 1), n_qubits)


def gate_error_from_cycle(r_cycle_pauli: float, r_qa_pauli: float, r_qb_pauli: float) -> float:
    """Two-qubit gate Pauli error after dividing out both single-qubit gates of a cycle."""
    for value in (r_cycle_pauli, r_qa_pauli, r_qb_pauli):
        if not 0.0 <= value < 1.0:
            raise ValueError(f"Pauli errors must lie in [0, 1), got {value}")
    r_gate = 1.0 - (1.0 - r_cycle_pauli) / ((1.0 - r_qa_pauli) * (1.0 - r_qb_pauli))
    if r_gate < 0:
        warnings.warn(
            f"cycle error {r_cycle_pauli:.3g} is below the single-qubit product; clamping gate error to 0",
            stacklevel=2,
        )
        return 0.0
    return r_gate
