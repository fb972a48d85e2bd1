"""Rounded-trapezoid frequency trajectories for the two qubits.

Both qubits are steered simultaneously from their idle frequencies to the
interaction frequency and back. The rise and fall are error-function
steps of width ``smoothing_sigma`` centred ``t_hold`` apart, so the hold
time is measured between ramp midpoints. The overshoot is split evenly:
qubit A holds at ``f_interact + overshoot/2`` and qubit B at
``f_interact - overshoot/2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Mapping

import numpy as np
from scipy.special import erf


@dataclass(frozen=True)
class TrapezoidPulse:
    f_idle_a: float
    f_idle_b: float
    f_interact: float
    overshoot: float = 0.0
    t_ramp: float = 5.0
    t_hold: float = 15.0
    smoothing_sigma: float = 1.0

    def __post_init__(self):
        if self.t_hold < 0:
            raise ValueError("t_hold must be non-negative")
        if not self.t_ramp > 0:
            raise ValueError("t_ramp must be positive")
        if self.smoothing_sigma < 0:
            raise ValueError("smoothing_sigma must be non-negative")
        if not abs(self.overshoot) < 0.5:
            raise ValueError("|overshoot| must stay below 0.5 GHz")

    @property
    def total_time(self) -> float:
        return 2 * self.t_ramp + self.t_hold

    @property
    def plateau(self) -> tuple[float, float]:
        """Hold frequencies of qubits A and B."""
        return (self.f_interact + self.overshoot / 2, self.f_interact - self.overshoot / 2)

    def with_(self, **changes) -> "TrapezoidPulse":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TrapezoidPulse":
        try:
            return cls(**data)
        except TypeError as exc:
            raise ValueError(f"malformed pulse description: {exc}") from exc


@dataclass(frozen=True)
class SampledTrajectory:
    """Frequencies of both qubits on a uniform grid that includes both endpoints."""

    dt: float
    f_a: np.ndarray
    f_b: np.ndarray
    total_time: float

    def __post_init__(self):
        if self.f_a.shape != self.f_b.shape or self.f_a.ndim != 1:
            raise ValueError("f_a and f_b must be equal-length 1D series")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.total_time, len(self.f_a))

    @property
    def n_steps(self) -> int:
        return len(self.f_a) - 1

    def reversed(self) -> "SampledTrajectory":
        return SampledTrajectory(self.dt, self.f_a[::-1].copy(), self.f_b[::-1].copy(), self.total_time)


def _grid(total_time: float, dt: float) -> tuple[np.ndarray, float]:
    # The propagator integrates over pairs of intervals, so the count is even.
    if total_time == 0:
        return np.zeros(1), dt
    n = max(2, math.ceil(total_time / dt - 1e-9))
    n += n % 2
    return np.linspace(0.0, total_time, n + 1), total_time / n


def _window(t: np.ndarray, t_on: float, t_off: float, sigma: float) -> np.ndarray:
    if sigma < 1e-9:  # sharp edges; also avoids overflow for denormal widths
        return 0.5 * (np.sign(t - t_on) - np.sign(t - t_off))
    s = math.sqrt(2.0) * sigma
    return 0.5 * (erf((t - t_on) / s) - erf((t - t_off) / s))


def envelope(pulse: TrapezoidPulse, t) -> np.ndarray:
    """Normalized pulse envelope: exactly 0 at both ends, about 1 on the plateau."""
    t = np.asarray(t, dtype=float)
    t_on, t_off = pulse.t_ramp, pulse.t_ramp + pulse.t_hold
    w = _window(t, t_on, t_off, pulse.smoothing_sigma)
    # erf tails leave a small residue at t=0 and t=T; remove it so the endpoints sit at idle.
    edge = _window(np.array(0.0), t_on, t_off, pulse.smoothing_sigma)
    return (w - edge) / (1.0 - edge)


def sample(pulse: TrapezoidPulse, dt: float = 0.005) -> SampledTrajectory:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > pulse.t_ramp / 10:
        raise ValueError(f"dt={dt} ns is too coarse to resolve a {pulse.t_ramp} ns ramp")
    t, step = _grid(pulse.total_time, dt)
    w = envelope(pulse, t)
    target_a, target_b = pulse.plateau
    f_a = pulse.f_idle_a + (target_a - pulse.f_idle_a) * w
    f_b = pulse.f_idle_b + (target_b - pulse.f_idle_b) * w
    f_a[0] = f_a[-1] = pulse.f_idle_a
    f_b[0] = f_b[-1] = pulse.f_idle_b
    return SampledTrajectory(step, f_a, f_b, pulse.total_time)


def rectangular(f_a: float, f_b: float, t_hold: float, dt: float = 0.005) -> SampledTrajectory:
    """Constant frequencies for ``t_hold`` ns: qubits are placed at (f_a, f_b) instantly."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_hold < 0:
        raise ValueError("t_hold must be non-negative")
    t, step = _grid(t_hold, dt)
    return SampledTrajectory(step, np.full(t.shape, float(f_a)), np.full(t.shape, float(f_b)), float(t_hold))
