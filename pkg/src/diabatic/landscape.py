"""Swap/leakage error landscapes, synchronization points and gate tune-up."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from diabatic.device import OPERATING_BAND, DeviceParams, coupling_at
from diabatic.optimize import nelder_mead
from diabatic.propagator import leakage_error, swap_error, sync_coupling
from diabatic.pulse import TrapezoidPulse, rectangular, sample

AXES = {
    "interaction_freq": ("f_interact", "GHz"),
    "overshoot": ("overshoot", "GHz"),
    "hold_time": ("t_hold", "ns"),
}


@dataclass(frozen=True)
class SweepSpec:
    axis_x: str
    axis_y: str
    x_range: tuple[float, float, int]
    y_range: tuple[float, float, int]
    template: TrapezoidPulse

    def __post_init__(self):
        for axis in (self.axis_x, self.axis_y):
            if axis not in AXES:
                raise ValueError(f"unknown sweep axis {axis!r}; expected one of {sorted(AXES)}")
        if self.axis_x == self.axis_y:
            raise ValueError("sweep axes must differ")
        for lo, hi, steps in (self.x_range, self.y_range):
            if int(steps) != steps or steps < 1:
                raise ValueError(f"steps must be a positive integer, got {steps}")
            if steps > 1 and not hi > lo:
                raise ValueError("axis range needs max > min")

    @property
    def x_values(self) -> np.ndarray:
        lo, hi, n = self.x_range
        return np.linspace(lo, hi, int(n))

    @property
    def y_values(self) -> np.ndarray:
        lo, hi, n = self.y_range
        return np.linspace(lo, hi, int(n))

    def pulse_at(self, x: float, y: float) -> TrapezoidPulse:
        return self.template.with_(**{AXES[self.axis_x][0]: float(x), AXES[self.axis_y][0]: float(y)})


@dataclass(frozen=True)
class ErrorGrid:
    """Errors on a rectangular grid; ``eps_swap[i, j]`` belongs to (x_values[i], y_values[j])."""

    axis_x: str
    axis_y: str
    x_values: np.ndarray
    y_values: np.ndarray
    eps_swap: np.ndarray
    eps_leak: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.eps_swap + self.eps_leak

    def rows(self):
        for i, x in enumerate(self.x_values):
            for j, y in enumerate(self.y_values):
                yield x, y, self.eps_swap[i, j], self.eps_leak[i, j]


def _errors(pulse: TrapezoidPulse, device: DeviceParams, dt: float) -> tuple[float, float]:
    traj = sample(pulse, dt)
    return swap_error(traj, device), leakage_error(traj, device)


def sweep(spec: SweepSpec, device: DeviceParams, dt: float = 0.005, threads: int = 1) -> ErrorGrid:
    """Evaluate both error channels on every grid point.

    Points that fail (for instance an out-of-range pulse) are stored as NaN.
    """
    xs, ys = spec.x_values, spec.y_values
    swap = np.full((len(xs), len(ys)), np.nan)
    leak = np.full_like(swap, np.nan)

    def work(ij):
        i, j = ij
        try:
            swap[i, j], leak[i, j] = _errors(spec.pulse_at(xs[i], ys[j]), device, dt)
        except (ValueError, np.linalg.LinAlgError):
            pass

    points = [(i, j) for i in range(len(xs)) for j in range(len(ys))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, points))
    else:
        for p in points:
            work(p)
    return ErrorGrid(spec.axis_x, spec.axis_y, xs, ys, swap, leak)


def hold_trace(template: TrapezoidPulse, device: DeviceParams, holds: Sequence[float], dt: float = 0.005):
    """Swap and leakage errors versus hold time, all other pulse parameters fixed."""
    holds = np.asarray(holds, dtype=float)
    out = np.array([_errors(template.with_(t_hold=float(t)), device, dt) for t in holds])
    return holds, out[:, 0], out[:, 1]


@dataclass(frozen=True)
class Dip:
    x: float
    value: float


def find_dips(x, y) -> list[Dip]:
    """Interior local minima refined by the parabola through each minimum and its neighbours."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3 or len(x) != len(y):
        raise ValueError("need at least three (x, y) samples of equal length")
    dips = []
    for i in range(1, len(x) - 1):
        if not (y[i] < y[i - 1] and y[i] <= y[i + 1]):
            continue
        x0, x1, x2 = x[i - 1 : i + 2]
        y0, y1, y2 = y[i - 1 : i + 2]
        # Newton form of the interpolating parabola.
        d01 = (y1 - y0) / (x1 - x0)
        d12 = (y2 - y1) / (x2 - x1)
        curv = (d12 - d01) / (x2 - x0)
        if curv <= 0:
            dips.append(Dip(float(x1), float(y1)))
            continue
        xv = 0.5 * (x0 + x1) - d01 / (2 * curv)
        yv = y0 + d01 * (xv - x0) + curv * (xv - x0) * (xv - x1)
        dips.append(Dip(float(xv), float(yv)))
    return sorted(dips, key=lambda d: d.x)


@dataclass(frozen=True)
class SyncPoint:
    n: int
    interaction_freq: float
    hold_time: float
    coupling: float
    residual_swap: float
    residual_leak: float
    within_tolerance: bool

    def to_dict(self):
        return asdict(self)


def sync_spectrum(
    device: DeviceParams,
    freq_range: tuple[float, float] = OPERATING_BAND,
    n_range: Sequence[int] = range(2, 11),
    dt: float = 0.005,
    tolerance: float = 1e-3,
) -> list[SyncPoint]:
    """Frequencies where a rectangular resonant swap lands on the n-th leakage zero.

    The root is found with the mean nonlinearity of the two qubits; the
    residual errors are then checked by propagating the rectangular pulse
    on the actual device, so dissimilar nonlinearities show up as residual
    leakage and a cleared ``within_tolerance`` flag.
    """
    eta_eff = 0.5 * (device.qubit_a.eta + device.qubit_b.eta)
    lo, hi = freq_range
    points = []
    for n in n_range:
        g_target = sync_coupling(eta_eff, n)

        def mismatch(f):
            return coupling_at(device.coupling, f, f) - g_target

        if mismatch(lo) * mismatch(hi) > 0:
            continue
        f = bisect(mismatch, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=200)
        g = coupling_at(device.coupling, f, f)
        hold = 1.0 / (4.0 * g)
        traj = rectangular(f, f, hold, dt)
        rs, rl = swap_error(traj, device), leakage_error(traj, device)
        points.append(SyncPoint(int(n), float(f), hold, g, rs, rl, bool(max(rs, rl) < tolerance)))
    return points


@dataclass(frozen=True)
class TuneResult:
    interaction_freq: float
    t_hold: float
    overshoot: float
    eps_swap: float
    eps_leak: float
    iterations: int
    converged: bool
    initial_objective: float

    @property
    def objective(self) -> float:
        return self.eps_swap + self.eps_leak

    def pulse(self, template: TrapezoidPulse) -> TrapezoidPulse:
        return template.with_(f_interact=self.interaction_freq, t_hold=self.t_hold, overshoot=self.overshoot)

    def to_dict(self):
        out = asdict(self)
        out["objective"] = self.objective
        return out


def optimize(
    device: DeviceParams,
    template: TrapezoidPulse,
    interaction_freq: float | None = None,
    initial: tuple[float, float] | None = None,
    dt: float = 0.005,
    max_iter: int = 400,
) -> TuneResult:
    """Minimize eps_swap + eps_leak over (t_hold, overshoot) at one interaction frequency."""
    f_int = template.f_interact if interaction_freq is None else float(interaction_freq)
    base = template.with_(f_interact=f_int)
    if initial is None:
        initial = (base.t_hold, base.overshoot)
    if initial[0] < 0 or abs(initial[1]) >= 0.5:
        raise ValueError("initial point outside physical bounds")

    def objective(x):
        t_hold, overshoot = x
        if t_hold < 0 or abs(overshoot) >= 0.5:
            return 10.0 + abs(min(t_hold, 0.0)) + abs(overshoot)
        s, l = _errors(base.with_(t_hold=float(t_hold), overshoot=float(overshoot)), device, dt)
        return s + l

    start = objective(np.asarray(initial, dtype=float))
    res = nelder_mead(objective, initial, max_iter=max_iter, tol_x=1e-7, tol_f=1e-12, step=(0.5, 0.002))
    t_hold, overshoot = (float(v) for v in res.x)
    s, l = _errors(base.with_(t_hold=t_hold, overshoot=overshoot), device, dt)
    return TuneResult(f_int, t_hold, overshoot, s, l, res.iterations, res.converged, start)


def tune(
    device: DeviceParams,
    template: TrapezoidPulse,
    freq_window: tuple[float, float],
    initial: tuple[float, float] | None = None,
    dt: float = 0.01,
    final_dt: float = 0.005,
) -> TuneResult:
    """Pick the interaction frequency in ``freq_window`` whose (t_hold, overshoot) optimum is lowest.

    The inner two-parameter optimization is warm-started from the previous
    frequency's optimum; a coarse ``dt`` is used during the search and the
    winner is re-optimized at ``final_dt``.
    """
    state = {"x": initial if initial is not None else (template.t_hold, template.overshoot)}

    def inner(f):
        r = optimize(device, template, f, state["x"], dt=dt)
        state["x"] = (r.t_hold, r.overshoot)
        return r.objective

    lo, hi = freq_window
    best = minimize_scalar(inner, bounds=(lo, hi), method="bounded", options={"xatol": 1e-3})
    return optimize(device, template, float(best.x), state["x"], dt=final_dt)

