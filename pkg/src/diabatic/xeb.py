"""Cross-entropy benchmarking on one qutrit or a pair of qutrits.

Random circuits alternate a layer of single-qubit pi/2 rotations with the
two-qubit gate and end with one more single-qubit layer. Deeper circuits
are prefixes of one long circuit that share its final layer, so a single
pass produces every depth.

The noisy simulation tracks the full density operator of the qutrit
register. After the two-qubit gate, coherences between computational and
leaked states are dropped, so leakage accumulates incoherently. Each cycle
ends with a depolarizing channel on the computational subspace, if one is
requested, and then amplitude damping and dephasing for ``cycle_time``.
For bitstrings, level |2> reads out as 1.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from diabatic.optimize import nelder_mead
from diabatic.unitary import ErrorMetrics, FsimAngles, build_unitary, error_metrics, gate_error_from_cycle

_R = 1 / math.sqrt(2)
GATE_AXES = np.array(
    [
        (1, 0, 0),
        (-1, 0, 0),
        (0, 1, 0),
        (0, -1, 0),
        (_R, _R, 0),
        (-_R, -_R, 0),
        (_R, -_R, 0),
        (-_R, _R, 0),
    ]
)
_PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


def single_qubit_gates() -> np.ndarray:
    """The eight pi/2 rotations about +-X, +-Y and +-(X+-Y), shape (8, 2, 2)."""
    gen = np.einsum("ai,ijk->ajk", GATE_AXES, _PAULI)
    return math.cos(math.pi / 4) * np.eye(2) - 1j * math.sin(math.pi / 4) * gen


GATES = single_qubit_gates()
GATES_QUTRIT = np.zeros((8, 3, 3), dtype=complex)
GATES_QUTRIT[:, :2, :2] = GATES
GATES_QUTRIT[:, 2, 2] = 1.0


@dataclass(frozen=True)
class RandomCircuit:
    seed: Any
    n_qubits: int
    cycles: np.ndarray  # (m, n_qubits) gate indices
    final: np.ndarray  # (n_qubits,) gate indices

    @property
    def depth(self) -> int:
        return len(self.cycles)


def gen_circuit(seed, m: int, n_qubits: int = 2) -> RandomCircuit:
    """Uniformly random gate indices from a generator seeded with ``seed`` (int or int sequence)."""
    if m < 1:
        raise ValueError("a circuit needs at least one cycle")
    if n_qubits not in (1, 2):
        raise ValueError("only one- and two-qubit circuits are supported")
    rng = np.random.default_rng(seed)
    gates = rng.integers(0, 8, size=(m + 1, n_qubits))
    return RandomCircuit(seed, n_qubits, gates[:m], gates[m])


def circuit_family(base_seed: int, n_circuits: int, m: int, n_qubits: int = 2) -> list[RandomCircuit]:
    return [gen_circuit([base_seed, i], m, n_qubits) for i in range(n_circuits)]


def _check_depths(circuit: RandomCircuit, depths) -> list[int]:
    depths = [int(d) for d in depths]
    if any(d < 0 or d > circuit.depth for d in depths):
        raise ValueError(f"depths must lie in [0, {circuit.depth}]")
    return depths


def _layer(indices, gates) -> np.ndarray:
    u = gates[indices[0]]
    for i in indices[1:]:
        u = np.kron(u, gates[i])
    return u


def simulate_ideal(circuit: RandomCircuit, gate_angles: FsimAngles | None = None, depths=None) -> np.ndarray:
    """Exact output distributions; one row per requested depth (all cycles by default)."""
    single = depths is None
    depths = _check_depths(circuit, [circuit.depth] if single else depths)
    two_q = build_unitary(gate_angles or FsimAngles()) if circuit.n_qubits == 2 else None
    psi = np.zeros(2**circuit.n_qubits, dtype=complex)
    psi[0] = 1.0
    final = _layer(circuit.final, GATES)
    wanted = {d: k for k, d in enumerate(depths)}
    out = np.empty((len(depths), len(psi)))
    for m in range(circuit.depth + 1):
        if m in wanted:
            out[wanted[m]] = np.abs(final @ psi) ** 2
        if m == circuit.depth:
            break
        psi = _layer(circuit.cycles[m], GATES) @ psi
        if two_q is not None:
            psi = two_q @ psi
    return out[0] if single else out


@dataclass(frozen=True)
class NoiseModel:
    """Per-cycle noise. ``None`` for a T1 or Tphi means that channel is off.

    ``two_qubit_action`` is either ideal angles (applied on the computational
    subspace, identity on leaked states) or an explicit 9x9 two-qutrit
    unitary such as ``propagator.full_unitary``. ``extra_depolarizing`` is
    a Pauli error probability applied on the computational subspace.
    """

    t1_a: float | None = None
    t1_b: float | None = None
    tphi_a: float | None = None
    tphi_b: float | None = None
    cycle_time: float = 38.0
    two_qubit_action: FsimAngles | np.ndarray | None = None
    extra_depolarizing: float = 0.0

    def __post_init__(self):
        for name in ("t1_a", "t1_b", "tphi_a", "tphi_b"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.cycle_time < 0:
            raise ValueError("cycle_time must be non-negative")
        if not 0.0 <= self.extra_depolarizing <= 0.75:
            raise ValueError("extra_depolarizing must lie in [0, 0.75]")


def _amplitude_damping_kraus(t1: float | None, t: float) -> list[np.ndarray]:
    # |1> -> |0> at rate 1/T1 and |2> -> |1> at 2/T1.
    if t1 is None or t == 0:
        return [np.eye(3)]
    g1 = 1 - math.exp(-t / t1)
    g2 = 1 - math.exp(-2 * t / t1)
    k0 = np.diag([1.0, math.sqrt(1 - g1), math.sqrt(1 - g2)])
    k1 = np.zeros((3, 3))
    k1[0, 1] = math.sqrt(g1)
    k2 = np.zeros((3, 3))
    k2[1, 2] = math.sqrt(g2)
    return [k0, k1, k2]


def _dephasing_mask(tphi: float | None, t: float) -> np.ndarray:
    # Coherence between levels j and k decays as exp(-(j-k)^2 t / Tphi).
    lv = np.arange(3)
    if tphi is None:
        return np.ones((3, 3))
    return np.exp(-((lv[:, None] - lv[None, :]) ** 2) * t / tphi)


def _superop_kraus(kraus) -> np.ndarray:
    # Row-major vec: vec(K rho K^dag) = (K kron conj(K)) vec(rho).
    return sum(np.kron(k, k.conj()) for k in kraus)


def _leaked_mask(n_qubits: int) -> np.ndarray:
    levels = np.array(np.meshgrid(*[np.arange(3)] * n_qubits, indexing="ij")).reshape(n_qubits, -1)
    return np.any(levels == 2, axis=0)


def _computational_index(n_qubits: int) -> np.ndarray:
    return np.flatnonzero(~_leaked_mask(n_qubits))


def _readout_map(n_qubits: int) -> np.ndarray:
    """Matrix taking qutrit populations to bitstring probabilities (|2> read as 1)."""
    levels = np.array(np.meshgrid(*[np.arange(3)] * n_qubits, indexing="ij")).reshape(n_qubits, -1)
    bits = np.minimum(levels, 1)
    index = np.zeros(levels.shape[1], dtype=int)
    for q in range(n_qubits):
        index = 2 * index + bits[q]
    r = np.zeros((2**n_qubits, 3**n_qubits))
    r[index, np.arange(3**n_qubits)] = 1.0
    return r


def _embed_two_qubit(action, angles: FsimAngles) -> np.ndarray:
    if action is None:
        action = angles
    if isinstance(action, FsimAngles):
        u = np.eye(9, dtype=complex)
        idx = _computational_index(2)
        u[np.ix_(idx, idx)] = build_unitary(action)
        return u
    u = np.asarray(action, dtype=complex)
    if u.shape != (9, 9):
        raise ValueError("explicit two-qubit action must be a 9x9 two-qutrit unitary")
    return u


def cycle_channel(noise: NoiseModel, n_qubits: int, gate_angles: FsimAngles | None = None) -> np.ndarray:
    """Superoperator (row-major vec) for everything in a cycle after the single-qubit layer."""
    d = 3**n_qubits
    leaked = _leaked_mask(n_qubits)
    comp = ~leaked
    s = np.eye(d * d, dtype=complex)
    if n_qubits == 2:
        u = _embed_two_qubit(noise.two_qubit_action, gate_angles or FsimAngles())
        s = np.kron(u, u.conj()) @ s
    pinch = np.where(np.equal.outer(leaked, leaked), 1.0, 0.0).ravel()
    s = pinch[:, None] * s

    if noise.extra_depolarizing > 0:
        n = 2**n_qubits
        lam = noise.extra_depolarizing * n * n / (n * n - 1)
        # (1 - lam) rho + lam (Tr(P_c rho) I_c / n + P_l rho P_l)
        replace = np.zeros((d * d, d * d))
        diag_c = np.flatnonzero(comp) * (d + 1)
        for i in diag_c:
            replace[diag_c, i] = 1.0 / n
        ll = np.flatnonzero(np.logical_and.outer(leaked, leaked).ravel())
        replace[ll, ll] = 1.0
        s = ((1 - lam) * np.eye(d * d) + lam * replace) @ s

    t = noise.cycle_time
    t1s = (noise.t1_a, noise.t1_b)[:n_qubits]
    tphis = (noise.tphi_a, noise.tphi_b)[:n_qubits]
    amp = _superop_kraus(_amplitude_damping_kraus(t1s[0], t))
    deph = _dephasing_mask(tphis[0], t)
    if n_qubits == 2:
        amp_b = _superop_kraus(_amplitude_damping_kraus(t1s[1], t))
        # Two-qutrit vec ordering (a, b, a', b') differs from kron(A, B) ordering (a, a', b, b').
        amp = _reorder_product(amp, amp_b)
        deph = np.kron(deph, _dephasing_mask(tphis[1], t))
    return deph.ravel()[:, None] * (amp @ s)


def _reorder_product(sa: np.ndarray, sb: np.ndarray) -> np.ndarray:
    full = np.kron(sa, sb).reshape(3, 3, 3, 3, 3, 3, 3, 3)  # (a, a', b, b'; c, c', e, e')
    return full.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(81, 81)


@dataclass(frozen=True)
class NoisyRun:
    depths: list[int]
    probabilities: np.ndarray  # (depths, 2**n) bitstring distributions
    states: np.ndarray  # (depths, d, d) density operators after the final layer
    leaked: np.ndarray  # (depths,) total population with any qutrit in |2>


def simulate_noisy(
    circuit: RandomCircuit,
    gate_angles: FsimAngles | None,
    noise: NoiseModel,
    depths=None,
    channel: np.ndarray | None = None,
) -> NoisyRun:
    n = circuit.n_qubits
    d = 3**n
    depths = _check_depths(circuit, [circuit.depth] if depths is None else depths)
    if channel is None:
        channel = cycle_channel(noise, n, gate_angles)
    readout = _readout_map(n)
    leaked_mask = _leaked_mask(n)
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0
    final = _layer(circuit.final, GATES_QUTRIT)
    wanted = {m: k for k, m in enumerate(depths)}
    probs = np.empty((len(depths), 2**n))
    states = np.empty((len(depths), d, d), dtype=complex)
    leaked = np.empty(len(depths))
    for m in range(circuit.depth + 1):
        if m in wanted:
            k = wanted[m]
            out = final @ rho @ final.conj().T
            pops = np.real(np.diag(out))
            probs[k] = readout @ pops
            states[k] = out
            leaked[k] = pops[leaked_mask].sum()
        if m == circuit.depth:
            break
        u = _layer(circuit.cycles[m], GATES_QUTRIT)
        rho = u @ rho @ u.conj().T
        rho = (channel @ rho.ravel()).reshape(d, d)
        trace_error = abs(np.trace(rho).real - 1.0)
        if trace_error > 1e-6:
            raise RuntimeError(f"density operator trace drifted by {trace_error:.2e} at cycle {m + 1}")
    return NoisyRun(depths, probs, states, leaked)


def sample_counts(distribution, shots: int, rng: np.random.Generator) -> np.ndarray:
    p = np.clip(np.asarray(distribution, dtype=float), 0, None)
    return rng.multinomial(shots, p / p.sum())


def cross_entropy(p, q) -> float:
    """-sum_i p_i ln q_i (natural log)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    support = p > 0
    if np.any(q[support] <= 0):
        raise ValueError("q must be positive wherever p is")
    return float(-np.sum(p[support] * np.log(q[support])))


def alpha(measured, expected) -> float:
    """Sequence fidelity from cross entropies against the expected distribution."""
    expected = np.asarray(expected, dtype=float)
    if np.any(expected <= 0):
        raise ValueError("expected distribution must be strictly positive")
    uniform = np.full_like(expected, 1.0 / len(expected))
    h_inc = cross_entropy(uniform, expected)
    h_exp = cross_entropy(expected, expected)
    if abs(h_inc - h_exp) < 1e-12:
        raise ValueError("expected distribution is uniform; fidelity is undefined")
    return (h_inc - cross_entropy(measured, expected)) / (h_inc - h_exp)


@dataclass(frozen=True)
class DecayFit:
    a: float
    p: float
    b: float
    stderr: tuple[float, float, float]
    non_decaying: bool = False
    unidentifiable: bool = False

    def model(self, m) -> np.ndarray:
        return self.a * self.p ** np.asarray(m, dtype=float) + self.b


def _decay_sse(m, y):
    # A and B are kept within a few times the data scale so that noisy,
    # barely decaying series cannot trade a huge A against a huge -B.
    bound = 10.0 * max(float(np.max(np.abs(y))), 1e-12)

    def sse(x):
        a, p, b = x
        excess = max(abs(a) - bound, abs(b) - bound, 0.0)
        if p < 0 or excess > 0:
            return 1e6 * (1 + excess / bound + max(-p, 0.0))
        return float(np.sum((a * p**m + b - y) ** 2))

    return sse


def _decay_starts(m, y) -> list[np.ndarray]:
    """Starting points: log-linear fit of (y - y_tail), plus a pure exponential when y > 0."""
    tail = y[np.argmax(m)]
    head = y[np.argmin(m)]
    shifted = y - tail
    use = (shifted * np.sign(head - tail) > 0) & (m != m.max())
    starts = []
    if head != tail and use.sum() >= 2:
        slope, intercept = np.polyfit(m[use], np.log(np.abs(shifted[use])), 1)
        p0 = float(np.clip(math.exp(slope), 1e-3, 0.999999))
        starts.append(np.array([math.copysign(math.exp(intercept), head - tail), p0, tail]))
    else:
        starts.append(np.array([head - tail, 0.99, tail]))
    if np.all(y > 0):
        slope, intercept = np.polyfit(m, np.log(y), 1)
        starts.append(np.array([math.exp(intercept), float(np.clip(math.exp(slope), 1e-3, 10.0)), 0.0]))
    return starts


def fit_exponential(m, y, n_bootstrap: int = 200, seed: int = 0) -> DecayFit:
    """Least-squares fit of y = A p**m + B with residual-bootstrap standard errors."""
    m = np.asarray(m, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(m) < 4 or len(m) != len(y):
        raise ValueError("need at least four (m, y) points")
    if not np.all(np.isfinite(y)):
        raise ValueError("y must be finite")
    objective = _decay_sse(m, y)
    res = min(
        (nelder_mead(objective, x0, max_iter=5000, tol_x=1e-11, tol_f=0.0, restarts=3) for x0 in _decay_starts(m, y)),
        key=lambda r: r.fun,
    )
    a, p, b = res.x
    fitted = a * p**m + b
    resid = y - fitted

    boot = []
    if n_bootstrap > 0 and np.any(resid != 0):
        rng = np.random.default_rng(seed)
        for _ in range(n_bootstrap):
            y_star = fitted + rng.choice(resid, size=len(resid), replace=True)
            r = nelder_mead(_decay_sse(m, y_star), res.x, max_iter=400, tol_x=1e-8, tol_f=0.0)
            boot.append(r.x)
    stderr = tuple(float(v) for v in np.std(boot, axis=0, ddof=1)) if len(boot) > 1 else (0.0, 0.0, 0.0)

    scale = max(np.ptp(y), np.max(np.abs(y)), 1e-300)
    unidentifiable = bool(abs(a) < 1e-6 * scale)
    if unidentifiable:
        # No measurable decay: report the flat model with p = 1 rather than an arbitrary p.
        a, p, b = 0.0, 1.0, float(np.mean(y))
    return DecayFit(float(a), float(p), float(b), stderr, non_decaying=bool(p >= 1 or unidentifiable), unidentifiable=unidentifiable)


def purity_series(states, n_qubits: int | None = None) -> np.ndarray:
    """Square root of the normalized purity of each state's computational block.

    Accepts qutrit-register operators (dimension 3 or 9) or already
    computational ones (2 or 4).
    """
    states = np.asarray(states)
    dim = states.shape[-1]
    if n_qubits is None:
        n_qubits = {2: 1, 3: 1, 4: 2, 9: 2}[dim]
    n = 2**n_qubits
    if dim == 3**n_qubits and dim != n:
        idx = _computational_index(n_qubits)
        states = states[..., idx[:, None], idx[None, :]]
    tr = np.real(np.trace(states, axis1=-2, axis2=-1))
    tr2 = np.real(np.einsum("...ij,...ji->...", states, states))
    u = (n * tr2 - tr**2) / (n - 1)
    return np.sqrt(np.maximum(u, 0.0))


@dataclass(frozen=True)
class LeakageFit:
    p0: float
    p_inf: float
    gamma: float
    gamma_up: float
    gamma_down: float
    non_physical: bool = False
    unidentifiable: bool = False

    def model(self, m) -> np.ndarray:
        return (self.p0 - self.p_inf) * np.exp(-self.gamma * np.asarray(m, dtype=float)) + self.p_inf


def fit_leakage(m, y) -> LeakageFit:
    """Fit (p0 - p_inf) exp(-Gamma m) + p_inf; Gamma splits into gamma_up = p_inf Gamma and the rest."""
    m = np.asarray(m, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(m) < 4 or len(m) != len(y):
        raise ValueError("need at least four (m, y) points")

    def sse(x):
        p0, p_inf, gamma = x
        return float(np.sum(((p0 - p_inf) * np.exp(-gamma * m) + p_inf - y) ** 2))

    order = np.argsort(m)
    span = max(np.ptp(m), 1.0)
    p0_start, tail = y[order[0]], float(np.mean(y[order[-max(2, len(m) // 10) :]]))
    best = None
    for gamma0 in (1.0 / span, 3.0 / span, 10.0 / span):
        r = nelder_mead(sse, [p0_start, tail, gamma0], max_iter=5000, tol_x=1e-11, tol_f=0.0, restarts=3)
        if best is None or r.fun < best.fun:
            best = r
    p0, p_inf, gamma = (float(v) for v in best.x)
    scale = max(np.max(np.abs(y)), 1e-300)
    unidentifiable = abs(p0 - p_inf) < 1e-6 * scale
    gamma_up = p_inf * gamma
    return LeakageFit(p0, p_inf, gamma, gamma_up, gamma - gamma_up, non_physical=bool(gamma <= 0), unidentifiable=bool(unidentifiable))


@dataclass(frozen=True)
class ErrorBudget:
    total: float
    control: float
    decoherence: float
    leakage: float
    clamped: tuple[str, ...] = ()

    def to_dict(self):
        return asdict(self)


def error_budget(r_xeb_pauli: float, r_purity_pauli: float, r_leak_pauli: float) -> ErrorBudget:
    """Split the total error into control, decoherence and leakage parts."""
    if min(r_xeb_pauli, r_purity_pauli, r_leak_pauli) < 0:
        raise ValueError("errors must be non-negative")
    control = r_xeb_pauli - r_purity_pauli
    decoherence = r_purity_pauli - r_leak_pauli
    clamped = []
    if control < 0:
        clamped.append("control")
        control = 0.0
    if decoherence < 0:
        clamped.append("decoherence")
        decoherence = 0.0
    if clamped:
        warnings.warn(f"negative budget rows clamped to zero: {', '.join(clamped)}", stacklevel=2)
    return ErrorBudget(r_xeb_pauli, control, decoherence, r_leak_pauli, tuple(clamped))


def gate_budget(cycle: "XebReport", qubit_a: "XebReport", qubit_b: "XebReport") -> ErrorBudget:
    """Two-qubit gate budget after dividing single-qubit XEB and purity errors out of the cycle."""
    r_xeb = gate_error_from_cycle(cycle.xeb_metrics.r_pauli, qubit_a.xeb_metrics.r_pauli, qubit_b.xeb_metrics.r_pauli)
    r_pur = gate_error_from_cycle(
        cycle.purity_metrics.r_pauli, qubit_a.purity_metrics.r_pauli, qubit_b.purity_metrics.r_pauli
    )
    return error_budget(r_xeb, r_pur, cycle.leakage_fit.gamma_up if cycle.leakage_fit else 0.0)


def _series_stats(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # values: (circuits, depths) with NaN for excluded entries
    finite = np.isfinite(values)
    count = finite.sum(axis=0)
    filled = np.where(finite, values, 0.0)
    mean = np.divide(filled.sum(axis=0), count, out=np.full(values.shape[1], math.nan), where=count > 0)
    sq = np.where(finite, (values - mean) ** 2, 0.0).sum(axis=0)
    std = np.sqrt(np.divide(sq, count - 1, out=np.zeros(values.shape[1]), where=count > 1))
    return mean, std / np.sqrt(np.maximum(count, 1))


def _safe_metrics(fit: DecayFit, n_qubits: int) -> ErrorMetrics:
    return error_metrics(float(np.clip(fit.p, 0.0, 1.0)), n_qubits)


@dataclass(frozen=True)
class XebReport:
    n_qubits: int
    n_circuits: int
    depths: list[int]
    alpha: np.ndarray
    alpha_stderr: np.ndarray
    alpha_fit: DecayFit
    xeb_metrics: ErrorMetrics
    purity: np.ndarray
    purity_stderr: np.ndarray
    purity_fit: DecayFit
    purity_metrics: ErrorMetrics
    leakage: np.ndarray
    leakage_stderr: np.ndarray
    leakage_fit: LeakageFit | None
    budget: ErrorBudget
    excluded: list[int] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        def clean(obj):
            if isinstance(obj, np.ndarray):
                return [clean(v) for v in obj.tolist()]
            if isinstance(obj, dict):
                return {k: clean(v) for k, v in obj.items()}
            if isinstance(obj, (list, tuple)):
                return [clean(v) for v in obj]
            if isinstance(obj, float) and not math.isfinite(obj):
                return None
            if isinstance(obj, (np.floating, np.integer, np.bool_)):
                return clean(obj.item())
            return obj

        out = {
            "n_qubits": self.n_qubits,
            "n_circuits": self.n_circuits,
            "depths": self.depths,
            "alpha": {"mean": self.alpha, "stderr": self.alpha_stderr, "fit": asdict(self.alpha_fit)},
            "xeb_metrics": asdict(self.xeb_metrics),
            "purity": {"mean": self.purity, "stderr": self.purity_stderr, "fit": asdict(self.purity_fit)},
            "purity_metrics": asdict(self.purity_metrics),
            "leakage": {
                "mean": self.leakage,
                "stderr": self.leakage_stderr,
                "fit": asdict(self.leakage_fit) if self.leakage_fit else None,
            },
            "budget": self.budget.to_dict(),
            "excluded_per_depth": self.excluded,
            "flags": self.flags,
        }
        return clean(out)


def analyze(
    depths: Sequence[int],
    alphas: np.ndarray,
    purities: np.ndarray,
    leaked: np.ndarray,
    n_qubits: int,
    seed: int = 0,
) -> XebReport:
    """Fit per-circuit series (rows = circuits, columns = depths) into a report."""
    depths = [int(d) for d in depths]
    m = np.asarray(depths, dtype=float)
    flags = []
    a_mean, a_err = _series_stats(alphas)
    p_mean, p_err = _series_stats(purities)
    l_mean, l_err = _series_stats(leaked)
    usable = np.isfinite(a_mean)
    alpha_fit = fit_exponential(m[usable], a_mean[usable], seed=seed)
    purity_fit = fit_exponential(m, p_mean, seed=seed)
    if alpha_fit.non_decaying:
        flags.append("alpha decay not identifiable or p >= 1")
    if purity_fit.non_decaying:
        flags.append("purity decay not identifiable or p >= 1")
    xeb_m = _safe_metrics(alpha_fit, n_qubits)
    pur_m = _safe_metrics(purity_fit, n_qubits)

    leak_fit = None
    if np.max(l_mean) > 0:
        leak_fit = fit_leakage(m, l_mean)
        if leak_fit.non_physical:
            flags.append("leakage fit has Gamma <= 0")
    r_leak = max(leak_fit.gamma_up, 0.0) if leak_fit else 0.0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        budget = error_budget(xeb_m.r_pauli, pur_m.r_pauli, r_leak)
    flags.extend(str(w.message) for w in caught)
    excluded = [int(v) for v in np.sum(~np.isfinite(alphas), axis=0)]
    return XebReport(
        n_qubits=n_qubits,
        n_circuits=alphas.shape[0],
        depths=depths,
        alpha=a_mean,
        alpha_stderr=a_err,
        alpha_fit=alpha_fit,
        xeb_metrics=xeb_m,
        purity=p_mean,
        purity_stderr=p_err,
        purity_fit=purity_fit,
        purity_metrics=pur_m,
        leakage=l_mean,
        leakage_stderr=l_err,
        leakage_fit=leak_fit,
        budget=budget,
        excluded=excluded,
        flags=flags,
    )


def _alpha_or_nan(measured, expected) -> float:
    try:
        return alpha(measured, expected)
    except ValueError:
        return math.nan


@dataclass(frozen=True)
class CircuitResult:
    expected: np.ndarray
    measured: np.ndarray
    counts: np.ndarray | None
    purity: np.ndarray
    leaked: np.ndarray


def run_circuit(
    circuit: RandomCircuit,
    gate_angles: FsimAngles | None,
    noise: NoiseModel,
    depths: Sequence[int],
    shots: int | None = None,
    channel: np.ndarray | None = None,
) -> CircuitResult:
    expected = simulate_ideal(circuit, gate_angles, depths)
    run = simulate_noisy(circuit, gate_angles, noise, depths, channel=channel)
    counts = None
    measured = run.probabilities
    if shots:
        rng = np.random.default_rng(circuit.seed)
        counts = np.array([sample_counts(p, shots, rng) for p in run.probabilities])
        measured = counts / shots
    return CircuitResult(expected, measured, counts, purity_series(run.states, circuit.n_qubits), run.leaked)


def run_xeb(
    gate_angles: FsimAngles | None,
    noise: NoiseModel,
    depths: Sequence[int],
    n_circuits: int = 100,
    n_qubits: int = 2,
    seed: int = 0,
    shots: int | None = None,
    threads: int = 1,
    return_circuits: bool = False,
):
    """Simulate a circuit family and fit alpha, purity and leakage versus depth.

    Circuits whose expected distribution has an exact zero at some depth are
    left out of the alpha average at that depth (the cross entropy is
    infinite there); the count is stored in ``XebReport.excluded``.
    """
    depths = sorted({int(d) for d in depths})
    circuits = circuit_family(seed, n_circuits, max(max(depths), 1), n_qubits)
    channel = cycle_channel(noise, n_qubits, gate_angles)

    def work(c):
        return run_circuit(c, gate_angles, noise, depths, shots, channel)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, circuits))
    else:
        results = [work(c) for c in circuits]

    alphas = np.array([[_alpha_or_nan(r.measured[k], r.expected[k]) for k in range(len(depths))] for r in results])
    purities = np.array([r.purity for r in results])
    leaked = np.array([r.leaked for r in results])
    report = analyze(depths, alphas, purities, leaked, n_qubits, seed=seed)
    return (report, circuits, results) if return_circuits else report


def alphas_from_counts(
    records: Sequence[tuple[int, int, str, int]],
    circuits: Sequence[RandomCircuit],
    gate_angles: FsimAngles | None,
) -> tuple[list[int], np.ndarray]:
    """Per-circuit alpha from (circuit_id, m, bitstring, count) records.

    Works for counts from any source as long as ``circuits`` regenerates
    the circuits that produced them.
    """
    depths = sorted({int(r[1]) for r in records})
    col = {d: k for k, d in enumerate(depths)}
    n_qubits = circuits[0].n_qubits
    tallies = np.zeros((len(circuits), len(depths), 2**n_qubits))
    for cid, m, bits, count in records:
        tallies[int(cid), col[int(m)], int(bits, 2)] += int(count)
    alphas = np.full((len(circuits), len(depths)), math.nan)
    for i, c in enumerate(circuits):
        expected = simulate_ideal(c, gate_angles, depths)
        for k in range(len(depths)):
            total = tallies[i, k].sum()
            if total > 0:
                alphas[i, k] = _alpha_or_nan(tallies[i, k] / total, expected[k])
    return depths, alphas
