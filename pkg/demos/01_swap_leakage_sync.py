"""Swap and leakage errors of a resonant excitation swap, and how they synchronize.

A rectangular pulse that parks both qubits at the same frequency swaps the
single excitation |10> -> |01> with period 1/(2g) and, in the two-excitation
manifold, leaks |11> into |20>/|02> at the faster rate sqrt(eta^2 + 16 g^2).
Choosing g so that the swap completes exactly on a leakage zero makes both
errors vanish at once. Run:  python3 demos/01_swap_leakage_sync.py
"""

import numpy as np

from diabatic import (
    TrapezoidPulse,
    ideal_leakage,
    leakage_error,
    rectangular,
    reference_device,
    swap_error,
    sync_coupling,
    sync_spectrum,
    tune,
)
from diabatic.landscape import find_dips, hold_trace

device = reference_device()
eta = 0.5 * (device.qubit_a.eta + device.qubit_b.eta)

# --- Synchronization condition: swap time equals the n-th leakage zero. -----
print("n   g_sync [MHz]   t_swap [ns]")
for n in range(2, 7):
    g = sync_coupling(eta, n)
    print(f"{n}   {g * 1e3:10.2f}   {1 / (4 * g):10.2f}")

# --- Which of those couplings does the device reach inside its band? --------
print("\nsynchronization points on the reference device (rectangular pulses):")
for p in sync_spectrum(device):
    print(
        f"  n={p.n}: f={p.interaction_freq:.4f} GHz  t_h={p.hold_time:.2f} ns  "
        f"eps_swap={p.residual_swap:.1e}  eps_leak={p.residual_leak:.1e}  ok={p.within_tolerance}"
    )
# The residual leakage is not zero because the two nonlinearities differ;
# the closed form assumes they are equal.

# --- Rectangular pulse at the n=4 point, checked against the closed form. ---
n4 = next(p for p in sync_spectrum(device) if p.n == 4)
traj = rectangular(n4.interaction_freq, n4.interaction_freq, n4.hold_time)
print(f"\nn=4 rectangular pulse: simulated leakage {leakage_error(traj, device):.2e}, "
      f"closed form at mean eta {ideal_leakage(n4.coupling, eta, n4.hold_time):.2e}")

# --- Realistic pulse: finite ramps from the idle frequencies. ---------------
# Ramping in and out adds swapping and phase outside the hold, so the
# synchronization point shifts. `tune` searches interaction frequency, hold
# time and overshoot together.
template = TrapezoidPulse(6.28, 5.0, 5.45, overshoot=0.0, t_ramp=5.0, t_hold=19.0, smoothing_sigma=1.0)
best = tune(device, template, (5.2, 5.6), initial=(19.0, -0.005))
print(f"\ntuned pulse: f_i={best.interaction_freq:.4f} GHz  t_h={best.t_hold:.3f} ns  "
      f"overshoot={best.overshoot * 1e3:.2f} MHz")
print(f"  eps_swap={best.eps_swap:.2e}  eps_leak={best.eps_leak:.2e}")

# --- Hold-time trace: leakage oscillates faster than swapping. --------------
holds, swap, leak = hold_trace(best.pulse(template), device, np.arange(2.0, 26.0, 0.1), dt=0.01)
dips = [d.x for d in find_dips(holds, leak)]
print("\nleakage dips at t_h =", ", ".join(f"{d:.2f}" for d in dips), "ns")
print(f"mean spacing {np.mean(np.diff(dips)):.2f} ns")
