"""From a simulated pulse to gate angles.

The computational-subspace block of the simulated evolution is fitted by
the five-angle photon-conserving model: swap angle theta, conditional phase
phi and three single-qubit phases. Run:  python3 demos/03_unitary_fit.py
"""

import numpy as np

from diabatic import FsimAngles, TrapezoidPulse, build_unitary, effective_unitary, fit_unitary, reference_device
from diabatic.pulse import sample
from diabatic.unitary import angle_errors

device = reference_device()
pulse = TrapezoidPulse(6.28, 5.0, 5.3994, overshoot=-0.00505, t_ramp=5.0, t_hold=19.044, smoothing_sigma=1.0)
u = effective_unitary(sample(pulse, 0.005), device)
print("|U| in the computational basis (00, 01, 10, 11):")
print(np.array2string(np.abs(u), precision=4, suppress_small=True))

fit = fit_unitary(u)
a = fit.angles
print(f"\ntheta={a.theta:.4f}  phi={a.phi:.4f}  delta_plus={a.delta_plus:.4f}  "
      f"delta_c={a.delta_c:.4f}  delta_d={a.delta_d:.4f}")
print(f"fit residual {fit.residual:.2e}  (what remains is leakage/non-unitarity)")
if fit.weak_angles:
    print("weakly constrained at this theta:", ", ".join(fit.weak_angles))
print(f"theta vs pi/2: {abs(a.theta - np.pi / 2):.2e} rad; the conditional phase comes from the |11>-|20> interaction")

# A known gate survives the round trip, up to the model's gauge freedom.
target = FsimAngles(1.42, 0.48, 2.02, 4.34, 4.39)
back = fit_unitary(build_unitary(target))
print("\nround trip of", target)
print("angle errors:", {k: f"{v:.1e}" for k, v in angle_errors(target, back.angles).items()})
