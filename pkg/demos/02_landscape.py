"""Error landscapes around the tuned operating point.

Sweeps pairs of pulse parameters and prints the total error
eps_swap + eps_leak on a coarse grid, marking the minimum. The low-error
valley in (f_interact, t_hold) is nearly vertical: the hold time is set by
the leakage zero, while the frequency fixes the coupling.
Run:  python3 demos/02_landscape.py
"""

import numpy as np

from diabatic import SweepSpec, TrapezoidPulse, reference_device, sweep

device = reference_device()
tuned = TrapezoidPulse(6.28, 5.0, 5.3994, overshoot=-0.00505, t_ramp=5.0, t_hold=19.044, smoothing_sigma=1.0)


def show(grid):
    total = np.log10(grid.total)
    i, j = np.unravel_index(np.nanargmin(total), total.shape)
    print(f"\nlog10(eps_swap + eps_leak); rows {grid.axis_x}, columns {grid.axis_y}")
    print("          " + " ".join(f"{y:7.3f}" for y in grid.y_values))
    for k, x in enumerate(grid.x_values):
        print(f"{x:9.4f} " + " ".join(f"{v:7.2f}" for v in total[k]))
    print(f"minimum {grid.total[i, j]:.2e} at {grid.axis_x}={grid.x_values[i]:.4f}, {grid.axis_y}={grid.y_values[j]:.4f}")


show(sweep(SweepSpec("interaction_freq", "hold_time", (5.30, 5.50, 9), (17.0, 21.0, 9), tuned), device, dt=0.01))
show(sweep(SweepSpec("overshoot", "hold_time", (-0.02, 0.01, 7), (18.0, 20.0, 9), tuned), device, dt=0.01))
