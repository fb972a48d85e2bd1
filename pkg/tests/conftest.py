import pytest

from diabatic import TrapezoidPulse, reference_device

# Tuned gate on the reference device (from landscape.tune over 5.2-5.6 GHz).
TUNED = dict(f_idle_a=6.28, f_idle_b=5.0, f_interact=5.3994, overshoot=-0.00505, t_ramp=5.0, t_hold=19.044)


@pytest.fixture(scope="session")
def device():
    return reference_device()


@pytest.fixture(scope="session")
def tuned_pulse():
    return TrapezoidPulse(**TUNED)
