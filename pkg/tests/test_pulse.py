import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diabatic import TrapezoidPulse, rectangular, sample
from diabatic.pulse import envelope


@pytest.mark.parametrize(
    "kwargs",
    [dict(t_hold=-1.0), dict(t_ramp=0.0), dict(smoothing_sigma=-0.1), dict(overshoot=0.5), dict(overshoot=-0.7)],
)
def test_pulse_validation(kwargs):
    with pytest.raises(ValueError):
        TrapezoidPulse(6.28, 5.0, 5.5, **kwargs)


def test_total_time_and_dict_round_trip(tuned_pulse):
    assert tuned_pulse.total_time == pytest.approx(2 * 5.0 + 19.044)
    assert TrapezoidPulse.from_dict(tuned_pulse.to_dict()) == tuned_pulse
    with pytest.raises(ValueError):
        TrapezoidPulse.from_dict({"f_idle_a": 6.0})


def test_endpoints_at_idle_and_continuous(tuned_pulse):
    traj = sample(tuned_pulse, 0.005)
    assert (traj.f_a[0], traj.f_a[-1]) == (6.28, 6.28)
    assert (traj.f_b[0], traj.f_b[-1]) == (5.0, 5.0)
    # No jumps bigger than the steepest erf slope allows.
    assert np.max(np.abs(np.diff(traj.f_a))) < 0.01
    assert traj.n_steps % 2 == 0
    assert traj.times[-1] == pytest.approx(tuned_pulse.total_time)


@pytest.mark.parametrize("overshoot", [0.005, -0.005, 0.0])
def test_overshoot_sets_plateau_detuning_only(overshoot):
    p = TrapezoidPulse(6.28, 5.0, 5.5, overshoot=overshoot, t_hold=15.2)
    traj = sample(p, 0.005)
    mid = len(traj.times) // 2
    assert traj.f_a[mid] - traj.f_b[mid] == pytest.approx(overshoot, abs=1e-9)
    assert 0.5 * (traj.f_a[mid] + traj.f_b[mid]) == pytest.approx(5.5, abs=1e-9)
    assert (traj.f_a[0], traj.f_b[-1]) == (6.28, 5.0)


def test_hold_time_between_ramp_midpoints():
    p = TrapezoidPulse(6.28, 5.0, 5.5, t_hold=15.2, smoothing_sigma=1.0)
    t = np.array([p.t_ramp, p.t_ramp + p.t_hold])
    # At both ramp midpoints the envelope is halfway (up to the tiny erf tail of the other edge).
    np.testing.assert_allclose(envelope(p, t), 0.5, atol=1e-6)


def test_zero_sigma_limit_is_rectangular():
    p = TrapezoidPulse(6.28, 5.0, 5.5, t_ramp=1.0, t_hold=10.0, smoothing_sigma=0.0)
    traj = sample(p, 0.01)
    inside = (traj.times > 1.0 + 1e-9) & (traj.times < 11.0 - 1e-9)
    outside = (traj.times < 1.0 - 1e-9) | (traj.times > 11.0 + 1e-9)
    assert np.all(traj.f_a[inside] == 5.5)
    assert np.all(traj.f_a[outside] == 6.28)


def test_sample_rejects_coarse_step():
    with pytest.raises(ValueError):
        sample(TrapezoidPulse(6.28, 5.0, 5.5, t_ramp=5.0), dt=0.6)
    with pytest.raises(ValueError):
        sample(TrapezoidPulse(6.28, 5.0, 5.5), dt=0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 30.0), st.floats(1.0, 8.0), st.floats(0.0, 2.0))
def test_symmetric_pulse_is_time_reversal_invariant(hold, ramp, sigma):
    p = TrapezoidPulse(6.28, 5.0, 5.5, overshoot=0.004, t_ramp=ramp, t_hold=hold, smoothing_sigma=sigma)
    traj = sample(p, 0.01)
    rev = traj.reversed()
    assert np.max(np.abs(rev.f_a - traj.f_a)) < 1e-12
    assert np.max(np.abs(rev.f_b - traj.f_b)) < 1e-12


def test_rectangular_trajectory():
    traj = rectangular(5.5, 5.5, 15.43, 0.005)
    assert traj.total_time == 15.43
    assert traj.times[-1] == pytest.approx(15.43)
    assert np.all(traj.f_a == traj.f_b)
    assert traj.dt <= 0.005


def test_rectangular_zero_duration():
    traj = rectangular(5.5, 5.5, 0.0)
    assert traj.n_steps == 0 and traj.total_time == 0.0
    with pytest.raises(ValueError):
        rectangular(5.5, 5.5, -1.0)
