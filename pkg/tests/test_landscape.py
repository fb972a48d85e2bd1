import math

import numpy as np
import pytest

from diabatic import (
    CouplingModel,
    DeviceParams,
    QubitParams,
    SweepSpec,
    find_dips,
    ideal_leakage,
    optimize,
    sweep,
    sync_spectrum,
)
from diabatic.landscape import hold_trace


def test_sweep_spec_validation(tuned_pulse):
    with pytest.raises(ValueError):
        SweepSpec("hold_time", "hold_time", (1, 2, 2), (1, 2, 2), tuned_pulse)
    with pytest.raises(ValueError):
        SweepSpec("hold_time", "voltage", (1, 2, 2), (1, 2, 2), tuned_pulse)
    with pytest.raises(ValueError):
        SweepSpec("hold_time", "overshoot", (1, 2, 0), (0, 0.01, 2), tuned_pulse)
    with pytest.raises(ValueError):
        SweepSpec("hold_time", "overshoot", (2, 1, 3), (0, 0.01, 2), tuned_pulse)


def test_small_grid_shape_and_bounds(device, tuned_pulse):
    spec = SweepSpec("interaction_freq", "hold_time", (5.3, 5.5, 2), (18.0, 20.0, 3), tuned_pulse)
    grid = sweep(spec, device, dt=0.01)
    assert grid.eps_swap.shape == grid.eps_leak.shape == (2, 3)
    assert np.all((grid.eps_swap >= 0) & (grid.eps_swap <= 1))
    assert np.all((grid.eps_leak >= 0) & (grid.eps_leak <= 1))
    assert len(list(grid.rows())) == 6


def test_sweep_is_deterministic_and_thread_independent(device, tuned_pulse):
    spec = SweepSpec("overshoot", "hold_time", (-0.01, 0.0, 2), (18.0, 20.0, 2), tuned_pulse)
    serial = sweep(spec, device, dt=0.01)
    threaded = sweep(spec, device, dt=0.01, threads=3)
    np.testing.assert_array_equal(serial.eps_swap, threaded.eps_swap)
    np.testing.assert_array_equal(serial.eps_leak, threaded.eps_leak)


def test_one_by_n_sweep_equals_hold_trace(device, tuned_pulse):
    holds = [17.0, 18.0, 19.0]
    spec = SweepSpec("interaction_freq", "hold_time", (5.3994, 5.3994, 1), (17.0, 19.0, 3), tuned_pulse)
    grid = sweep(spec, device, dt=0.01)
    _, s, l = hold_trace(tuned_pulse, device, holds, dt=0.01)
    np.testing.assert_allclose(grid.eps_swap[0], s, rtol=0, atol=1e-15)
    np.testing.assert_allclose(grid.eps_leak[0], l, rtol=0, atol=1e-15)


def test_failed_points_become_nan(device):
    from diabatic import TrapezoidPulse

    # t_ramp = 0.05 ns cannot be resolved at dt = 0.01 ns, so every point fails.
    spec = SweepSpec("interaction_freq", "hold_time", (5.3, 5.4, 2), (1, 2, 2), TrapezoidPulse(6.28, 5.0, 5.4, t_ramp=0.05))
    grid = sweep(spec, device, dt=0.01)
    assert np.all(np.isnan(grid.total))


def test_find_dips_parabola_vertex():
    x = np.linspace(0, 4, 9)
    y = 2.0 * (x - 1.7) ** 2 + 0.3
    (dip,) = find_dips(x, y)
    assert dip.x == pytest.approx(1.7, abs=1e-6)
    assert dip.value == pytest.approx(0.3, abs=1e-6)


def test_find_dips_monotone_is_empty():
    assert find_dips(np.arange(10.0), np.arange(10.0) ** 2) == []
    with pytest.raises(ValueError):
        find_dips([0, 1], [1, 0])


def test_find_dips_on_closed_form_leakage():
    g, eta = 0.0162, 0.240
    t = np.arange(0.05, 20.0, 0.05)
    dips = find_dips(t, [ideal_leakage(g, eta, x) for x in t])
    omega = math.sqrt(eta**2 + 16 * g**2)
    np.testing.assert_allclose([d.x for d in dips], np.arange(1, len(dips) + 1) / omega, atol=2e-3)
    assert np.mean(np.diff([d.x for d in dips])) == pytest.approx(4.0, abs=0.1)


def test_sync_spectrum_reference_device(device):
    points = sync_spectrum(device, dt=0.01)
    orders = [p.n for p in points]
    assert 4 in orders
    assert 2 not in orders and 3 not in orders
    n4 = points[orders.index(4)]
    assert 4.0 <= n4.interaction_freq <= 7.0
    assert 14.0 <= n4.hold_time <= 17.0
    assert n4.residual_swap < 1e-9
    holds = [p.hold_time for p in points]
    assert holds == sorted(holds)


def test_sync_points_clean_for_equal_nonlinearities():
    dev = DeviceParams(QubitParams(6.28, 0.23), QubitParams(6.16, 0.23), CouplingModel(0.0162, 6.0))
    points = sync_spectrum(dev, dt=0.01)
    assert points
    for p in points:
        assert p.residual_leak < 1e-6 and p.residual_swap < 1e-6
        assert p.within_tolerance


def test_optimize_finds_overshoot_from_zero(device, tuned_pulse):
    res = optimize(device, tuned_pulse, initial=(19.0, 0.0), dt=0.01)
    assert res.objective < 1e-3
    assert res.objective <= res.initial_objective
    assert 1e-3 < abs(res.overshoot) < 1e-2
    assert res.converged


def test_optimize_rejects_unphysical_start(device, tuned_pulse):
    with pytest.raises(ValueError):
        optimize(device, tuned_pulse, initial=(-1.0, 0.0))


def test_low_leakage_line_weakly_depends_on_frequency(device, tuned_pulse):
    holds = np.arange(17.5, 20.5, 0.1)
    positions, depths = [], []
    for f in (5.2, 5.45, 5.7):
        h, _, leak = hold_trace(tuned_pulse.with_(f_interact=f), device, holds, dt=0.01)
        (dip,) = find_dips(h, leak)
        positions.append(dip.x)
        depths.append(dip.value)
    assert np.ptp(positions) < 0.2  # near-vertical line
    assert max(depths) / min(depths) < 10
