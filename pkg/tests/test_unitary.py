import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from diabatic import FsimAngles, build_unitary, error_metrics, fit_unitary, gate_error_from_cycle
from diabatic.unitary import (
    angle_errors,
    conditional_phase,
    estimate_angles,
    infidelity,
    metrics_from_pauli,
    weakly_constrained,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0])
ISWAP_LIKE = FsimAngles(1.42, 0.48, 2.02, 4.34, 4.39)
CPHASE = FsimAngles(0.01, 3.29, 0.39, -0.13, -3.96)

angle = st.floats(-2 * math.pi, 2 * math.pi)
angle_sets = st.builds(FsimAngles, angle, angle, angle, angle, angle)


def k(a, b):
    return np.kron(a, b)


def expm_product(a: FsimAngles) -> np.ndarray:
    """Independent construction from the Pauli generators with a general matrix exponential."""
    return (
        expm(-1j * (k(I2, Z) - k(Z, I2)) * a.delta_a / 4)
        @ expm(-1j * (k(X, X) + k(Y, Y)) * a.theta / 2)
        @ expm(-1j * k(Z, Z) * a.phi / 4)
        @ expm(-1j * (k(I2, Z) - k(Z, I2)) * a.delta_b / 4)
        @ expm(-1j * (k(I2, Z) + k(Z, I2)) * a.delta_plus / 4)
    )


def equal_up_to_phase(u, v, atol=1e-10):
    return infidelity(u, v) < atol


@settings(max_examples=50)
@given(angle_sets)
def test_build_unitary_matches_generator_exponentials(a):
    np.testing.assert_allclose(build_unitary(a), expm_product(a), atol=1e-12)


@given(angle_sets)
def test_build_unitary_is_unitary(a):
    u = build_unitary(a)
    assert np.max(np.abs(u.conj().T @ u - np.eye(4))) < 1e-12


def test_zero_angles_identity():
    np.testing.assert_array_equal(build_unitary(FsimAngles()), np.eye(4))


def test_full_swap_block():
    u = build_unitary(FsimAngles(theta=math.pi / 2))
    expected = np.array([[1, 0, 0, 0], [0, 0, -1j, 0], [0, -1j, 0, 0], [0, 0, 0, 1]])
    np.testing.assert_allclose(u, expected, atol=1e-15)


@given(angle_sets)
def test_conditional_phase_is_minus_phi(a):
    a = FsimAngles(0.3, a.phi, a.delta_plus, a.delta_c, a.delta_d)
    diff = conditional_phase(build_unitary(a)) + a.phi
    assert abs(math.remainder(diff, 2 * math.pi)) < 1e-10


@pytest.mark.parametrize("phi", [0.3, 1.0, math.pi, -2.0])
def test_phi_only_is_controlled_phase_up_to_local_z(phi):
    # Alone, the ZZ factor differs from diag(1,1,1,e^{-i phi}) by a local Z rotation;
    # delta_plus = -phi removes it exactly.
    target = np.diag([1, 1, 1, np.exp(-1j * phi)])
    assert not equal_up_to_phase(build_unitary(FsimAngles(phi=phi)), target)
    assert equal_up_to_phase(build_unitary(FsimAngles(phi=phi, delta_plus=-phi)), target)


def test_derived_single_qubit_phases():
    a = FsimAngles(delta_c=0.7, delta_d=-0.2)
    assert a.delta_b == (0.7 - 0.2) / 2 and a.delta_a == (0.7 + 0.2) / 2


GAUGE_MOVES = [
    lambda a: FsimAngles(-a.theta, a.phi, a.delta_plus, a.delta_c, a.delta_d + 2 * math.pi),
    lambda a: FsimAngles(math.pi - a.theta, a.phi, a.delta_plus, a.delta_c + 2 * math.pi, a.delta_d),
    lambda a: FsimAngles(a.theta + math.pi, a.phi + 2 * math.pi, a.delta_plus, a.delta_c, a.delta_d),
    lambda a: FsimAngles(a.theta, a.phi + 2 * math.pi, a.delta_plus + 2 * math.pi, a.delta_c, a.delta_d),
    lambda a: FsimAngles(a.theta, a.phi, a.delta_plus + 4 * math.pi, a.delta_c, a.delta_d),
]


@pytest.mark.parametrize("move", range(len(GAUGE_MOVES)))
@given(a=angle_sets)
def test_gauge_moves_leave_unitary_unchanged(move, a):
    assert equal_up_to_phase(build_unitary(a), build_unitary(GAUGE_MOVES[move](a)))


@given(angle_sets)
def test_canonical_preserves_unitary_and_ranges(a):
    c = a.canonical()
    assert equal_up_to_phase(build_unitary(a), build_unitary(c))
    assert 0 <= c.theta <= math.pi / 2
    assert -math.pi < c.phi <= math.pi and -math.pi < c.delta_c <= math.pi
    assert -2 * math.pi < c.delta_plus <= 2 * math.pi and -2 * math.pi < c.delta_d <= 2 * math.pi
    np.testing.assert_allclose(c.canonical().as_array(), c.as_array(), atol=1e-12)


@given(angle_sets)
def test_closed_form_estimate_is_exact_for_generic_angles(a):
    a = FsimAngles(0.1 + abs(math.remainder(a.theta, 1.3)), a.phi, a.delta_plus, a.delta_c, a.delta_d)
    u = build_unitary(a)
    assert equal_up_to_phase(u, build_unitary(estimate_angles(u)), atol=1e-12)


generic_theta = st.floats(0.2, math.pi - 0.2).filter(lambda t: abs(t - math.pi / 2) > 0.2)


@settings(max_examples=100, deadline=None)
@given(st.builds(FsimAngles, generic_theta, angle, angle, angle, angle))
def test_fit_round_trip_generic_angles(a):
    res = fit_unitary(build_unitary(a))
    assert res.residual < 1e-12
    assert max(angle_errors(a, res.angles).values()) < 1e-4


@pytest.mark.parametrize("row", [ISWAP_LIKE, CPHASE], ids=["iswap_like", "cphase"])
def test_fit_recovers_table_rows(row):
    res = fit_unitary(build_unitary(row))
    errors = angle_errors(row, res.angles)
    for name in res.weak_angles:
        errors.pop(name)
    assert max(errors.values()) < 1e-6
    assert res.converged


def test_weak_angle_flags():
    assert weakly_constrained(math.pi / 2) == ("delta_c",)
    assert weakly_constrained(0.01) == ("delta_d",)
    assert weakly_constrained(0.8) == ()
    assert fit_unitary(build_unitary(CPHASE)).weak_angles == ("delta_d",)


def test_fit_identity_gives_zero_angles():
    res = fit_unitary(np.eye(4))
    assert res.residual < 1e-10
    assert max(abs(v) for v in res.angles.as_array()) < 1e-6


def test_delta_c_barely_matters_at_full_swap():
    base = FsimAngles(math.pi / 2, 0.4, 0.2, 0.0, 0.3)
    bumped = FsimAngles(math.pi / 2, 0.4, 0.2, 0.3, 0.3)
    assert infidelity(build_unitary(base), build_unitary(bumped)) < 1e-3


def test_non_photon_conserving_target_flagged():
    u = build_unitary(ISWAP_LIKE)
    u[0, 3] = u[3, 0] = 0.2
    with pytest.warns(UserWarning, match="photon conserving"):
        res = fit_unitary(u)
    assert not res.photon_conserving


def test_fit_rejects_wrong_shape():
    with pytest.raises(ValueError):
        fit_unitary(np.eye(3))


def test_fit_result_json_fields():
    d = fit_unitary(build_unitary(ISWAP_LIKE)).to_dict()
    for key in ("theta", "phi", "delta_plus", "delta_c", "delta_d", "residual", "iterations", "converged"):
        assert key in d


@pytest.mark.parametrize(
    "p, n, r, r_pauli",
    [(0.9931, 2, 5.175e-3, 6.469e-3), (1.0, 2, 0.0, 0.0), (1.0, 1, 0.0, 0.0), (0.9981, 1, 0.95e-3, 1.425e-3)],
)
def test_error_metrics_examples(p, n, r, r_pauli):
    m = error_metrics(p, n)
    assert m.r == pytest.approx(r, abs=1e-6)
    assert m.r_pauli == pytest.approx(r_pauli, abs=1e-6)
    assert m.fidelity == pytest.approx(1 - m.r)


@given(st.floats(0, 1), st.sampled_from([1, 2]))
def test_error_metric_identities(p, n):
    m = error_metrics(p, n)
    N = 2**n
    assert m.dimension == N
    assert m.r == pytest.approx((N - 1) / N * (1 - p))
    if m.r > 0:
        assert m.r_pauli / m.r == pytest.approx((N + 1) / N)


def test_pauli_error_to_fidelity():
    assert metrics_from_pauli(4.3e-3, 2).fidelity == pytest.approx(0.9966, abs=1e-4)


def test_error_metrics_domain():
    with pytest.raises(ValueError):
        error_metrics(1.2, 2)


@pytest.mark.parametrize(
    "cycle, qa, qb, expected",
    [(0, 0, 0, 0.0), (6.0e-3, 1.0e-3, 1.0e-3, 4.009e-3), (2e-3, 2e-3, 0, 0.0)],
)
def test_gate_error_from_cycle(cycle, qa, qb, expected):
    assert gate_error_from_cycle(cycle, qa, qb) == pytest.approx(expected, abs=1e-6)


def test_gate_error_clamped_with_warning():
    with pytest.warns(UserWarning):
        assert gate_error_from_cycle(1e-3, 1e-3, 1e-3) == 0.0
    with pytest.raises(ValueError):
        gate_error_from_cycle(1.0, 0, 0)
