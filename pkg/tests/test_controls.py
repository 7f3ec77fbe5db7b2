import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geogates.controls import (
    S_X,
    ControlField,
    SingleLoopSpec,
    auxiliary_states,
    drag_components,
    drag_correct,
    drag_hamiltonian_3level,
    drag_hamiltonian_from_b,
    field_columns,
    numeric_drag_correction,
    parallel_transport_residual,
    reverse_engineer,
    single_loop_area,
    single_loop_build,
    single_loop_unitary,
    two_level_schedule,
)
from geogates.dynamics import SIGMA_X, evolve_unitary, gate_unitary, propagate_unitary, trace_fidelity
from geogates.fixtures import fixture
from geogates.trajectory import H_GATE, T_GATE, GateTarget, evaluate, h_config, normalize_tau, t_config

coefs = st.lists(st.floats(-2.0, 2.0, allow_nan=False), min_size=4, max_size=4)


@settings(max_examples=10, deadline=None)
@given(coefs, coefs, st.sampled_from(["T", "H"]))
def test_reverse_engineered_drive_follows_the_trajectory(a_theta, a_phi, config):
    p = (t_config if config == "T" else h_config)(a_theta, a_phi)
    p = normalize_tau(p, 1.0, 400) if any(a_theta) or any(a_phi) else p
    field = reverse_engineer(p, 400)
    start = evaluate(p, 0.0)
    mu1, mu2 = auxiliary_states(start.theta, start.phi)
    h = lambda t: two_level_schedule(field)[0][0](t)  # noqa: E731
    _, path = propagate_unitary(h, 0.0, p.tau, 800, u0=np.stack([mu1, mu2], 1), return_path=True)
    t = np.linspace(0, p.tau, 801)
    pt = evaluate(p, t)
    m1, m2 = auxiliary_states(pt.theta, pt.phi)
    # each auxiliary state is carried into itself up to a phase
    assert np.allclose(np.abs(np.einsum("ti,ti->t", m1.conj(), path[:, :, 0])), 1.0, atol=1e-6)
    assert np.allclose(np.abs(np.einsum("ti,ti->t", m2.conj(), path[:, :, 1])), 1.0, atol=1e-6)


@settings(max_examples=25, deadline=None)
@given(coefs, coefs, st.sampled_from(["T", "H"]))
def test_parallel_transport_holds_for_any_coefficients(a_theta, a_phi, config):
    p = (t_config if config == "T" else h_config)(a_theta, a_phi)
    if not (any(a_theta) or any(a_phi)) and config == "T":
        return
    assert parallel_transport_residual(p, 500) < 1e-10


def test_case1_h_drive_vanishes_at_the_ends():
    field = reverse_engineer(fixture(1, "H").params())
    assert abs(field.omega[0]) < 1e-12 and abs(field.omega[-1]) < 1e-12


def test_field_evaluate_matches_samples_and_rescaling_keeps_the_gate():
    field = reverse_engineer(fixture(2, "H").params(), 1000)
    d, o, _ = field.evaluate(field.t)
    assert np.allclose(d, field.delta) and np.allclose(o, field.omega)
    fast = field.rescaled(3.0)
    assert fast.duration == pytest.approx(field.duration / 3)
    assert fast.omega_max == pytest.approx(3 * field.omega_max)
    assert trace_fidelity(gate_unitary(fast), gate_unitary(field)) == pytest.approx(1.0, abs=1e-10)


def test_sampled_field_tracks_the_analytic_one():
    field = reverse_engineer(fixture(1, "T").params(), 4000)
    sampled = ControlField.from_samples(field.t, field.delta, field.omega)
    assert trace_fidelity(gate_unitary(sampled), gate_unitary(field)) > 1 - 1e-6


def test_omega_derivative_matches_finite_differences():
    field = reverse_engineer(fixture(5, "H").params())
    t = np.linspace(0.1, 0.9, 9) * field.duration
    h = 1e-6 * field.duration
    _, _, od = field.evaluate(t)
    num = (field.evaluate(t + h)[1] - field.evaluate(t - h)[1]) / (2 * h)
    assert np.allclose(od, num, atol=1e-6)


@settings(max_examples=12, deadline=None)
@given(st.floats(0.0, np.pi), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi), st.floats(0.3, 3.0))
def test_single_loop_closed_form_and_area(theta_c, phi, gamma, omega_m):
    spec = SingleLoopSpec(theta_c, phi, gamma, omega_m)
    u = evolve_unitary(two_level_schedule(single_loop_build(spec, 400)), 4000)
    assert np.max(np.abs(u - single_loop_unitary(spec))) < 1e-8
    assert single_loop_area(spec, 2000) == pytest.approx(np.pi, abs=1e-8)


def test_single_loop_switch_times():
    spec = SingleLoopSpec(np.pi / 3, 0.0, 0.4, 2.0)
    assert spec.T == pytest.approx(2 * np.pi)
    assert spec.running_area(spec.T1) == pytest.approx(np.pi / 3)
    assert spec.running_area(spec.T2) == pytest.approx(np.pi / 3 + np.pi)
    pole = SingleLoopSpec(0.0, 0.0, 0.4)
    assert pole.T1 == 0.0 and pole.T2 == pytest.approx(pole.T / 2)
    assert len(single_loop_build(pole).pieces) == 2
    with pytest.raises(ValueError):
        SingleLoopSpec(4.0, 0, 0)
    with pytest.raises(ValueError):
        SingleLoopSpec(1.0, 0, 0, omega_m=0.0)


@pytest.mark.parametrize("target", [T_GATE, H_GATE, GateTarget(2.0, 0.7, 1.3)])
def test_single_loop_reference_realizes_the_target(target):
    for equal_peak in (False, True):
        spec = SingleLoopSpec.for_target(target, 1.0, equal_peak)
        assert trace_fidelity(single_loop_unitary(spec), target.unitary()) == pytest.approx(1.0, abs=1e-12)
    narrow = single_loop_build(SingleLoopSpec.for_target(target))
    wide = single_loop_build(SingleLoopSpec.for_target(target, equal_peak=True))
    assert narrow.omega_max == pytest.approx(0.5, abs=1e-6)
    assert wide.omega_max == pytest.approx(1.0, abs=1e-6)
    assert narrow.duration == pytest.approx(2 * wide.duration)


def test_qubit_block_of_the_transmon_drive_is_x_conjugated():
    rng = np.random.default_rng(1)
    delta, omega = rng.normal(), rng.normal() + 1j * rng.normal()
    b0, _ = drag_components(2 * delta, 2 * omega, 0.0, 5.0)
    h3 = drag_hamiltonian_from_b(b0, 5.0)
    h2 = np.array([[delta, omega], [np.conj(omega), -delta]])
    assert np.allclose(h3[:2, :2], SIGMA_X @ h2 @ SIGMA_X)
    assert h3[2, 2] == pytest.approx(-3 * b0[2] / 2 - 5.0)


def test_drag_hamiltonian_is_hermitian_and_correction_scales_inversely():
    field = reverse_engineer(fixture(5, "T").params(), 500)
    d1, d2 = drag_correct(field, 10.0), drag_correct(field, 20.0)
    assert np.allclose(d1.bd, 2 * d2.bd)
    h = drag_hamiltonian_3level(d1, field.t[::50])
    assert np.allclose(h, np.conj(np.swapaxes(h, -1, -2)))
    assert np.allclose(drag_hamiltonian_3level(d1, field.t[::50], correction=False)[:, 0, 2], 0)
    assert np.allclose(S_X, S_X.conj().T)
    with pytest.raises(ValueError):
        drag_correct(field, 0.0)


def test_numeric_drag_correction_matches_the_analytic_derivative():
    field = reverse_engineer(fixture(5, "H").params(), 4000)
    dfield = drag_correct(field, 30.0)
    num = numeric_drag_correction(field, 30.0)
    assert np.max(np.abs(num - dfield.bd[:2])) < 1e-5 * np.max(np.abs(dfield.bd))


def test_field_columns():
    field = reverse_engineer(fixture(1, "T").params(), 200)
    cols = field_columns(field)
    assert list(cols) == ["t", "delta", "omega_re", "omega_im"]
    assert "b_dx" in field_columns(field, drag_correct(field, 3.0))
