"""Closed-form coherence factors and effective-coupling helpers."""

import numpy as np
import pytest

from sdid import (DeviceModel, QubitParams, build_liouvillian,
                  coherence_1spec, coherence_Nspec, control_coherence,
                  cpmg_effective, eta_diag, fit_exponential, heuristic_rate,
                  phase_bounds, propagate, ramsey_initial_state, ramsey_trace)


def test_eta_ground_state_is_pure_phase():
    t = np.linspace(0.0, 1e-4, 11)
    nu = 2 * np.pi * 11250.0
    eta = eta_diag(0, nu, 9000.0, t)
    assert np.allclose(eta, np.exp(-2j * nu * t), atol=1e-14)
    assert np.allclose(np.abs(eta), 1.0, atol=1e-14)


def test_eta_excited_limits():
    t = np.linspace(0.0, 1e-4, 11)
    nu = 2 * np.pi * 11250.0
    # At t = 0 every factor is 1.
    assert np.isclose(eta_diag(1, nu, 9345.8, 0.0), 1.0)
    # No decay: the excited spectator imprints the opposite static phase.
    assert np.allclose(eta_diag(1, nu, 0.0, t), np.exp(2j * nu * t),
                       atol=1e-12)
    # No coupling: the spectator leaves no trace on the control.
    assert np.allclose(eta_diag(1, 0.0, 9345.8, t), 1.0, atol=1e-12)
    with pytest.raises(ValueError):
        eta_diag(2, nu, 1.0, t)


def test_single_and_multi_spectator_forms_agree(device_a):
    t = np.linspace(0.0, 500e-6, 101)
    q, nu = device_a.spectators[0]
    direct = coherence_1spec(0.0, 1.0, nu, device_a.control.gamma_tilde,
                             q.gamma, t)
    generic = coherence_Nspec(device_a, "1", t)
    assert np.max(np.abs(direct - generic)) <= 1e-12


def test_matches_dense_propagation(device_a):
    times = np.linspace(0.0, 500e-6, 101)
    analytic = ramsey_trace(device_a, "1", times).values
    bundle = build_liouvillian(device_a)
    rho0 = ramsey_initial_state(device_a, "1")
    dense = 2.0 * np.array([control_coherence(r)
                            for r in propagate(bundle, rho0, times)])
    assert np.max(np.abs(analytic - dense)) <= 1e-8


def test_heuristic_rate_adds_excited_t1_rates(device_a, device_b):
    assert np.isclose(heuristic_rate(device_a, "1"),
                      1.0 / 127e-6 + 1.0 / 107e-6)
    assert np.isclose(heuristic_rate(device_a, "0"), 1.0 / 127e-6)
    expected = 1.0 / 241e-6 + 1.0 / 150e-6 + 1.0 / 122e-6
    assert np.isclose(heuristic_rate(device_b, "101"), expected)


def test_fast_coupling_limit_reaches_heuristic_rate():
    gamma1 = 1.0 / 107e-6
    nu = 100.0 * gamma1
    device = DeviceModel(control=QubitParams.from_times(t2=127e-6),
                         spectators=((QubitParams(gamma=gamma1), nu),))
    rate = heuristic_rate(device, "1")
    times = np.linspace(1e-7, 5.0 / rate, 400)
    mags = np.abs(ramsey_trace(device, "1", times).values)
    fit = fit_exponential(times, mags, offset=0.0)
    assert abs(fit.params["rate"] - rate) / rate <= 0.02


def test_slow_coupling_magnitude_oscillates(device_a):
    # nu ~ gamma1: the magnitude is non-monotone (at least one local
    # extremum), unlike a plain exponential.
    times = np.linspace(0.0, 500e-6, 501)
    mags = np.abs(ramsey_trace(device_a, "1", times).values)
    d = np.diff(mags)
    assert np.any(d[:-1] * d[1:] < 0)


def test_magnitude_bounded_by_intrinsic_envelope(device_a):
    times = np.linspace(0.0, 500e-6, 101)
    mags = np.abs(ramsey_trace(device_a, "1", times).values)
    envelope = np.exp(-device_a.control.gamma_tilde * times)
    assert np.all(mags <= envelope + 1e-12)


def test_trace_normalization_conventions(device_a):
    times = np.linspace(0.0, 100e-6, 5)
    raw = ramsey_trace(device_a, "1", times, normalized=False)
    norm = ramsey_trace(device_a, "1", times)
    assert np.isclose(raw.values[0], 0.5)
    assert np.isclose(norm.values[0], 1.0)
    assert np.allclose(2.0 * raw.values, norm.values, atol=1e-14)


def test_cpmg_effective_divides_couplings(device_b):
    eff = cpmg_effective(device_b, 4)
    assert np.allclose(eff.nus, device_b.nus / 5.0)
    assert eff.control == device_b.control
    assert all(q1 == q2 for (q1, _), (q2, _) in
               zip(eff.spectators, device_b.spectators))
    assert np.allclose(cpmg_effective(device_b, 0).nus, device_b.nus)
    with pytest.raises(ValueError):
        cpmg_effective(device_b, -1)


def test_phase_bounds_shrink_with_order():
    nu = 2 * np.pi * 11250.0
    T = 100e-6
    lo, hi = phase_bounds(T, 0, nu)
    assert lo == 0.0
    assert np.isclose(hi, 2 * nu * T)
    _, hi4 = phase_bounds(T, 4, nu)
    assert np.isclose(hi4, 2 * nu * T / 5.0)
    with pytest.raises(ValueError):
        phase_bounds(T, -1, nu)
