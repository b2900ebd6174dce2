import math

import numpy as np
import pytest

from readout_forge import DomainError, DriveProfile, SchemeParams, RangeError
from readout_forge.semiclassical import (
    alpha_arm_for_al,
    amplitude_al,
    amplitude_ar,
    drive_al,
    epsilon_for_peak,
    integrate_eom,
    mean_photon,
    mean_photon_printed,
    peak_photon,
    volterra_residual,
)


def test_dispersive_starts_empty():
    ag, ae = amplitude_ar(SchemeParams(chi=0.7, epsilon1=2.0), 0.0)
    assert ag == 0 and ae == 0


def test_chi_zero_holds_armed_state():
    p = SchemeParams(chi=0.0, epsilon1=1.0, alpha_arm=1.0)
    t = np.linspace(0, 10, 11)
    ag, ae = amplitude_ar(p, t)
    np.testing.assert_allclose(ae, 1j, atol=1e-15)
    np.testing.assert_allclose(ag, 1j, atol=1e-15)


def test_closed_form_matches_oracle_fig1_point():
    p = SchemeParams(chi=1.0, epsilon1=1.0, alpha_arm=0.8 * math.sqrt(2.44))
    traj = integrate_eom(p, t_end=4.0, t_eval=np.array([0.0, 4.0]))
    ag, ae = amplitude_ar(p, 4.0)
    assert abs(ae - traj.alpha_e[-1]) < 1e-8
    assert abs(ag - traj.alpha_g[-1]) < 1e-8


def test_fixed_points():
    chi, eps = 0.8, 1.3
    ag, ae = amplitude_ar(SchemeParams(chi=chi, epsilon1=eps, alpha_arm=0.5), 80.0)
    assert ag == pytest.approx(eps / (-chi - 1j), abs=1e-12)
    assert ae == pytest.approx(eps / (chi - 1j), abs=1e-12)


def test_detuned_closed_form_rejected():
    with pytest.raises(DomainError):
        amplitude_ar(SchemeParams(chi=1.0, detuning=0.1), 1.0)


def test_mirror_symmetry():
    p = SchemeParams(chi=1.7, epsilon1=2.5, alpha_arm=0.9)
    t = np.linspace(0, 20, 101)
    ag, ae = amplitude_ar(p, t)
    np.testing.assert_allclose(ag.real, -ae.real, atol=1e-15)
    np.testing.assert_allclose(ag.imag, ae.imag, atol=1e-15)
    lg, le = amplitude_al(1.1, 1.7, 1.0, t)
    np.testing.assert_allclose(lg.real, -le.real, atol=1e-15)


@pytest.mark.parametrize("chi", [0.4, -0.4, 2.0, -2.0])
def test_separation_sign_follows_minus_chi(chi):
    # the pull convention makes Re[alpha_g - alpha_e] carry the sign of -chi
    ag, ae = amplitude_ar(SchemeParams(chi=chi, epsilon1=0.5, alpha_arm=1.0), np.array([0.05, 0.2]))
    assert np.all(np.sign(-chi) * (ag - ae).real > 0)


def test_drive_al_values():
    assert drive_al(1.3, 0.7, 1.0, 0.0) == pytest.approx(1.3)
    assert drive_al(1.3, 0.0, 1.0, 5.0) == pytest.approx(1.3)
    assert drive_al(1.0, 1.0, 1.0, 2.0) == pytest.approx(1 + (1 - math.exp(-1)), rel=1e-15)
    assert drive_al(1.0, 2.0, 1.0, 1e4) == pytest.approx(5.0)
    t = np.linspace(0, 10, 50)
    assert np.all(np.diff(drive_al(1.0, 2.0, 1.0, t)) >= 0)
    with pytest.raises(DomainError):
        drive_al(0.0, 1.0, 1.0, 1.0)


def test_amplitude_al_values():
    ag, ae = amplitude_al(1.0, 1.0, 1.0, 0.0)
    assert ag == 1j and ae == 1j
    ag, ae = amplitude_al(1.0, 1.0, 1.0, 1.0)
    assert ag.real == pytest.approx(-(1 - math.exp(-0.5)), rel=1e-14)
    assert ae.real == pytest.approx(1 - math.exp(-0.5), rel=1e-14)
    ag, ae = amplitude_al(1.0, 1.0, 1.0, 200.0)
    assert ag == pytest.approx(-1 + 1j)
    assert abs(ae) ** 2 == pytest.approx(2.0)


def test_al_closed_form_matches_oracle():
    a, chi = 0.9, 1.4
    t = np.linspace(0, 20, 201)
    traj = integrate_eom(SchemeParams(chi=chi, alpha_arm=a), DriveProfile.arm_longitudinal(a, chi, 1.0),
                         t_end=20.0, t_eval=t)
    ag, ae = amplitude_al(a, chi, 1.0, t)
    assert np.max(np.abs(traj.alpha_g - ag)) < 1e-8
    assert np.max(np.abs(traj.alpha_e.imag - a)) < 1e-9


@pytest.mark.parametrize("ratio, expected", [(1 / 3, math.sqrt(9 / 10)), (1.0, 1 / math.sqrt(2)),
                                             (3.0, 1 / math.sqrt(10)), (0.0, 1.0)])
def test_alpha_arm_for_al(ratio, expected):
    assert alpha_arm_for_al(ratio, 1.0, 2.44) / math.sqrt(2.44) == pytest.approx(expected, rel=1e-15)


def test_undriven_decay():
    traj = integrate_eom(SchemeParams(chi=0.6, alpha_arm=1.0), t_end=10.0)
    np.testing.assert_allclose(np.abs(traj.alpha_e), np.exp(-traj.times / 2), rtol=1e-8)


def test_detuned_oracle_runs():
    p = SchemeParams(chi=0.5, epsilon1=1.0, detuning=0.3)
    traj = integrate_eom(p, t_end=60.0)
    # detuned fixed point
    assert traj.alpha_e[-1] == pytest.approx(1j * 0.5 / (1j * (0.3 + 0.25) + 0.5), abs=1e-9)


def test_mean_photon():
    p = SchemeParams(chi=1.0, epsilon1=1.0, alpha_arm=0.7)
    assert mean_photon(p, 0.0) == pytest.approx(0.49)
    assert mean_photon(SchemeParams(chi=1.0, epsilon1=1.2), 200.0) == pytest.approx(1.44 / 2, rel=1e-12)
    traj = integrate_eom(SchemeParams(chi=1.0, epsilon1=1.0), t_end=4.0)
    assert mean_photon(traj, 2.0) == pytest.approx(mean_photon(SchemeParams(chi=1.0, epsilon1=1.0), 2.0),
                                                   rel=1e-6)
    with pytest.raises(RangeError):
        mean_photon(traj, 5.0)


def test_printed_photon_formula_differs_only_after_t0():
    p = SchemeParams(chi=1.0, epsilon1=1.0, alpha_arm=0.0)
    assert mean_photon_printed(p, 0.0) == pytest.approx(mean_photon(p, 0.0), abs=1e-15)
    assert abs(mean_photon_printed(p, 2.0) - mean_photon(p, 2.0)) > 1e-3


def test_peak_photon_cases():
    a = 1.1
    res = peak_photon(SchemeParams(chi=0.9, alpha_arm=a), DriveProfile.arm_longitudinal(a, 0.9, 1.0))
    assert res.n_peak == pytest.approx(a * a * (1 + 0.81), rel=1e-12)
    assert math.isinf(res.t_peak)
    res = peak_photon(SchemeParams(chi=0.9, alpha_arm=a))
    assert res.n_peak == pytest.approx(a * a) and res.t_peak == 0.0
    res = peak_photon(SchemeParams(chi=1.0, epsilon1=1.0))
    assert res.n_peak > 0.5  # overshoot above the steady state 1/2


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.2, math.sqrt(2.44) * 0.999])
@pytest.mark.parametrize("chi", [0.2, 1.0, 3.0])
def test_budget_saturation(alpha, chi):
    eps = epsilon_for_peak(alpha, chi, 1.0, 2.44)
    peak = peak_photon(SchemeParams(chi=chi, epsilon1=eps, alpha_arm=alpha, n_max=2.44)).n_peak
    assert peak == pytest.approx(2.44, rel=1e-8)


def test_envelope_matches_bisection():
    for alpha in (0.0, 0.7, 1.3):
        a = epsilon_for_peak(alpha, 1.0, 1.0, 2.44)
        b = epsilon_for_peak(alpha, 1.0, 1.0, 2.44, method="bisection")
        assert a == pytest.approx(b, rel=1e-8)


def test_budget_drive_nonincreasing_in_alpha():
    eps = [epsilon_for_peak(a, 1.0, 1.0, 2.44) for a in np.linspace(0, math.sqrt(2.44), 25)]
    assert np.all(np.diff(eps) <= 1e-12)


def test_full_arming_drive_still_peaks_at_start():
    alpha = math.sqrt(2.44)
    eps = epsilon_for_peak(alpha, 1.0, 1.0, 2.44)
    assert eps > 0
    res = peak_photon(SchemeParams(chi=1.0, epsilon1=eps, alpha_arm=alpha, n_max=2.44))
    assert res.n_peak == pytest.approx(2.44, rel=1e-9)


def test_budget_rejects_overarming():
    with pytest.raises(DomainError):
        epsilon_for_peak(2.0, 1.0, 1.0, 2.44)


@pytest.mark.parametrize("t", [0.5, 2.0, 10.0])
def test_volterra_residual_al(t):
    drive = DriveProfile.arm_longitudinal(1.2, 1.7, 1.0)
    assert abs(volterra_residual(drive, 1.2, 1.7, 1.0, t)) < 1e-8


def test_volterra_residual_constant():
    assert abs(volterra_residual(DriveProfile.constant(2.0), 1.0, 1.0, 1.0, 1.0)) > 1e-3
    for t in (0.0, 0.3, 4.0):
        assert abs(volterra_residual(DriveProfile.constant(0.8), 0.8, 0.0, 1.0, t)) < 1e-10
