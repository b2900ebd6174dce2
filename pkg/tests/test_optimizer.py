import math

import numpy as np
import pytest

from readout_forge import DomainError, SchemeKind
from readout_forge.metrics import snr_ar_closed
from readout_forge.core import SchemeParams
from readout_forge.optimizer import (
    Boundary,
    choose_scheme,
    default_jobs,
    gain_al,
    gain_ar,
    gain_map,
    gain_ratio,
    optimize_alpha_arm,
    recommend,
    snr_dispersive,
)
from readout_forge.semiclassical import epsilon_for_peak


def test_optimum_beats_grid_scan():
    chi, tau, n_max = 0.8, 3.0, 2.44
    opt = optimize_alpha_arm(chi, 1.0, tau, n_max)
    for x in np.linspace(0, 1, 201):
        a = x * math.sqrt(n_max)
        eps = epsilon_for_peak(a, chi, 1.0, n_max)
        snr = snr_ar_closed(SchemeParams(chi=chi, epsilon1=eps, alpha_arm=a, n_max=n_max), tau).snr
        assert snr <= opt.snr_opt * (1 + 1e-9)


def test_gain_at_least_one():
    for chi in (0.1, 1.0, 5.0):
        for tau in (0.1, 3.0, 30.0):
            assert gain_ar(chi, 1.0, tau, 2.44) >= 1 - 1e-12


def test_boundary_flag_short_time_full_arming():
    opt = optimize_alpha_arm(1.0, 1.0, 0.1, 2.44)
    assert opt.alpha_tilde > 0.9
    assert opt.boundary in (Boundary.AT_BUDGET, Boundary.INTERIOR)


def test_interior_optimum_at_experiment_point():
    opt = optimize_alpha_arm(0.42, 1.0, 11.31, 2.44)
    assert opt.boundary is Boundary.INTERIOR
    assert 0.5 < opt.alpha_tilde < 1.0


def test_restricted_optimum_reported():
    opt = optimize_alpha_arm(3.0, 1.0, 30.0, 2.44)
    if opt.boundary is Boundary.AT_ZERO:
        assert opt.alpha_tilde_restricted is None or opt.alpha_tilde_restricted > 0
    else:
        assert opt.alpha_tilde_restricted is not None


def test_gain_ratio_consistency():
    chi, tau = 0.6, 8.0
    assert gain_ratio(chi, 1.0, tau, 2.44) == pytest.approx(
        gain_al(chi, 1.0, tau, 2.44) / gain_ar(chi, 1.0, tau, 2.44), rel=1e-12)


@pytest.mark.parametrize("chi, tau, n_max", [(0.42, 11.31, 2.44), (2.0, 1.0, 2.44), (0.2, 25.0, 2.44)])
def test_scale_invariance(chi, tau, n_max):
    a = gain_ar(chi, 1.0, tau, n_max), gain_al(chi, 1.0, tau, n_max)
    b = gain_ar(chi, 1.0, tau, 1.0), gain_al(chi, 1.0, tau, 1.0)
    assert a == pytest.approx(b, rel=1e-6)


def test_kappa_units_cancel():
    assert gain_ar(0.84, 2.0, 11.31 / 2, 2.44) == pytest.approx(gain_ar(0.42, 1.0, 11.31, 2.44), rel=1e-6)


def test_choose_scheme_tie_goes_to_longitudinal():
    assert choose_scheme(1.0) is SchemeKind.ARM_LONGITUDINAL
    assert choose_scheme(0.999) is SchemeKind.ARM_RELEASE


def test_recommend_experiment_points():
    low = recommend(0.42, 1.0, 11.31, 2.44)
    high = recommend(0.42, 1.0, 20.73, 2.44)
    assert low.scheme is SchemeKind.ARM_RELEASE
    assert high.scheme is SchemeKind.ARM_LONGITUDINAL
    assert low.to_dict()["scheme"] == "arm_and_release"
    assert high.drive.kind == "arm_longitudinal"
    assert 0 < high.expected_error < 0.5


def test_input_validation():
    with pytest.raises(DomainError):
        optimize_alpha_arm(1.0, 1.0, 0.0, 2.44)
    with pytest.raises(DomainError):
        snr_dispersive(1.0, 1.0, 1.0, -1.0)
    with pytest.raises(DomainError):
        gain_al(0.0, 1.0, 1.0, 2.44)


def test_gain_map_parallel_matches_serial():
    chi = [0.3, 1.0, 3.0]
    tau = [0.5, 5.0]
    a = gain_map(chi, tau, 2.44, jobs=1, grid_points=16)
    b = gain_map(chi, tau, 2.44, jobs=2, grid_points=16)
    for name in ("gain_ar", "gain_al", "gain_ratio", "alpha_tilde"):
        np.testing.assert_array_equal(a.field(name), b.field(name))
    assert a.field("gain_ar").shape == (3, 2)


def test_gain_map_axis_validation():
    with pytest.raises(DomainError):
        gain_map([1.0, 0.5], [1.0], 2.44, jobs=1)


def test_default_jobs_env(monkeypatch):
    monkeypatch.setenv("READOUT_FORGE_JOBS", "3")
    assert default_jobs() == 3
    monkeypatch.delenv("READOUT_FORGE_JOBS")
    assert default_jobs() >= 1
