"""Matched-filter SNR, its closed forms and asymptotes, and assignment error.

With the optimal filter and unit efficiency the homodyne SNR is::

    SNR(tau)^2 = 2 kappa * int_0^tau Re[alpha_e(t) - alpha_g(t)]^2 dt
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .core import SchemeKind, SchemeParams, Trajectory, validate
from .errors import DomainError, RangeError, ResolutionError, UnsupportedCombination

SERIES_SWITCH = 1.0
SERIES_TERMS = 40


class Method(str, enum.Enum):
    NUMERIC = "numeric_integral"
    CLOSED = "closed_form"
    SHORT = "asymptote_short"
    LONG = "asymptote_long"


@dataclass(frozen=True)
class SnrResult:
    snr: float
    tau: float
    scheme: SchemeKind
    method: Method

    def __float__(self):
        return self.snr


def snr_numeric(traj: Trajectory, kappa, tau, scheme=SchemeKind.ARM_RELEASE, rtol=1e-6):
    """Composite-Simpson SNR on the trajectory grid.

    If ``tau`` falls between samples the signal is extended to ``tau`` with a
    cubic spline. The Richardson estimate (full grid vs. every other point)
    must stay below ``rtol`` relative, else ResolutionError.
    """
    if not tau > 0:
        if tau == 0:
            return SnrResult(0.0, 0.0, SchemeKind.parse(scheme), Method.NUMERIC)
        raise DomainError("tau", "must be >= 0")
    times = traj.times
    if tau > times[-1] * (1 + 1e-12):
        raise RangeError(f"tau={tau} beyond trajectory end {times[-1]}")
    sig2 = traj.separation**2
    idx = int(np.searchsorted(times, tau))
    if idx < len(times) and abs(times[idx] - tau) <= 1e-12 * max(tau, 1.0):
        t, y = times[: idx + 1], sig2[: idx + 1]
    else:
        tail = CubicSpline(times, traj.separation)(tau) ** 2
        t, y = np.append(times[:idx], tau), np.append(sig2[:idx], tail)
    if len(t) < 3:
        raise ResolutionError("fewer than three samples inside the integration window")
    fine = integrate.simpson(y, x=t)
    if len(t) >= 5:
        sub = np.arange(0, len(t), 2)
        if sub[-1] != len(t) - 1:
            sub = np.append(sub, len(t) - 1)
        coarse = integrate.simpson(y[sub], x=t[sub])
        err = abs(fine - coarse) / 15
        # absolute floor: amplitudes carry ~1e-12 noise from any upstream integrator
        scale = max(1.0, float(np.max(np.abs(traj.alpha_e))), float(np.max(np.abs(traj.alpha_g))))
        if err > rtol * abs(fine) + 1e-20 * scale**2 * tau:
            raise ResolutionError(f"quadrature error estimate {err:.2e} exceeds tolerance")
    return SnrResult(math.sqrt(max(2 * kappa * fine, 0.0)), float(tau), SchemeKind.parse(scheme),
                     Method.NUMERIC)


def _square_integral(c, lam, tau):
    """``int_0^tau (Re[c (exp(lam t) - 1)])^2 dt`` with ``Re lam < 0``.

    The elementary antiderivative cancels catastrophically for small
    ``|lam| tau`` (the dispersive integrand starts at order ``t^2``), so a
    power series in ``t`` is used there.
    """
    z = abs(lam) * tau
    if z <= SERIES_SWITCH:
        coef = np.array(
            [0.0] + [(c * lam**k).real * tau**k / factorial(k) for k in range(1, SERIES_TERMS)]
        )
        j = np.arange(SERIES_TERMS)
        denom = j[:, None] + j[None, :] + 1
        return float(tau * np.sum(np.outer(coef, coef) / denom))

    def e_int(mu):
        return (np.exp(mu * tau) - 1) / mu

    r = c.real
    total = (
        0.5 * abs(c) ** 2 * e_int(2 * lam.real).real
        + 0.5 * (c * c * e_int(2 * lam)).real
        - 2 * r * (c * e_int(lam)).real
        + r * r * tau
    )
    return float(max(total, 0.0))


def snr_ar_closed(params: SchemeParams, tau) -> SnrResult:
    """Closed-form arm-and-release SNR (dispersive when ``alpha_arm = 0``).

    Writes ``Re alpha_e(t) = Re[c (exp(lam t) - 1)]`` with
    ``lam = -(i chi + kappa)/2`` and ``c = i alpha_arm - alpha_steady`` and
    integrates the square exactly; ``Re alpha_g = -Re alpha_e``.
    """
    p = validate(params)
    if p.detuning != 0:
        raise DomainError("detuning", "closed form requires a resonant drive")
    if tau < 0:
        raise DomainError("tau", "must be >= 0")
    scheme = p.scheme
    if tau == 0 or p.chi == 0:
        return SnrResult(0.0, float(tau), scheme, Method.CLOSED)
    lam = -(1j * p.chi + p.kappa) / 2
    steady = p.epsilon1 * (p.chi + 1j * p.kappa) / (p.chi**2 + p.kappa**2)
    c = 1j * p.alpha_arm - steady
    integral = _square_integral(c, lam, tau)
    return SnrResult(math.sqrt(8 * p.kappa * integral), float(tau), scheme, Method.CLOSED)


def _longitudinal_radicand(x):
    """``x - 3 + 4 exp(-x/2) - exp(-x)``, stable near ``x = 0``."""
    if x < 0.5:
        return sum((-1) ** k * x**k / factorial(k) * (4 / 2**k - 1) for k in range(3, 30))
    return max(x - 3 + 4 * math.exp(-x / 2) - math.exp(-x), 0.0)


def snr_al_closed(alpha_arm, chi, kappa, tau) -> SnrResult:
    if not alpha_arm > 0:
        raise DomainError("alpha_arm", "arm-and-longitudinal requires alpha_arm > 0")
    if not kappa > 0:
        raise DomainError("kappa", f"must be > 0, got {kappa}")
    if tau < 0:
        raise DomainError("tau", "must be >= 0")
    snr = math.sqrt(8) * alpha_arm * abs(chi) / kappa * math.sqrt(_longitudinal_radicand(kappa * tau))
    return SnrResult(snr, float(tau), SchemeKind.ARM_LONGITUDINAL, Method.CLOSED)


def snr_longitudinal_reference(g_z, kappa, tau) -> SnrResult:
    """SNR of an ideal modulated longitudinal coupling of amplitude ``g_z``."""
    if g_z < 0:
        raise DomainError("g_z", "must be >= 0")
    if not kappa > 0:
        raise DomainError("kappa", f"must be > 0, got {kappa}")
    snr = math.sqrt(8 * g_z**2 / kappa**2 * _longitudinal_radicand(kappa * tau))
    return SnrResult(snr, float(tau), SchemeKind.ARM_LONGITUDINAL, Method.CLOSED)


def snr_asymptote(scheme, regime, params: SchemeParams, tau) -> SnrResult:
    """Leading short- or long-time SNR scaling, evaluated verbatim.

    ``params.alpha_arm`` is used for the longitudinal scheme; ``epsilon1``
    for dispersive and arm-and-release. Dispersive and arm-and-release share
    the long-time form.
    """
    scheme = SchemeKind.parse(scheme)
    regime = str(getattr(regime, "value", regime)).lower()
    p = validate(params)
    chi, kappa, eps, a = abs(p.chi), p.kappa, p.epsilon1, p.alpha_arm
    kt = kappa * tau
    if regime == "short":
        if scheme is SchemeKind.DISPERSIVE:
            snr = math.sqrt(3 / 2) / 8 * eps * chi / kappa**2 * kt**2.5
        else:
            if a == 0:
                raise UnsupportedCombination(
                    "short-time arming asymptote vanishes at alpha_arm = 0; use the dispersive form"
                )
            snr = math.sqrt(2 / 3) * a * chi / kappa * kt**1.5
        method = Method.SHORT
    elif regime == "long":
        if scheme is SchemeKind.ARM_LONGITUDINAL:
            snr = math.sqrt(8) * a * chi / kappa * math.sqrt(kt)
        else:
            r = chi / kappa
            snr = math.sqrt(8) * eps / kappa * r / (1 + r**2) * math.sqrt(kt)
        method = Method.LONG
    else:
        raise UnsupportedCombination(f"unknown regime {regime!r}; expected 'short' or 'long'")
    return SnrResult(snr, float(tau), scheme, method)


def assignment_error(snr):
    """Single-shot assignment error ``erfc(snr/2)/2`` for Gaussian pointer states."""
    if snr < 0 or math.isnan(snr):
        raise DomainError("snr", f"must be >= 0, got {snr}")
    return 0.5 * math.erfc(snr / 2)
