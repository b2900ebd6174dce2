"""Pointer-state dynamics of the driven cavity for the three readout schemes.

The equation of motion in the frame of the drive is::

    d(alpha_{g,e})/dt = -[i(detuning -/+ chi/2) + kappa/2] alpha_{g,e} + i eps(t)/2

with ``alpha(0) = i * alpha_arm``. Closed forms exist for a resonant constant
drive (arm-and-release, dispersive when ``alpha_arm = 0``) and for the
longitudinal drive synthesis; :func:`integrate_eom` is the numerical oracle for
both.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import DriveProfile, SchemeParams, Trajectory, validate
from .errors import ConvergenceError, DomainError, IntegrationError, QuadratureError, RangeError
from .search import golden_max, golden_min

# transient tail e^{-kappa T/2} beyond the scan horizon
HORIZON_TAIL = 1e-10
MIN_GRID = 2000


@dataclass(frozen=True)
class PeakPhotonResult:
    n_peak: float
    t_peak: float


def _scalar_or_array(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


def _alpha_e_release(chi, kappa, epsilon1, alpha_arm, t):
    half = chi * t / 2
    damp = np.exp(-kappa * t / 2)
    c, s = np.cos(half), np.sin(half)
    eps_t = epsilon1 / (chi**2 + kappa**2)
    re = alpha_arm * s * damp + eps_t * (chi - (chi * c + kappa * s) * damp)
    im = alpha_arm * c * damp + eps_t * (kappa + (chi * s - kappa * c) * damp)
    return re + 1j * im


def amplitude_ar(params: SchemeParams, t):
    """Closed-form arm-and-release amplitudes ``(alpha_g, alpha_e)`` at ``t``.

    ``alpha_arm = 0`` gives standard dispersive readout. ``alpha_g`` is the
    ``chi -> -chi`` image of ``alpha_e``.
    """
    validate(params)
    if params.detuning != 0:
        raise DomainError("detuning", "closed form requires a resonant drive (detuning = 0)")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t", "times must be >= 0")
    p = params
    ae = _alpha_e_release(p.chi, p.kappa, p.epsilon1, p.alpha_arm, t)
    ag = _alpha_e_release(-p.chi, p.kappa, p.epsilon1, p.alpha_arm, t)
    return _scalar_or_array(ag), _scalar_or_array(ae)


def _check_al(alpha_arm, kappa):
    if not alpha_arm > 0:
        raise DomainError("alpha_arm", "arm-and-longitudinal requires alpha_arm > 0")
    if not kappa > 0:
        raise DomainError("kappa", f"must be > 0, got {kappa}")


def drive_al(alpha_arm, chi, kappa, t):
    """Drive envelope that keeps ``Im alpha`` pinned at ``alpha_arm``."""
    _check_al(alpha_arm, kappa)
    t = np.asarray(t, dtype=float)
    out = alpha_arm * (chi**2 / kappa) * -np.expm1(-kappa * t / 2) + alpha_arm * kappa
    return _scalar_or_array(out)


def amplitude_al(alpha_arm, chi, kappa, t):
    """Straight-line pointer states under :func:`drive_al`."""
    _check_al(alpha_arm, kappa)
    t = np.asarray(t, dtype=float)
    x = alpha_arm * (chi / kappa) * -np.expm1(-kappa * t / 2)
    return _scalar_or_array(-x + 1j * alpha_arm), _scalar_or_array(x + 1j * alpha_arm)


def alpha_arm_for_al(chi, kappa, n_max):
    """Arming amplitude for which the longitudinal steady state sits on the budget."""
    if not kappa > 0:
        raise DomainError("kappa", f"must be > 0, got {kappa}")
    if not n_max > 0:
        raise DomainError("n_max", f"must be > 0, got {n_max}")
    return math.sqrt(n_max / (1 + (chi / kappa) ** 2))


# ---------------------------------------------------------------------------
# numerical oracle


def _solve(params, drive, t_end, tol, t_eval=None, dense=False):
    p = validate(params)
    if not t_end > 0:
        raise DomainError("t_end", f"must be > 0, got {t_end}")
    if drive is None:
        drive = DriveProfile.constant(p.epsilon1)
    rates = np.array(
        [-(1j * (p.detuning - p.chi / 2) + p.kappa / 2), -(1j * (p.detuning + p.chi / 2) + p.kappa / 2)]
    )

    def rhs(t, y):
        return rates * y + 0.5j * drive(t)

    y0 = np.array([1j * p.alpha_arm, 1j * p.alpha_arm], dtype=complex)
    scale = max(1.0, p.alpha_arm, float(drive(0.0)) / p.kappa, float(drive(t_end)) / p.kappa)
    sol = integrate.solve_ivp(
        rhs,
        (0.0, t_end),
        y0,
        method="DOP853",
        t_eval=t_eval,
        rtol=tol,
        atol=tol * scale * 1e-2,
        dense_output=dense,
    )
    if not sol.success:
        raise IntegrationError(f"step control failed: {sol.message}")
    return sol


def integrate_eom(params: SchemeParams, drive: DriveProfile | None = None, t_end=20.0, tol=1e-10,
                  n_points=2001, t_eval=None) -> Trajectory:
    """Integrate the pointer-state equations with an adaptive 8(5,3) Runge-Kutta.

    ``drive`` defaults to a constant ``params.epsilon1``. Nonzero detuning is
    supported. The result is sampled on ``t_eval`` (must start at 0) or on a
    uniform grid of ``n_points``.
    """
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, n_points)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
        t_end = float(t_eval[-1])
    sol = _solve(params, drive, t_end, tol, t_eval=t_eval)
    return Trajectory(sol.t, sol.y[0], sol.y[1])


# ---------------------------------------------------------------------------
# photon number


def mean_photon(source, t, state="e"):
    """Mean photon number ``|alpha(t)|^2``.

    ``source`` is either a :class:`SchemeParams` (resonant closed form) or a
    :class:`Trajectory`, which is interpolated linearly between samples.
    """
    if state not in ("g", "e"):
        raise DomainError("state", "must be 'g' or 'e'")
    if isinstance(source, Trajectory):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < source.times[0]) or np.any(t_arr > source.times[-1]):
            raise RangeError(f"t outside trajectory range [0, {source.times[-1]}]")
        amp = source.alpha_g if state == "g" else source.alpha_e
        re = np.interp(t_arr, source.times, amp.real)
        im = np.interp(t_arr, source.times, amp.imag)
        return _scalar_or_array(re**2 + im**2)
    ag, ae = amplitude_ar(source, t)
    return _scalar_or_array(np.abs(ag if state == "g" else ae) ** 2)


def mean_photon_printed(params: SchemeParams, t):
    """The photon-number expression exactly as printed in the source derivation.

    Kept only as a cross-check: its first term carries ``exp(-kappa t/2)``
    where the modulus of the closed-form amplitude gives ``exp(-kappa t)``, so
    it disagrees with :func:`mean_photon` for ``t > 0`` unless ``epsilon1 = 0``.
    """
    p = validate(params)
    chi, kappa, eps, a = p.chi, p.kappa, p.epsilon1, p.alpha_arm
    t = np.asarray(t, dtype=float)
    d = chi**2 + kappa**2
    half = chi * t / 2
    out = (
        eps**2 / d * (1 + np.exp(-kappa * t / 2))
        + a**2 * np.exp(-kappa * t)
        + eps / d
        * (2 * a * (chi * np.sin(half) + kappa * np.cos(half) - kappa * np.exp(-kappa * t / 2))
           - 2 * eps * np.cos(half))
        * np.exp(-kappa * t / 2)
    )
    return _scalar_or_array(out)


def scan_horizon(chi, kappa):
    """Time horizon and grid size for photon-number scans.

    Starts at ``20/kappa`` and grows until the transient ``exp(-kappa T/2)``
    is below ``HORIZON_TAIL``; the grid resolves the ``chi/2`` oscillation.
    """
    horizon = 20.0 / kappa
    while math.exp(-kappa * horizon / 2) >= HORIZON_TAIL:
        horizon *= 1.25
    per_period = 60
    n = max(MIN_GRID, int(per_period * horizon * abs(chi) / (4 * math.pi)) + 1)
    return horizon, n


def _refine_max(f, grid, values):
    i = int(np.argmax(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi == lo:
        return grid[i], values[i]
    x, fx = golden_max(f, lo, hi)
    if fx < values[i]:
        return grid[i], values[i]
    return x, fx


def peak_photon(params: SchemeParams, drive: DriveProfile | None = None, horizon=None):
    """Global maximum of ``max(|alpha_g|^2, |alpha_e|^2)`` over ``t >= 0``.

    Dense grid scan on ``[0, T]`` followed by golden-section refinement of the
    best cell; the steady state (``t -> inf``) is also a candidate when it is
    known in closed form.
    """
    p = validate(params)
    if drive is None:
        drive = DriveProfile.constant(p.epsilon1)
    T, n = scan_horizon(p.chi, p.kappa)
    if horizon is not None:
        T = float(horizon)
    grid = np.linspace(0.0, T, n)
    resonant = p.detuning == 0

    if resonant and drive.kind == "constant":
        q = p.with_(epsilon1=drive.epsilon1)
        ch, k, eps, a = q.chi, q.kappa, q.epsilon1, q.alpha_arm
        values = np.abs(_alpha_e_release(ch, k, eps, a, grid)) ** 2

        def f(t):
            return abs(complex(_alpha_e_release(ch, k, eps, a, t))) ** 2

        tail = (math.inf, eps**2 / (ch**2 + k**2))
    elif resonant and drive.kind == "arm_longitudinal" and drive.alpha_arm == p.alpha_arm \
            and drive.chi == p.chi and drive.kappa == p.kappa:
        a, ch, k = p.alpha_arm, p.chi, p.kappa
        # modulus grows monotonically to its steady value
        return PeakPhotonResult(a**2 * (1 + (ch / k) ** 2), math.inf)
    else:
        sol = _solve(p, drive, T, 1e-10, dense=True)

        def f(t):
            y = sol.sol(t)
            return float(max(abs(y[0]) ** 2, abs(y[1]) ** 2))

        ys = sol.sol(grid)
        values = np.maximum(np.abs(ys[0]) ** 2, np.abs(ys[1]) ** 2)
        tail = None

    t_best, n_best = _refine_max(f, grid, values)
    if tail is not None and horizon is None and tail[1] > n_best:
        t_best, n_best = tail
    return PeakPhotonResult(float(n_best), float(t_best))


def _cexpm1(z):
    """``exp(z) - 1`` without cancellation for small complex ``z``."""
    x, y = np.real(z), np.imag(z)
    return np.expm1(x) * np.exp(1j * y) + (-2 * np.sin(y / 2) ** 2 + 1j * np.sin(y))


def _budget_envelope(alpha_arm, chi, kappa, n_max, t):
    """Largest drive keeping ``|alpha(t)|^2 <= n_max`` at each time ``t > 0``.

    ``alpha_e(t) = a(t) + eps * u(t)`` is affine in the drive, so the
    constraint at fixed ``t`` is a quadratic in ``eps`` with a single
    nonnegative root.
    """
    lam = -(1j * chi + kappa) / 2
    s_hat = (chi + 1j * kappa) / (chi**2 + kappa**2)
    if isinstance(t, np.ndarray):
        a = 1j * alpha_arm * np.exp(lam * t)
        u = -s_hat * _cexpm1(lam * t)
        q = np.abs(u) ** 2
        b = (np.conj(a) * u).real
        c = np.maximum(n_max - np.abs(a) ** 2, 0.0)
        root = np.sqrt(b * b + q * c)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(b >= 0, c / (b + root), (root - b) / q)
        return np.where(q > 0, out, np.inf)
    a = 1j * alpha_arm * cmath.exp(lam * t)
    u = -s_hat * complex(_cexpm1(lam * t))
    q = abs(u) ** 2
    if q == 0:
        return math.inf
    b = (a.conjugate() * u).real
    c = max(n_max - abs(a) ** 2, 0.0)
    root = math.sqrt(b * b + q * c)
    return c / (b + root) if b >= 0 else (root - b) / q


def _check_budget_args(alpha_arm, chi, kappa, n_max):
    if not kappa > 0:
        raise DomainError("kappa", f"must be > 0, got {kappa}")
    if not n_max > 0:
        raise DomainError("n_max", f"must be > 0, got {n_max}")
    if alpha_arm < 0:
        raise DomainError("alpha_arm", f"must be >= 0, got {alpha_arm}")
    if alpha_arm**2 > n_max * (1 + 1e-12):
        raise DomainError("alpha_arm", "armed photon number exceeds n_max")


def epsilon_for_peak(alpha_arm, chi, kappa, n_max, method="envelope"):
    """Largest constant drive whose trajectory never exceeds ``n_max`` photons.

    For ``alpha_arm**2 < n_max`` this is the unique drive whose peak photon
    number equals ``n_max``. ``method="envelope"`` minimizes the per-time
    admissible drive over the scan grid (exact up to grid refinement);
    ``method="bisection"`` bisects on :func:`peak_photon` instead.
    """
    _check_budget_args(alpha_arm, chi, kappa, n_max)
    steady = math.sqrt(n_max * (chi**2 + kappa**2))
    if method == "bisection":
        return _epsilon_bisection(alpha_arm, chi, kappa, n_max, steady)
    if method != "envelope":
        raise DomainError("method", f"unknown method {method!r}")
    T, n = scan_horizon(chi, kappa)
    grid = np.linspace(0.0, T, n)[1:]
    env = _budget_envelope(alpha_arm, chi, kappa, n_max, grid)
    i = int(np.argmin(env))
    lo = grid[i - 1] if i > 0 else grid[0] * 1e-3
    hi = grid[min(i + 1, len(grid) - 1)]
    _, eps = golden_min(lambda t: _budget_envelope(alpha_arm, chi, kappa, n_max, t), lo, hi)
    return float(min(eps, env[i], steady))


def _epsilon_bisection(alpha_arm, chi, kappa, n_max, steady, rtol=1e-9, max_expand=60):
    base = SchemeParams(chi=chi, kappa=kappa, alpha_arm=alpha_arm, n_max=n_max)

    def feasible(eps):
        return peak_photon(base.with_(epsilon1=eps)).n_peak <= n_max * (1 + 1e-13)

    lo, hi = 0.0, max(steady, 1e-3)
    for _ in range(max_expand):
        if not feasible(hi):
            break
        lo, hi = hi, 2 * hi
    else:
        raise ConvergenceError("could not bracket the budget-saturating drive")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
        n_lo = peak_photon(base.with_(epsilon1=lo)).n_peak
        if abs(n_lo - n_max) <= rtol * n_max and hi - lo <= 1e-10 * hi:
            break
    return lo


# ---------------------------------------------------------------------------
# integral-equation check of the longitudinal drive


def volterra_kernel(chi, kappa, s):
    """Kernel of the drive integral equation as a function of ``s = t - tau``."""
    return 0.5 * (chi * np.sin(chi * s / 2) + kappa * np.cos(chi * s / 2)) * np.exp(-kappa * s / 2)


def volterra_residual(drive, alpha_arm, chi, kappa, t, epsabs=1e-10):
    """``eps(t) - 2 alpha_arm K(t, 0) - int_0^t K(t, tau) eps(tau) dtau``.

    Vanishes (to quadrature accuracy) exactly when ``drive`` keeps the
    pointer states on the horizontal line ``Im alpha = alpha_arm``.
    """
    if t < 0:
        raise DomainError("t", "must be >= 0")
    if not kappa > 0:
        raise DomainError("kappa", f"must be > 0, got {kappa}")
    if t == 0:
        integral = 0.0
    else:
        res = integrate.quad(
            lambda tau: volterra_kernel(chi, kappa, t - tau) * float(drive(tau)),
            0.0,
            t,
            epsabs=epsabs,
            epsrel=1e-12,
            limit=200,
            full_output=1,
        )
        if len(res) > 3:
            raise QuadratureError(f"quadrature did not converge: {res[3]}")
        integral = res[0]
    return float(drive(t)) - 2 * alpha_arm * float(volterra_kernel(chi, kappa, t)) - integral
