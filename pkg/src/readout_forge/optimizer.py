"""Arming-amplitude optimization, relative gains and scheme recommendation.

Every scheme is compared at a common photon budget ``n_max``. The dispersive
reference is arm-and-release with ``alpha_arm = 0`` driven at its own
budget-saturating amplitude, so the search interval ``[0, sqrt(n_max)]``
always contains it and the arm-and-release gain is at least one.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import DriveProfile, SchemeKind, SchemeParams
from .errors import DomainError
from .metrics import assignment_error, snr_al_closed, snr_ar_closed
from .search import golden_max
from .semiclassical import alpha_arm_for_al, epsilon_for_peak

DEFAULT_GRID_POINTS = 64
DEFAULT_TOL = 1e-10
TIE_BREAK = "gain ratio == 1 resolves to arm-and-longitudinal: its drive raises the photon number monotonically"


class Boundary(str, enum.Enum):
    INTERIOR = "interior"
    AT_ZERO = "at_zero"
    AT_BUDGET = "at_budget"


@dataclass(frozen=True)
class OptimumArm:
    """Best arm-and-release operating point at a fixed photon budget.

    ``alpha_tilde_restricted`` is the best local maximum of the SNR with
    ``alpha_arm > 0`` (None when the SNR only decreases away from zero); it
    differs from ``alpha_tilde`` where dispersive readout wins outright.
    """

    alpha_arm_opt: float
    alpha_tilde: float
    snr_opt: float
    epsilon1_opt: float
    boundary: Boundary
    snr_dispersive: float
    epsilon1_dispersive: float
    alpha_tilde_restricted: float | None = None
    snr_restricted: float | None = None


@lru_cache(maxsize=65536)
def _budget_drive(alpha_arm, chi, kappa, n_max):
    return epsilon_for_peak(alpha_arm, chi, kappa, n_max)


def _check(chi, kappa, tau, n_max):
    if not kappa > 0:
        raise DomainError("kappa", f"must be > 0, got {kappa}")
    if not tau > 0:
        raise DomainError("tau", f"must be > 0, got {tau}")
    if not n_max > 0:
        raise DomainError("n_max", f"must be > 0, got {n_max}")
    if not math.isfinite(chi):
        raise DomainError("chi", "must be finite")


def _snr_at(alpha_tilde, chi, kappa, tau, n_max):
    alpha = min(alpha_tilde, 1.0) * math.sqrt(n_max)
    eps = _budget_drive(alpha, chi, kappa, n_max)
    p = SchemeParams(chi=chi, kappa=kappa, epsilon1=eps, alpha_arm=alpha, n_max=n_max)
    return snr_ar_closed(p, tau).snr, eps


def _refine(f, grid, i):
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    return golden_max(f, lo, hi, tol=DEFAULT_TOL)


def optimize_alpha_arm(chi, kappa, tau, n_max, grid_points=DEFAULT_GRID_POINTS) -> OptimumArm:
    """Maximize the arm-and-release SNR over ``alpha_arm in [0, sqrt(n_max)]``.

    Each candidate is driven at :func:`epsilon_for_peak`. The search runs in
    the normalized amplitude ``alpha_arm / sqrt(n_max)``: a coarse uniform grid
    followed by golden-section refinement around the best grid cell.
    """
    _check(chi, kappa, tau, n_max)
    if grid_points < 3:
        raise DomainError("grid_points", "need at least 3 grid points")

    def f(x):
        return _snr_at(x, chi, kappa, tau, n_max)[0]

    grid = np.linspace(0.0, 1.0, grid_points)
    values = np.array([f(x) for x in grid])
    i = int(np.argmax(values))
    x_best, snr_best = _refine(f, grid, i)
    if snr_best < values[i]:
        x_best, snr_best = grid[i], values[i]

    if x_best == 0.0:
        boundary = Boundary.AT_ZERO
    elif x_best == 1.0:
        boundary = Boundary.AT_BUDGET
    else:
        boundary = Boundary.INTERIOR

    # best local maximum away from the dispersive endpoint
    restricted = None
    peaks = [
        j for j in range(1, grid_points)
        if values[j] >= values[j - 1] and (j == grid_points - 1 or values[j] >= values[j + 1])
    ]
    if peaks:
        j = max(peaks, key=lambda k: values[k])
        lo = grid[j - 1] if j - 1 > 0 else grid[1]
        hi = grid[min(j + 1, grid_points - 1)]
        restricted = golden_max(f, lo, hi, tol=DEFAULT_TOL)

    eps_best = _snr_at(x_best, chi, kappa, tau, n_max)[1]
    snr_disp, eps_disp = _snr_at(0.0, chi, kappa, tau, n_max)
    return OptimumArm(
        alpha_arm_opt=float(x_best * math.sqrt(n_max)),
        alpha_tilde=float(x_best),
        snr_opt=float(snr_best),
        epsilon1_opt=float(eps_best),
        boundary=boundary,
        snr_dispersive=float(snr_disp),
        epsilon1_dispersive=float(eps_disp),
        alpha_tilde_restricted=None if restricted is None else float(restricted[0]),
        snr_restricted=None if restricted is None else float(restricted[1]),
    )


def snr_dispersive(chi, kappa, tau, n_max):
    _check(chi, kappa, tau, n_max)
    return _snr_at(0.0, chi, kappa, tau, n_max)[0]


def gain_ar(chi, kappa, tau, n_max, grid_points=DEFAULT_GRID_POINTS):
    opt = optimize_alpha_arm(chi, kappa, tau, n_max, grid_points)
    return opt.snr_opt / opt.snr_dispersive


def _snr_al_budget(chi, kappa, tau, n_max):
    if chi == 0:
        raise DomainError("chi", "gains are undefined at chi = 0 (every SNR vanishes)")
    return snr_al_closed(alpha_arm_for_al(chi, kappa, n_max), chi, kappa, tau).snr


def gain_al(chi, kappa, tau, n_max):
    _check(chi, kappa, tau, n_max)
    return _snr_al_budget(chi, kappa, tau, n_max) / snr_dispersive(chi, kappa, tau, n_max)


def gain_ratio(chi, kappa, tau, n_max, grid_points=DEFAULT_GRID_POINTS):
    """Arm-and-longitudinal SNR over the best arm-and-release SNR."""
    opt = optimize_alpha_arm(chi, kappa, tau, n_max, grid_points)
    return _snr_al_budget(chi, kappa, tau, n_max) / opt.snr_opt


# ---------------------------------------------------------------------------
# gain maps


@dataclass(frozen=True)
class GainCell:
    gain_ar: float = math.nan
    gain_al: float = math.nan
    gain_ratio: float = math.nan
    alpha_tilde: float = math.nan
    alpha_tilde_restricted: float | None = None
    boundary: Boundary | None = None
    recommended: SchemeKind | None = None
    error: str | None = None


def _cell(chi, kappa, tau, n_max, grid_points):
    try:
        opt = optimize_alpha_arm(chi, kappa, tau, n_max, grid_points)
        snr_al = _snr_al_budget(chi, kappa, tau, n_max)
    except Exception as exc:  # recorded per cell, the map keeps going
        return GainCell(error=f"{type(exc).__name__}: {exc}")
    ratio = snr_al / opt.snr_opt
    return GainCell(
        gain_ar=opt.snr_opt / opt.snr_dispersive,
        gain_al=snr_al / opt.snr_dispersive,
        gain_ratio=ratio,
        alpha_tilde=opt.alpha_tilde,
        alpha_tilde_restricted=opt.alpha_tilde_restricted,
        boundary=opt.boundary,
        recommended=choose_scheme(ratio),
    )


def _row(args):
    chi, kappa, taus, n_max, grid_points = args
    return [_cell(chi, kappa, tau, n_max, grid_points) for tau in taus]


@dataclass(frozen=True)
class GainMap:
    chi_over_kappa_axis: np.ndarray
    kappa_tau_axis: np.ndarray
    cells: list  # cells[i][j] for chi_axis[i], tau_axis[j]
    n_max: float
    metadata: dict = field(default_factory=dict)

    def field(self, name):
        """2-D float array of one cell attribute, indexed ``[chi, tau]``."""
        def conv(v):
            if v is None:
                return math.nan
            if isinstance(v, enum.Enum):
                return {SchemeKind.ARM_LONGITUDINAL: 1.0, SchemeKind.ARM_RELEASE: 0.0}.get(v, math.nan)
            return float(v)

        return np.array([[conv(getattr(c, name)) for c in row] for row in self.cells])


def default_jobs():
    env = os.environ.get("READOUT_FORGE_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def gain_map(chi_axis, tau_axis, n_max, kappa=1.0, jobs=None, grid_points=DEFAULT_GRID_POINTS) -> GainMap:
    """Evaluate gains on the ``(|chi|/kappa, kappa tau)`` grid.

    Rows (one per ``chi``) are independent and are farmed out to a process
    pool of ``jobs`` workers; results do not depend on the evaluation order.
    """
    chi_axis = np.asarray(chi_axis, dtype=float)
    tau_axis = np.asarray(tau_axis, dtype=float)
    for name, axis in (("chi_axis", chi_axis), ("tau_axis", tau_axis)):
        if axis.ndim != 1 or len(axis) == 0:
            raise DomainError(name, "axis must be a nonempty 1-D array")
        if np.any(np.diff(axis) <= 0):
            raise DomainError(name, "axis must be strictly increasing")
    if not n_max > 0:
        raise DomainError("n_max", f"must be > 0, got {n_max}")
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    tasks = [(float(c) * kappa, kappa, tuple(float(t) / kappa for t in tau_axis), n_max, grid_points)
             for c in chi_axis]
    if jobs == 1 or len(tasks) == 1:
        rows = [_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row, tasks))
    meta = {"grid_points": grid_points, "golden_tol": DEFAULT_TOL, "kappa": kappa, "jobs": jobs,
            "tie_break": TIE_BREAK}
    return GainMap(chi_axis, tau_axis, rows, n_max, meta)


# ---------------------------------------------------------------------------
# recommendation


@dataclass(frozen=True)
class Recommendation:
    scheme: SchemeKind
    alpha_arm: float
    drive: DriveProfile
    expected_snr: float
    expected_error: float
    gain_over_dispersive: float
    gain_ratio: float
    epsilon1: float | None = None
    rationale: str = ""

    def to_dict(self):
        return {
            "scheme": self.scheme.value,
            "alpha_arm": self.alpha_arm,
            "epsilon1": self.epsilon1,
            "drive": self.drive.to_dict(),
            "expected_snr": self.expected_snr,
            "expected_error": self.expected_error,
            "gain_over_dispersive": self.gain_over_dispersive,
            "gain_ratio": self.gain_ratio,
            "rationale": self.rationale,
        }


def choose_scheme(ratio):
    """Decision rule on the gain ratio; ties go to arm-and-longitudinal."""
    return SchemeKind.ARM_LONGITUDINAL if ratio >= 1 else SchemeKind.ARM_RELEASE


def recommend(chi, kappa, tau, n_max, grid_points=DEFAULT_GRID_POINTS) -> Recommendation:
    """Pick arm-and-longitudinal when it beats the best arm-and-release, else arm-and-release."""
    opt = optimize_alpha_arm(chi, kappa, tau, n_max, grid_points)
    snr_al = _snr_al_budget(chi, kappa, tau, n_max)
    ratio = snr_al / opt.snr_opt
    if choose_scheme(ratio) is SchemeKind.ARM_LONGITUDINAL:
        alpha = alpha_arm_for_al(chi, kappa, n_max)
        rationale = f"gain ratio {ratio:.6g} >= 1"
        if ratio == 1:
            rationale += "; " + TIE_BREAK
        return Recommendation(
            scheme=SchemeKind.ARM_LONGITUDINAL,
            alpha_arm=alpha,
            drive=DriveProfile.arm_longitudinal(alpha, chi, kappa),
            expected_snr=snr_al,
            expected_error=assignment_error(snr_al),
            gain_over_dispersive=snr_al / opt.snr_dispersive,
            gain_ratio=ratio,
            rationale=rationale,
        )
    return Recommendation(
        scheme=SchemeKind.ARM_RELEASE,
        alpha_arm=opt.alpha_arm_opt,
        drive=DriveProfile.constant(opt.epsilon1_opt),
        expected_snr=opt.snr_opt,
        expected_error=assignment_error(opt.snr_opt),
        gain_over_dispersive=opt.snr_opt / opt.snr_dispersive,
        gain_ratio=ratio,
        epsilon1=opt.epsilon1_opt,
        rationale=f"gain ratio {ratio:.6g} < 1; arming amplitude at {opt.boundary.value} optimum",
    )
