"""Multilevel transmon coupled to a driven, damped cavity.

The undriven Hamiltonian on the product space is::

    H0 = omega_r a^dag a + 4 E_C n_tr^2 - E_J cos(phi_tr) + i g n_tr (a^dag - a)

and the cavity drive ``H1(t) = i eps(t) sin(omega_1 t) (a^dag - a)`` is kept
without a rotating-wave approximation. Frequencies in :class:`TransmonParams`
are linear (MHz); dynamics run in rad/us with times in us.

Evolution happens in the dressed eigenbasis of ``H0``, where ``-i[H0, .]`` is
an elementwise phase. The remaining drive and dissipator are integrated with
an integrating-factor (Lawson) fourth-order Runge-Kutta step.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import linalg

from .core import SchemeKind
from .errors import (
    ConvergenceError,
    DomainError,
    LabelingError,
    RangeError,
    TraceDriftError,
    TruncationError,
)
from .semiclassical import alpha_arm_for_al

TWO_PI = 2 * math.pi
GUARD_BAND = 5
STEPS_PER_PERIOD = 40
TRACE_TOL = 1e-5
TOP_FOCK_TOL = 1e-4
DIM_WARN = 10_000


@dataclass(frozen=True)
class TransmonParams:
    """Device parameters in MHz (value / 2 pi) plus basis cutoffs."""

    EJ: float
    EC: float
    g: float
    omega_r: float
    kappa: float
    n_transmon_levels: int = 6
    fock_cutoff: int = 25
    charge_cutoff: int = 40

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)


FIG4_DEVICE = dict(EJ=16930.0, EC=200.4, g=159.1, omega_r=7655.0)


def validate_transmon(p: TransmonParams) -> TransmonParams:
    for name in ("EJ", "EC", "g", "omega_r", "kappa"):
        v = getattr(p, name)
        if not math.isfinite(v):
            raise DomainError(name, f"must be finite, got {v}")
    for name in ("EJ", "EC", "omega_r", "kappa"):
        if getattr(p, name) <= 0:
            raise DomainError(name, f"must be > 0, got {getattr(p, name)}")
    if p.n_transmon_levels < 3:
        raise DomainError("n_transmon_levels", "must be >= 3")
    if p.fock_cutoff < 4:
        raise DomainError("fock_cutoff", "must be >= 4")
    if p.charge_cutoff < 20:
        raise DomainError("charge_cutoff", "must be >= 20")
    if p.EJ / p.EC < 20:
        warnings.warn(f"EJ/EC = {p.EJ / p.EC:.3g} is outside the transmon regime", stacklevel=2)
    return p


@dataclass(frozen=True)
class TransmonSpectrum:
    energies: np.ndarray  # lowest levels, MHz
    charge: np.ndarray  # <j|n_tr|k> in the eigenbasis


def diagonalize_transmon(EC, EJ, charge_cutoff, n_levels) -> TransmonSpectrum:
    """Lowest ``n_levels`` eigenpairs of the transmon in the charge basis.

    Charge states ``n = -N..N`` with ``N = charge_cutoff``; the cosine couples
    neighbours with ``-EJ/2``. Offset charge is zero.
    """
    if n_levels > 2 * charge_cutoff + 1:
        raise DomainError("n_levels", "exceeds the charge-basis dimension")
    n = np.arange(-charge_cutoff, charge_cutoff + 1, dtype=float)
    diag = 4 * EC * n**2
    off = np.full(len(n) - 1, -EJ / 2)
    try:
        w, v = linalg.eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))
    except linalg.LinAlgError as exc:
        raise ConvergenceError(f"transmon eigensolver failed: {exc}") from exc
    # fix the sign gauge so results are reproducible across LAPACK builds
    for k in range(v.shape[1]):
        j = np.argmax(np.abs(v[:, k]))
        if v[j, k] < 0:
            v[:, k] *= -1
    charge = v.T @ (n[:, None] * v)
    return TransmonSpectrum(w, charge)


def _ladder(dim):
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def _bare_hamiltonian(p: TransmonParams):
    tr = diagonalize_transmon(p.EC, p.EJ, p.charge_cutoff, p.n_transmon_levels)
    nf = p.fock_cutoff
    a = _ladder(nf)
    h = (
        p.omega_r * np.kron(np.eye(p.n_transmon_levels), a.T @ a)
        + np.kron(np.diag(tr.energies), np.eye(nf))
        + p.g * np.kron(tr.charge, 1j * (a.T - a))
    )
    return h, tr


@dataclass(frozen=True)
class DressedSpectrum:
    """Dressed eigenpairs of ``H0`` organised into transmon branches.

    ``branch_energy[i, n]`` is the eigenvalue labelled ``(i, n)``; ``chi[i, n]``
    satisfies ``branch_energy[i, n] = (omega_r_tilde + chi[i, n]) n + eps_tilde[i]``
    with ``chi[i, 0] := chi[i, 1]``. ``omega_r_tilde`` is the midpoint of the
    one-photon g and e branch frequencies.
    """

    params: TransmonParams
    energies: np.ndarray  # MHz, ascending
    vectors: np.ndarray  # columns in the bare product basis (transmon-major)
    labels: np.ndarray  # (dim, 2) bare label (i, n) of each eigenvector
    index: np.ndarray  # index[i, n] -> eigenvector number
    branch_energy: np.ndarray
    chi: np.ndarray
    omega_r_tilde: float
    eps_tilde: np.ndarray
    trusted_fock: int

    def overlap(self, i, n):
        k = self.index[i, n]
        return float(abs(self.vectors[i * self.params.fock_cutoff + n, k]) ** 2)


def dressed_spectrum(params: TransmonParams, guard_band=GUARD_BAND) -> DressedSpectrum:
    """Diagonalize ``H0`` and label eigenstates by maximum overlap.

    Within the trusted window (Fock number below ``fock_cutoff - guard_band``,
    transmon level below the top kept level) each bare label must be the
    dominant component of exactly one eigenstate; otherwise LabelingError.
    Remaining labels are filled greedily by decreasing overlap.
    """
    p = validate_transmon(params)
    nl, nf = p.n_transmon_levels, p.fock_cutoff
    trusted = nf - guard_band
    if trusted < 3:
        raise DomainError("fock_cutoff", f"too small for guard band {guard_band}")
    h, _ = _bare_hamiltonian(p)
    w, v = np.linalg.eigh(h)
    weight = np.abs(v) ** 2  # weight[bare, eig]
    dim = nl * nf
    dominant = np.argmax(weight, axis=0)

    claims = {}
    for k, b in enumerate(dominant):
        claims.setdefault(int(b), []).append(k)
    conflicts = []
    for b, ks in claims.items():
        i, n = divmod(b, nf)
        if len(ks) > 1 and i < nl - 1 and n < trusted:
            conflicts.append(((i, n), [(k, float(weight[b, k])) for k in ks]))
    if conflicts:
        detail = "; ".join(f"label {lab} claimed by " + ", ".join(f"#{k} ({o:.3f})" for k, o in ks)
                           for lab, ks in conflicts)
        raise LabelingError(f"ambiguous branch labels: {detail}", conflicts)

    label_of = np.full(dim, -1)
    owner = np.full(dim, -1)
    for k, b in enumerate(dominant):
        i, n = divmod(int(b), nf)
        if len(claims[int(b)]) == 1 and i < nl - 1 and n < trusted:
            label_of[k], owner[b] = b, k
    order = np.argsort(-weight, axis=None, kind="stable")
    for flat in order:
        b, k = divmod(int(flat), dim)
        if label_of[k] < 0 and owner[b] < 0:
            label_of[k], owner[b] = b, k

    index = owner.reshape(nl, nf)
    branch = w[index]
    eps_tilde = branch[:, 0].copy()
    freq = np.empty_like(branch)
    nn = np.arange(1, nf)
    freq[:, 1:] = (branch[:, 1:] - eps_tilde[:, None]) / nn
    freq[:, 0] = freq[:, 1]
    omega_r_tilde = 0.5 * (freq[0, 1] + freq[1, 1])
    labels = np.stack(np.divmod(label_of, nf), axis=1)
    return DressedSpectrum(p, w, v, labels, index, branch, freq - omega_r_tilde, omega_r_tilde,
                           eps_tilde, trusted)


def chi_at_target(spec: DressedSpectrum, n_tar: int):
    """Full shift ``chi_e - chi_g`` at ``n_tar`` and the midpoint drive frequency (MHz)."""
    if not 0 <= n_tar < spec.trusted_fock:
        raise RangeError(f"n_tar={n_tar} outside the trusted Fock window [0, {spec.trusted_fock})")
    cg, ce = spec.chi[0, n_tar], spec.chi[1, n_tar]
    return float(ce - cg), float(spec.omega_r_tilde + 0.5 * (cg + ce))


# ---------------------------------------------------------------- dynamics


@dataclass(frozen=True)
class DressedOperators:
    """Operators of the bare cavity expressed in the dressed eigenbasis (rad/us)."""

    energies: np.ndarray
    a: np.ndarray
    x: np.ndarray  # i (a^dag - a)
    number: np.ndarray
    top_fock: np.ndarray
    branch: np.ndarray  # transmon label of each dressed state


def dressed_operators(spec: DressedSpectrum) -> DressedOperators:
    p = spec.params
    nl, nf = p.n_transmon_levels, p.fock_cutoff
    u = spec.vectors
    a_bare = np.kron(np.eye(nl), _ladder(nf))
    top = np.zeros(nf)
    top[-1] = 1.0
    top_bare = np.diag(np.tile(top, nl))

    def conj(op):
        return u.conj().T @ op @ u

    a = conj(a_bare)
    return DressedOperators(
        energies=TWO_PI * spec.energies,
        a=a,
        x=conj(1j * (a_bare.T - a_bare)),
        number=conj(a_bare.T @ a_bare),
        top_fock=np.real(np.diag(conj(top_bare))),
        branch=spec.labels[:, 0],
    )


def coherent_dressed_state(spec: DressedSpectrum, level: int, beta: complex, displacement="dressed") -> np.ndarray:
    """Armed initial state in dressed coordinates.

    Parameters
    ----------
    spec : DressedSpectrum
    level : int
        Transmon branch.
    beta : complex
        Coherent amplitude.
    displacement : {"dressed", "bare"}
        ``"dressed"`` builds the Poisson superposition of ``|level, n>``
        within the dressed branch (phases aligned to the bare states), which
        keeps the transmon in its branch. ``"bare"`` applies the bare-cavity
        displacement to the dressed ``|level, 0>``; away from ``g = 0`` this
        admixes neighbouring branches.
    """
    p = spec.params
    nl, nf = p.n_transmon_levels, p.fock_cutoff
    if displacement == "bare":
        a = _ladder(nf)
        disp = linalg.expm(beta * a.T - np.conj(beta) * a)
        psi = np.kron(np.eye(nl), disp) @ spec.vectors[:, spec.index[level, 0]]
        return spec.vectors.conj().T @ psi
    if displacement != "dressed":
        raise DomainError("displacement", f"expected 'dressed' or 'bare', got {displacement!r}")
    psi = np.zeros(len(spec.energies), complex)
    log_amp = -abs(beta) ** 2 / 2
    for n in range(spec.trusted_fock):
        k = spec.index[level, n]
        overlap = spec.vectors[level * nf + n, k]
        weight = np.exp(log_amp) * beta**n / math.sqrt(math.factorial(n))
        psi[k] = weight * np.conj(overlap) / abs(overlap)
    return psi / np.linalg.norm(psi)


@dataclass(frozen=True)
class Drive:
    """Envelope ``eps(t)`` (rad/us) on a carrier ``sin(omega_1 t)`` (rad/us)."""

    omega_1: float
    envelope: object

    def __call__(self, t):
        return self.envelope(t) * math.sin(self.omega_1 * t)


class ConstantEnvelope:
    def __init__(self, eps):
        self.eps = float(eps)

    def __call__(self, t):
        return self.eps


class LongitudinalEnvelope:
    """``alpha (chi^2/kappa)(1 - e^{-kappa t/2}) + alpha kappa`` in rad/us."""

    def __init__(self, alpha_arm, chi, kappa):
        self.alpha_arm, self.chi, self.kappa = float(alpha_arm), float(chi), float(kappa)

    def __call__(self, t):
        a, c, k = self.alpha_arm, self.chi, self.kappa
        return a * c * c / k * -math.expm1(-k * t / 2) + a * k


@dataclass
class FullSimResult:
    times: np.ndarray  # us
    a: np.ndarray  # lab-frame <a>
    a_demod: np.ndarray  # <a> e^{i omega_1 t}
    photons: np.ndarray
    populations: np.ndarray  # (time, transmon branch)
    leakage: np.ndarray  # population outside the g and e branches
    top_fock: np.ndarray
    trace_deviation: float
    min_eigenvalue: float
    step_error: float
    omega_1: float  # rad/us
    steps: int
    metadata: dict = field(default_factory=dict)


def _lindblad_rhs(ops, stack, kappa):
    dim = ops.a.shape[0]
    a_dag = ops.a.conj().T

    def rhs(t, rho, drive):
        prod = stack @ rho
        xr, nr, ar = prod[:dim], prod[dim:2 * dim], prod[2 * dim:]
        out = -1j * drive(t) * (xr - xr.conj().T)
        out += kappa * (ar @ a_dag - 0.5 * (nr + nr.conj().T))
        return out

    return rhs


def _lawson_step(rhs, drive, t, rho, h, half, full):
    k1 = rhs(t, rho, drive)
    y_half = half * rho
    k2 = rhs(t + h / 2, y_half + (h / 2) * (half * k1), drive)
    k3 = rhs(t + h / 2, y_half + (h / 2) * k2, drive)
    y_full = full * rho
    k4 = rhs(t + h, y_full + h * (half * k3), drive)
    return y_full + (h / 6) * (full * k1 + 2 * half * (k2 + k3) + k4)


def _phases(energies, h):
    gap = energies[:, None] - energies[None, :]
    return np.exp(-1j * gap * h / 2), np.exp(-1j * gap * h)


def evolve_master_equation(spec: DressedSpectrum, drive: Drive, rho0, t_end, n_out=61,
                           steps_per_period=STEPS_PER_PERIOD, ops=None, check=True) -> FullSimResult:
    """Integrate ``d rho/dt = -i[H0 + H1(t), rho] + kappa D[a] rho`` to ``t_end`` (us).

    ``rho0`` is a density matrix or state vector in dressed coordinates. The
    fixed step resolves the carrier with ``steps_per_period`` steps; at each
    output time a one-step vs. two-half-step comparison estimates the local
    error (``step_error``, max-norm).
    """
    p = spec.params
    ops = ops or dressed_operators(spec)
    dim = len(ops.energies)
    if dim > DIM_WARN:
        warnings.warn(f"density matrix of dimension {dim} is expensive", stacklevel=2)
    rho = np.asarray(rho0, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if rho.shape != (dim, dim):
        raise DomainError("initial", f"shape {rho.shape} does not match dimension {dim}")
    if not t_end > 0:
        raise DomainError("t_end", "must be > 0")
    if steps_per_period < 8:
        raise DomainError("steps_per_period", "must be >= 8")
    kappa = TWO_PI * p.kappa
    period = TWO_PI / drive.omega_1
    n_out = max(int(n_out), 2)
    per_out = max(1, math.ceil((t_end / (n_out - 1)) / (period / steps_per_period)))
    h = t_end / ((n_out - 1) * per_out)
    half, full = _phases(ops.energies, h)
    half2, full2 = _phases(ops.energies, h / 2)
    stack = np.concatenate([ops.x, ops.number, ops.a])
    rhs = _lindblad_rhs(ops, stack, kappa)

    times = np.linspace(0.0, t_end, n_out)
    a_exp = np.empty(n_out, complex)
    photons = np.empty(n_out)
    nbranch = int(ops.branch.max()) + 1
    pops = np.empty((n_out, nbranch))
    top = np.empty(n_out)
    trace_dev, min_eig, step_err = 0.0, np.inf, 0.0
    sample_eig = set(np.linspace(0, n_out - 1, 7).astype(int))

    def record(j, t, rho):
        nonlocal trace_dev, min_eig
        a_exp[j] = np.sum(ops.a * rho.T)
        photons[j] = np.real(np.sum(ops.number * rho.T))
        diag = np.real(np.diag(rho))
        pops[j] = np.bincount(ops.branch, weights=diag, minlength=nbranch)
        top[j] = float(np.dot(ops.top_fock, diag))
        trace_dev = max(trace_dev, abs(np.trace(rho) - 1))
        if j in sample_eig:
            min_eig = min(min_eig, float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]))

    record(0, 0.0, rho)
    t = 0.0
    step = 0
    for j in range(1, n_out):
        for s in range(per_out):
            if s == 0:
                one = _lawson_step(rhs, drive, t, rho, h, half, full)
                mid = _lawson_step(rhs, drive, t, rho, h / 2, half2, full2)
                two = _lawson_step(rhs, drive, t + h / 2, mid, h / 2, half2, full2)
                step_err = max(step_err, float(np.max(np.abs(one - two))))
                rho = one
            else:
                rho = _lawson_step(rhs, drive, t, rho, h, half, full)
            step += 1
            t = step * h
        record(j, t, rho)

    result = FullSimResult(
        times=times,
        a=a_exp,
        a_demod=a_exp * np.exp(1j * drive.omega_1 * times),
        photons=photons,
        populations=pops,
        leakage=pops[:, 2:].sum(axis=1),
        top_fock=top,
        trace_deviation=float(trace_dev),
        min_eigenvalue=float(min_eig),
        step_error=step_err,
        omega_1=drive.omega_1,
        steps=step,
        metadata={"dt_us": h, "steps_per_period": steps_per_period},
    )
    if check:
        if trace_dev > TRACE_TOL:
            raise TraceDriftError(f"trace deviation {trace_dev:.2e} exceeds {TRACE_TOL}", result)
        if top.max() > TOP_FOCK_TOL:
            raise TruncationError(
                f"top Fock population {top.max():.2e} exceeds {TOP_FOCK_TOL}; raise fock_cutoff", result
            )
    return result


# ---------------------------------------------------------------- readout runs


@dataclass(frozen=True)
class FullSimSettings:
    scheme: SchemeKind
    n_tar: int
    n_max: float
    horizon: float  # kappa t
    epsilon1: float | None = None  # MHz, dispersive only
    omega_1: float | None = None  # MHz, overrides the midpoint rule
    n_out: int = 61
    steps_per_period: int = STEPS_PER_PERIOD


@dataclass
class FullSimPair:
    ground: FullSimResult
    excited: FullSimResult
    metadata: dict


def _run_one(args):
    spec, drive, level, beta, t_end, n_out, spp, prep = args
    psi = coherent_dressed_state(spec, level, beta, prep)
    return evolve_master_equation(spec, drive, psi, t_end, n_out=n_out, steps_per_period=spp)


def run_readout_fullsim(scheme, params: TransmonParams, n_tar, n_max, horizon, epsilon1=None,
                        omega_1=None, n_out=61, steps_per_period=STEPS_PER_PERIOD, jobs=1,
                        spec=None, displacement="dressed") -> FullSimPair:
    """Run the g and e initializations of one readout scheme.

    ``horizon`` is in units of ``1/kappa``. The arm-and-longitudinal run
    starts from a coherent state of amplitude ``i alpha_arm`` on branch ``i``
    (see ``coherent_dressed_state`` for ``displacement``) with ``alpha_arm``
    fixed by the budget and ``chi_{n_tar}``; the dispersive run starts in vacuum with a
    constant drive ``epsilon1`` (MHz). Frequencies default to the midpoint rule.
    """
    scheme = SchemeKind.parse(scheme)
    spec = spec or dressed_spectrum(params)
    chi_mhz, w1_mhz = chi_at_target(spec, n_tar)
    if omega_1 is not None:
        w1_mhz = float(omega_1)
    kappa = TWO_PI * params.kappa
    chi = TWO_PI * chi_mhz
    if scheme is SchemeKind.ARM_LONGITUDINAL:
        if not n_max > 0:
            raise DomainError("n_max", "must be > 0")
        alpha = alpha_arm_for_al(chi_mhz / params.kappa, 1.0, n_max)
        envelope = LongitudinalEnvelope(alpha, chi, kappa)
    elif scheme is SchemeKind.DISPERSIVE:
        if epsilon1 is None or epsilon1 < 0:
            raise DomainError("epsilon1", "dispersive run needs a drive amplitude >= 0 (MHz)")
        alpha = 0.0
        envelope = ConstantEnvelope(TWO_PI * epsilon1)
    else:
        raise DomainError("scheme", f"{scheme.value} is not simulated in the full model")
    drive = Drive(TWO_PI * w1_mhz, envelope)
    t_end = horizon / kappa
    tasks = [(spec, drive, level, 1j * alpha, t_end, n_out, steps_per_period, displacement)
             for level in (0, 1)]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=2) as pool:
            ground, excited = pool.map(_run_one, tasks)
    else:
        ground, excited = map(_run_one, tasks)
    meta = {
        "scheme": scheme.value,
        "params": params.to_dict(),
        "n_tar": n_tar,
        "n_max": n_max,
        "horizon_kappa_t": horizon,
        "chi_ntar_mhz": chi_mhz,
        "chi_ntar_over_kappa": chi_mhz / params.kappa,
        "omega_1_mhz": w1_mhz,
        "omega_r_tilde_mhz": spec.omega_r_tilde,
        "alpha_arm": alpha,
        "epsilon1_mhz": None if epsilon1 is None else float(epsilon1),
        "demodulation_frame": "omega_1",
        "initial_displacement": displacement,
        "steps_per_period": steps_per_period,
        "dt_us": ground.metadata["dt_us"],
        "trace_tol": TRACE_TOL,
        "top_fock_tol": TOP_FOCK_TOL,
        "trace_deviation": max(ground.trace_deviation, excited.trace_deviation),
        "min_eigenvalue": min(ground.min_eigenvalue, excited.min_eigenvalue),
        "step_error": max(ground.step_error, excited.step_error),
        "max_top_fock": float(max(ground.top_fock.max(), excited.top_fock.max())),
        "chi_table_mhz": chi_table(spec, spec.trusted_fock),
    }
    return FullSimPair(ground, excited, meta)


def chi_table(spec: DressedSpectrum, n_rows=None):
    """Rows ``{n, chi_g, chi_e, chi_n, omega_1}`` in MHz up to the trusted Fock window."""
    rows = []
    for n in range(n_rows or spec.trusted_fock):
        chi, w1 = chi_at_target(spec, n)
        rows.append({"n": n, "chi_g": float(spec.chi[0, n]), "chi_e": float(spec.chi[1, n]),
                     "chi_n": chi, "omega_1": w1})
    return rows


FULLSIM_COLUMNS = ("t", "re_a_g", "im_a_g", "re_a_e", "im_a_e", "n_g", "n_e", "leak_g", "leak_e")


def fullsim_rows(pair: FullSimPair):
    g, e = pair.ground, pair.excited
    cols = (g.times, g.a_demod.real, g.a_demod.imag, e.a_demod.real, e.a_demod.imag,
            g.photons, e.photons, g.leakage, e.leakage)
    return [tuple(float(c[k]) for c in cols) for k in range(len(g.times))]


def load_fullsim_config(path):
    """Read ``{"device": {...TransmonParams}, "run": {...}}`` from JSON."""
    with open(path) as fh:
        raw = json.load(fh)
    device = raw.get("device", {})
    run = raw.get("run", {})
    return TransmonParams(**device), run
