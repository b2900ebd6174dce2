"""Value types and unit conventions for the semiclassical readout models.

All semiclassical computation is dimensionless: frequencies are measured in
units of the cavity decay rate ``kappa`` and times in units of ``1/kappa``.
The cavity is pulled by ``-chi/2`` when the qubit is in the ground state and
by ``+chi/2`` when it is excited.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError


class SchemeKind(str, enum.Enum):
    DISPERSIVE = "dispersive"
    ARM_RELEASE = "arm_and_release"
    ARM_LONGITUDINAL = "arm_and_longitudinal"

    @classmethod
    def parse(cls, value):
        """Accept enum members, their values, or the short CLI aliases."""
        if isinstance(value, cls):
            return value
        aliases = {
            "disp": cls.DISPERSIVE,
            "dispersive": cls.DISPERSIVE,
            "ar": cls.ARM_RELEASE,
            "a&r": cls.ARM_RELEASE,
            "arm_and_release": cls.ARM_RELEASE,
            "al": cls.ARM_LONGITUDINAL,
            "a&l": cls.ARM_LONGITUDINAL,
            "arm_and_longitudinal": cls.ARM_LONGITUDINAL,
        }
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise DomainError("scheme", f"unknown scheme {value!r}") from None


@dataclass(frozen=True)
class SchemeParams:
    """Semiclassical readout parameters.

    Attributes
    ----------
    chi : float
        Full dispersive shift.
    kappa : float
        Cavity energy decay rate, > 0.
    epsilon1 : float
        Constant drive amplitude (same units as ``kappa``), >= 0.
    alpha_arm : float
        Arming amplitude; the cavity starts in ``i * alpha_arm``.
    detuning : float
        ``omega_r - omega_1``.
    n_max : float
        Photon budget; ``alpha_arm**2`` may not exceed it.
    """

    chi: float
    kappa: float = 1.0
    epsilon1: float = 0.0
    alpha_arm: float = 0.0
    detuning: float = 0.0
    n_max: float = math.inf

    def with_(self, **changes):
        return replace(self, **changes)

    @property
    def scheme(self):
        return SchemeKind.DISPERSIVE if self.alpha_arm == 0 else SchemeKind.ARM_RELEASE


def validate(params: SchemeParams) -> SchemeParams:
    """Return ``params`` unchanged, or raise DomainError naming the broken invariant."""
    for name in ("chi", "kappa", "epsilon1", "alpha_arm", "detuning"):
        if not math.isfinite(getattr(params, name)):
            raise DomainError(name, "must be finite")
    if not params.kappa > 0:
        raise DomainError("kappa", f"must be > 0, got {params.kappa}")
    if not params.n_max > 0:
        raise DomainError("n_max", f"must be > 0, got {params.n_max}")
    if params.alpha_arm < 0:
        raise DomainError("alpha_arm", f"must be >= 0, got {params.alpha_arm}")
    if params.epsilon1 < 0:
        raise DomainError("epsilon1", f"must be >= 0, got {params.epsilon1}")
    if params.alpha_arm**2 > params.n_max * (1 + 1e-12):
        raise DomainError(
            "alpha_arm",
            f"armed photon number {params.alpha_arm**2:g} exceeds n_max={params.n_max:g}",
        )
    return params


def to_dimensionless(
    *,
    chi: float,
    kappa: float,
    epsilon1: float = 0.0,
    detuning: float = 0.0,
    alpha_arm: float = 0.0,
    n_max: float = math.inf,
) -> SchemeParams:
    """Convert linear frequencies (``value/2pi`` in MHz) to units of kappa.

    Every frequency is first turned into an angular frequency so the ratios
    do not depend on whether the caller quoted ``f`` or ``omega``.
    """
    if not kappa > 0:
        raise DomainError("kappa", f"must be > 0, got {kappa}")
    kappa_ang = 2 * math.pi * kappa

    def scale(f_mhz):
        return 2 * math.pi * f_mhz / kappa_ang

    return validate(
        SchemeParams(
            chi=scale(chi),
            kappa=1.0,
            epsilon1=scale(epsilon1),
            alpha_arm=alpha_arm,
            detuning=scale(detuning),
            n_max=n_max,
        )
    )


@dataclass(frozen=True)
class Trajectory:
    """Sampled pointer-state amplitudes for both qubit states."""

    times: np.ndarray
    alpha_g: np.ndarray
    alpha_e: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        ag = np.asarray(self.alpha_g, dtype=complex)
        ae = np.asarray(self.alpha_e, dtype=complex)
        if times.ndim != 1 or len(times) < 2:
            raise DomainError("times", "need a 1-D grid with at least two points")
        if ag.shape != times.shape or ae.shape != times.shape:
            raise DomainError("alpha", "amplitude arrays must match the time grid")
        if times[0] != 0.0:
            raise DomainError("times", "grid must start at t = 0")
        if np.any(np.diff(times) <= 0):
            raise DomainError("times", "grid must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "alpha_g", ag)
        object.__setattr__(self, "alpha_e", ae)

    def __len__(self):
        return len(self.times)

    @property
    def separation(self):
        """``Re[alpha_e - alpha_g]``, the homodyne signal."""
        return (self.alpha_e - self.alpha_g).real


@dataclass(frozen=True)
class DriveProfile:
    """Time-dependent drive amplitude ``epsilon1(t)``.

    Build instances with :meth:`constant`, :meth:`arm_longitudinal` or
    :meth:`tabulated`; evaluate by calling the instance on scalars or arrays.
    """

    kind: str
    epsilon1: float = 0.0
    alpha_arm: float = 0.0
    chi: float = 0.0
    kappa: float = 1.0
    table_t: tuple = field(default=(), repr=False)
    table_v: tuple = field(default=(), repr=False)

    @classmethod
    def constant(cls, epsilon1):
        if not (math.isfinite(epsilon1) and epsilon1 >= 0):
            raise DomainError("epsilon1", f"must be finite and >= 0, got {epsilon1}")
        return cls("constant", epsilon1=float(epsilon1))

    @classmethod
    def arm_longitudinal(cls, alpha_arm, chi, kappa):
        if not alpha_arm > 0:
            raise DomainError("alpha_arm", "longitudinal synthesis needs alpha_arm > 0")
        if not kappa > 0:
            raise DomainError("kappa", f"must be > 0, got {kappa}")
        return cls(
            "arm_longitudinal", alpha_arm=float(alpha_arm), chi=float(chi), kappa=float(kappa)
        )

    @classmethod
    def tabulated(cls, times, values):
        """Piecewise-linear profile; holds the last value beyond the table."""
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 2:
            raise DomainError("table", "need matching 1-D arrays with >= 2 samples")
        if t[0] != 0 or np.any(np.diff(t) <= 0):
            raise DomainError("table", "times must start at 0 and increase strictly")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("table", "drive values must be finite and >= 0")
        return cls("tabulated", table_t=tuple(t), table_v=tuple(v))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            out = np.full_like(t, self.epsilon1)
        elif self.kind == "arm_longitudinal":
            k = self.kappa
            out = self.alpha_arm * (self.chi**2 / k) * -np.expm1(-k * t / 2) + self.alpha_arm * k
        else:
            out = np.interp(t, self.table_t, self.table_v)
        return out if out.ndim else float(out)

    def to_dict(self):
        if self.kind == "tabulated":
            return {"kind": self.kind, "times": list(self.table_t), "values": list(self.table_v)}
        if self.kind == "constant":
            return {"kind": self.kind, "epsilon1": self.epsilon1}
        return {"kind": self.kind, "alpha_arm": self.alpha_arm, "chi": self.chi, "kappa": self.kappa}
