"""Semiclassical and full-model simulation of armed cavity readout schemes.

Dispersive, arm-and-release and arm-and-longitudinal readout are compared at a
common photon budget: pointer-state dynamics, matched-filter SNR, arming
optimization, scheme recommendation, and a multilevel-transmon Lindblad check.
"""

__version__ = "0.1.0"

from .core import DriveProfile, SchemeKind, SchemeParams, Trajectory, to_dimensionless, validate
from .errors import (
    ConvergenceError,
    DomainError,
    IntegrationError,
    LabelingError,
    QuadratureError,
    RangeError,
    ReadoutError,
    ResolutionError,
    TraceDriftError,
    TruncationError,
    UnsupportedCombination,
)
from .metrics import (
    SnrResult,
    assignment_error,
    snr_al_closed,
    snr_ar_closed,
    snr_asymptote,
    snr_longitudinal_reference,
    snr_numeric,
)
from .optimizer import gain_al, gain_ar, gain_map, gain_ratio, optimize_alpha_arm, recommend
from .semiclassical import (
    alpha_arm_for_al,
    amplitude_al,
    amplitude_ar,
    drive_al,
    epsilon_for_peak,
    integrate_eom,
    mean_photon,
    peak_photon,
    volterra_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
