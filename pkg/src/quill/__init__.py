"""Effective two-mode analysis of continuous-variable quantum illumination."""

from .errors import DomainError, NumericError, ParameterError, QuillError
from .gaussian import (
    SymplecticSpectrum,
    TwoModeCM,
    is_physical,
    mutual_info_renyi2,
    renyi2_entropy,
    symplectic_eigenvalues,
)
from .model import (
    EffectiveCM,
    Scenario,
    SourceKind,
    asymptotic_ratio,
    effective_cm,
    mi_ratio,
    mu_per_mode,
    mutual_info,
    object_absent_cm,
)
from .photon_stats import (
    CountMoments,
    DeltaStats,
    cauchy_schwarz_epsilon,
    count_moments,
    delta_stats,
    noise_reduction_factor,
    per_mode_moments,
    snr,
    snr_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "NumericError",
    "ParameterError",
    "QuillError",
    "SymplecticSpectrum",
    "TwoModeCM",
    "is_physical",
    "mutual_info_renyi2",
    "renyi2_entropy",
    "symplectic_eigenvalues",
    "EffectiveCM",
    "Scenario",
    "SourceKind",
    "asymptotic_ratio",
    "effective_cm",
    "mi_ratio",
    "mu_per_mode",
    "mutual_info",
    "object_absent_cm",
    "CountMoments",
    "DeltaStats",
    "cauchy_schwarz_epsilon",
    "count_moments",
    "delta_stats",
    "noise_reduction_factor",
    "per_mode_moments",
    "snr",
    "snr_ratio",
]
