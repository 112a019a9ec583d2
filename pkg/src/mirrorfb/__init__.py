"""Feedback-cooled mirror toolkit.

Closed-form steady states, noise spectra and force-detection SNRs for a
cavity mirror under position (stochastic-cooling) or velocity (cold-damping)
feedback, cross-validated by a Monte Carlo Langevin simulator.
"""

from .core import (
    BistabilityResult,
    PhysicalParams,
    Scheme,
    SchemeParams,
    classical_steady_amplitude,
    to_dimensionless,
)
from .nonstat import (
    ForcePulse,
    MeasurementWindow,
    cyclic_avg_snr,
    nonstationary_noise,
    nonstationary_snr,
    signal_spectrum,
)
from .oracle import (
    CompareReport,
    EnsembleStats,
    InstabilityError,
    SimConfig,
    compare,
    paired_timestep_stats,
    simulate,
)
from .response import KernelSet, chi_freq, chi_time, kernels
from .spectra import (
    SpectrumSeries,
    default_grid,
    detected_noise_spectrum,
    optimal_power_at_frequency,
    position_noise_spectrum,
    stationary_snr,
)
from .steady import (
    BrownianMoments,
    MomentSet,
    NoiseStrengths,
    ThermalModel,
    brownian_exact,
    min_position_variance,
    noise_strengths,
    optimal_input_power,
    regime_flags,
    steady_energy,
    steady_moments,
)

__version__ = "0.1.0"

__all__ = [
    "BistabilityResult",
    "BrownianMoments",
    "CompareReport",
    "EnsembleStats",
    "ForcePulse",
    "InstabilityError",
    "KernelSet",
    "MeasurementWindow",
    "MomentSet",
    "NoiseStrengths",
    "PhysicalParams",
    "Scheme",
    "SchemeParams",
    "SimConfig",
    "SpectrumSeries",
    "ThermalModel",
    "brownian_exact",
    "chi_freq",
    "chi_time",
    "classical_steady_amplitude",
    "compare",
    "cyclic_avg_snr",
    "default_grid",
    "detected_noise_spectrum",
    "kernels",
    "min_position_variance",
    "noise_strengths",
    "nonstationary_noise",
    "nonstationary_snr",
    "optimal_input_power",
    "optimal_power_at_frequency",
    "paired_timestep_stats",
    "position_noise_spectrum",
    "regime_flags",
    "signal_spectrum",
    "simulate",
    "stationary_snr",
    "steady_energy",
    "steady_moments",
    "to_dimensionless",
]
