"""Spectral-valley analysis of vowels.

Measures the relative level of spectral valleys between formants, the
objective critical distance at which a valley meets the mean spectral level,
and front/back vowel classification built on valley-level differences.
"""

__version__ = "0.1.0"

from .envelope import ValleyMeasurement, locate_peak, mean_spectral_level, measure_v1_v2, rlsv
from .experiments import (
    OcdResult,
    SweepConfig,
    f0_influence_experiment,
    level_influence_experiment,
    ocd_sweep,
    pb_ocd_table,
    two_formant_curve,
)
from .scales import bark_to_hz, hz_to_bark
from .sigproc import (
    LpcModel,
    analytic_cascade_spectrum,
    autocorrelation,
    frame_signal,
    levinson,
    lpc_envelope,
    polynomial_roots,
    preemphasize,
    roots_to_formants,
    window,
)
from .synth import (
    Excitation,
    FormantLevels,
    apply_source_tilt,
    calibrate_bandwidths,
    measure_formant_levels,
    resonator_coefficients,
    synthesize,
)
from .types import FormantSpec, SignalBuffer, SpectralEnvelope

__all__ = [
    "Excitation",
    "FormantLevels",
    "FormantSpec",
    "LpcModel",
    "OcdResult",
    "SignalBuffer",
    "SpectralEnvelope",
    "SweepConfig",
    "ValleyMeasurement",
    "analytic_cascade_spectrum",
    "apply_source_tilt",
    "autocorrelation",
    "bark_to_hz",
    "calibrate_bandwidths",
    "f0_influence_experiment",
    "frame_signal",
    "hz_to_bark",
    "level_influence_experiment",
    "levinson",
    "locate_peak",
    "lpc_envelope",
    "mean_spectral_level",
    "measure_formant_levels",
    "measure_v1_v2",
    "ocd_sweep",
    "pb_ocd_table",
    "polynomial_roots",
    "preemphasize",
    "resonator_coefficients",
    "rlsv",
    "roots_to_formants",
    "synthesize",
    "two_formant_curve",
    "window",
]
