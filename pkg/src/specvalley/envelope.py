"""Peak and valley analysis of spectral envelopes.

Two valley conventions live here, mirroring how the quantities are used:

- `rlsv` (labels V12/V23) reports mean level minus valley level. Positive
  means the valley dips below the mean; the zero crossing of this quantity
  under a formant-spacing sweep defines the objective critical distance.
- `measure_v1_v2` (labels V_I/V_II) reports each valley's level relative to
  the mean (valley minus mean). Back-vowel geometry puts the first valley
  high and the second low, so V_I > V_II for back vowels and the classifier's
  statistic mean(V_I) - mean(V_II) is simply the valley-level difference.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PeakNotFoundError, ValleyUndefinedError
from .types import SpectralEnvelope, power_mean_db


@dataclass
class ValleyMeasurement:
    """A valley between two formant peaks; see module docstring for sign."""

    v_db: float
    valley_freq: float
    lower_peak_freq: float
    upper_peak_freq: float
    label: str


def mean_spectral_level(env: SpectralEnvelope) -> float:
    """Level of the mean spectral power across the full grid, in dB."""
    if len(env.levels_db) == 0:
        raise ValueError("envelope is empty")
    return power_mean_db(env.levels_db)


def locate_peak(env: SpectralEnvelope, nominal_f: float, window_hz: float = 200.0):
    """Highest local maximum within +/-window_hz of nominal_f.

    Returns (peak_freq, peak_level) with parabolic refinement between bins.
    Raises PeakNotFoundError when no interior local maximum exists in the
    window, which is how merged formants surface.
    """
    freqs, db = env.freqs, env.levels_db
    if not freqs[0] <= nominal_f <= freqs[-1]:
        raise ValueError(f"nominal frequency {nominal_f} outside envelope grid")
    if window_hz <= env.grid_spacing_hz:
        raise ValueError("search window must exceed the grid spacing")
    lo = max(int(np.searchsorted(freqs, nominal_f - window_hz)), 1)
    hi = min(int(np.searchsorted(freqs, nominal_f + window_hz, side="right")), len(freqs) - 1)
    best = -1
    for i in range(lo, hi):
        if db[i] >= db[i - 1] and db[i] >= db[i + 1]:
            if best < 0 or db[i] > db[best]:
                best = i
    if best < 0:
        raise PeakNotFoundError(
            f"no spectral peak within {window_hz} Hz of {nominal_f} Hz"
        )
    # parabola through the three bins around the maximum
    ym, y0, yp = db[best - 1], db[best], db[best + 1]
    denom = ym - 2.0 * y0 + yp
    if denom < 0:
        shift = 0.5 * (ym - yp) / denom
        shift = float(np.clip(shift, -0.5, 0.5))
    else:
        shift = 0.0
    peak_freq = freqs[best] + shift * env.grid_spacing_hz
    peak_level = y0 - 0.25 * (ym - yp) * shift
    return float(peak_freq), float(peak_level)


def _valley_between(env: SpectralEnvelope, f_lo: float, f_hi: float):
    """Minimum level strictly between two frequencies; returns (freq, level)."""
    lo = int(np.searchsorted(env.freqs, f_lo, side="right"))
    hi = int(np.searchsorted(env.freqs, f_hi, side="left"))
    if hi - lo < 2:
        raise ValleyUndefinedError(
            f"fewer than two grid bins between {f_lo:.1f} and {f_hi:.1f} Hz"
        )
    seg = env.levels_db[lo:hi]
    k = int(np.argmin(seg))
    return float(env.freqs[lo + k]), float(seg[k])


def rlsv(
    env: SpectralEnvelope, lower_peak_f: float, upper_peak_f: float, label: str = "V12"
) -> ValleyMeasurement:
    """Relative level of the spectral valley between two located peaks.

    v_db = mean level - valley level; exactly zero when the valley touches
    the mean. The arguments are peak frequencies (already located).
    """
    if lower_peak_f >= upper_peak_f:
        raise ValueError("peaks must be ordered lower < upper")
    valley_freq, valley_level = _valley_between(env, lower_peak_f, upper_peak_f)
    return ValleyMeasurement(
        v_db=env.mean_level_db - valley_level,
        valley_freq=valley_freq,
        lower_peak_freq=lower_peak_f,
        upper_peak_freq=upper_peak_f,
        label=label,
    )


def measure_v1_v2(env: SpectralEnvelope, formants):
    """Relative valley levels V_I (between F1, F2) and V_II (between F2, F3).

    `formants` supplies the first three formants in ascending order; their
    frequencies anchor the valley brackets directly (root-derived anchors
    survive merged envelope peaks). Both values are measured against the same
    mean level, as valley minus mean.
    """
    freqs = [f.frequency for f in formants[:3]]
    if len(freqs) < 3:
        raise ValueError("three formants are required")
    if not freqs[0] < freqs[1] < freqs[2]:
        raise ValueError("formants must be in ascending frequency order")
    out = []
    for (f_lo, f_hi), label in zip(((freqs[0], freqs[1]), (freqs[1], freqs[2])), ("V_I", "V_II")):
        try:
            valley_freq, valley_level = _valley_between(env, f_lo, f_hi)
        except ValleyUndefinedError as exc:
            raise ValleyUndefinedError(f"{label}: {exc}") from exc
        out.append(
            ValleyMeasurement(
                v_db=valley_level - env.mean_level_db,
                valley_freq=valley_freq,
                lower_peak_freq=f_lo,
                upper_peak_freq=f_hi,
                label=label,
            )
        )
    return out[0], out[1]
