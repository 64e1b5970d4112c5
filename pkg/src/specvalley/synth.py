"""Cascaded formant synthesis and bandwidth-to-level calibration."""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .envelope import locate_peak
from .errors import CalibrationError, PeakNotFoundError
from .sigproc import analytic_cascade_spectrum
from .types import FormantSpec, SignalBuffer, SpectralEnvelope

EXCITATION_KINDS = ("unit-impulse", "impulse-train", "tilted-train")

# default corner of the single-pole source-tilt lowpass
TILT_CORNER_HZ = 50.0


@dataclass
class Excitation:
    """Synthesizer source: a single impulse or a (possibly tilted) pulse train."""

    kind: str = "unit-impulse"
    f0: float = 0.0
    tilt_db_per_octave: float = 0.0
    duration_s: float = 0.5

    def __post_init__(self):
        if self.kind not in EXCITATION_KINDS:
            raise ValueError(f"unknown excitation kind {self.kind!r}")
        if self.kind != "unit-impulse" and self.f0 <= 0:
            raise ValueError("pulse trains need a positive f0")
        if self.kind != "unit-impulse" and self.duration_s < 1.0 / self.f0:
            raise ValueError("duration too short for one period")


@dataclass
class FormantLevels:
    """Peak dB levels (L1, L2, ...) read off a spectral envelope."""

    levels: list = field(default_factory=list)

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, i):
        return self.levels[i]


def resonator_coefficients(f: FormantSpec, sample_rate: float):
    """Second-order recursive resonator as (b, a) filter taps.

    Poles at radius exp(-pi*B/fs) and angles +/-2*pi*F/fs; the numerator is
    scaled for unity gain at 0 Hz, keeping cascades well inside float range.
    """
    if f.frequency >= sample_rate / 2.0:
        raise ValueError(
            f"resonator frequency {f.frequency} Hz must be below Nyquist"
        )
    radius = np.exp(-np.pi * f.bandwidth / sample_rate)
    theta = 2 * np.pi * f.frequency / sample_rate
    a1 = -2.0 * radius * np.cos(theta)
    a2 = radius * radius
    return np.array([1.0 + a1 + a2]), np.array([1.0, a1, a2])


def _excitation_signal(exc: Excitation, sample_rate: float, n_samples: int) -> np.ndarray:
    x = np.zeros(n_samples)
    if exc.kind == "unit-impulse":
        x[0] = 1.0
        return x
    period = int(round(sample_rate / exc.f0))
    if period < 1:
        raise ValueError(f"f0 {exc.f0} Hz too high for sample rate {sample_rate}")
    x[::period] = 1.0
    if exc.kind == "tilted-train" and exc.tilt_db_per_octave != 0.0:
        x = _tilt_filter(x, sample_rate, exc.tilt_db_per_octave)
    return x


def _tilt_stages(db_per_octave: float) -> int:
    if db_per_octave > 0:
        raise ValueError("spectral tilt must be <= 0 dB/octave")
    stages = int(round(-db_per_octave / 6.0))
    if abs(-db_per_octave - 6.0 * stages) > 1e-9:
        raise ValueError("tilt is realized in -6 dB/octave stages; use a multiple of 6")
    return stages


def _tilt_filter(x: np.ndarray, sample_rate: float, db_per_octave: float) -> np.ndarray:
    pole = np.exp(-2 * np.pi * TILT_CORNER_HZ / sample_rate)
    for _ in range(_tilt_stages(db_per_octave)):
        x = lfilter([1.0 - pole], [1.0, -pole], x)
    return x


def source_tilt_db(freqs: np.ndarray, sample_rate: float, db_per_octave: float) -> np.ndarray:
    """dB response of the source-tilt lowpass on the given frequency grid."""
    stages = _tilt_stages(db_per_octave)
    if stages == 0:
        return np.zeros(len(freqs))
    pole = np.exp(-2 * np.pi * TILT_CORNER_HZ / sample_rate)
    zinv = np.exp(-2j * np.pi * np.asarray(freqs) / sample_rate)
    mag = np.abs((1.0 - pole) / (1.0 - pole * zinv))
    return stages * 20.0 * np.log10(mag)


def apply_source_tilt(x: SignalBuffer, db_per_octave: float) -> SignalBuffer:
    """Impose a falling source spectrum of db_per_octave (a multiple of -6).

    Realized as one single-pole lowpass (corner ~50 Hz) per -6 dB/octave, so
    only the mid-band slope is shaped; 0 is the identity.
    """
    if db_per_octave == 0.0:
        return SignalBuffer(x.samples.copy(), x.sample_rate)
    y = _tilt_filter(x.samples, x.sample_rate, db_per_octave)
    return SignalBuffer(y, x.sample_rate)


def synthesize(
    formants, exc: Excitation, sample_rate: float, n_samples: int | None = None
) -> SignalBuffer:
    """Run the excitation serially through one resonator per formant."""
    if n_samples is None:
        n_samples = int(round(exc.duration_s * sample_rate))
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    x = _excitation_signal(exc, sample_rate, n_samples)
    for f in formants:
        b, a = resonator_coefficients(f, sample_rate)
        x = lfilter(b, a, x)
    return SignalBuffer(x, sample_rate)


def measure_formant_levels(env: SpectralEnvelope, formants, window_hz: float = 200.0) -> FormantLevels:
    """Peak level nearest each formant frequency, within +/-window_hz."""
    levels = []
    for i, f in enumerate(formants):
        try:
            _, level = locate_peak(env, f.frequency, window_hz)
        except PeakNotFoundError as exc:
            raise PeakNotFoundError(
                f"formant {i + 1} at {f.frequency:.0f} Hz: {exc}", formant_index=i
            ) from exc
        levels.append(level)
    return FormantLevels(levels)


def _cascade_with_tilt(freqs3, bws3, extra_formants, exc, sample_rate, n_points=2048):
    formants = [FormantSpec(f, b) for f, b in zip(freqs3, bws3)]
    formants += list(extra_formants)
    formants.sort(key=lambda f: f.frequency)
    env = analytic_cascade_spectrum(formants, sample_rate, n_points)
    if exc.kind == "tilted-train" and exc.tilt_db_per_octave != 0.0:
        tilted = env.levels_db + source_tilt_db(env.freqs, sample_rate, exc.tilt_db_per_octave)
        env = SpectralEnvelope(env.freqs, tilted)
    return env


def calibrate_bandwidths(
    formant_freqs,
    target_levels: FormantLevels,
    exc: Excitation,
    sample_rate: float,
    initial_b1: float = 100.0,
    extra_formants=(),
    search_range=(30.0, 600.0),
    tolerance_db: float = 0.5,
    max_rounds: int = 50,
) -> np.ndarray:
    """Find bandwidths whose measured relative peak levels match the targets.

    Targets are interpreted relative to L1, which leaves B1 unconstrained; B1
    anchors at `initial_b1` while B2 and B3 are bisected over `search_range`
    against the analytic cascade spectrum (plus the excitation's source tilt),
    iterating until the relative levels land within `tolerance_db`. Raises
    CalibrationError listing the best residuals when a target is unreachable.
    """
    freqs3 = [float(f) for f in formant_freqs[:3]]
    if len(freqs3) != 3:
        raise ValueError("three formant frequencies are required")
    targets = [target_levels[i] - target_levels[0] for i in range(3)]
    bws = [float(initial_b1), 100.0, 100.0]
    lo_b, hi_b = search_range

    def measured_rel(bws_now):
        env = _cascade_with_tilt(freqs3, bws_now, extra_formants, exc, sample_rate)
        lv = measure_formant_levels(env, [FormantSpec(f, 100.0) for f in freqs3]).levels
        return [v - lv[0] for v in lv]

    residuals = None
    for _ in range(max_rounds):
        for i in (1, 2):
            lo, hi = lo_b, hi_b
            for _ in range(36):
                mid = 0.5 * (lo + hi)
                bws[i] = mid
                try:
                    rel = measured_rel(bws)
                except PeakNotFoundError:
                    hi = mid  # merged peak: bandwidth too wide
                    continue
                if rel[i] > targets[i]:
                    lo = mid  # level above target: widen
                else:
                    hi = mid
            bws[i] = 0.5 * (lo + hi)
        try:
            rel = measured_rel(bws)
        except PeakNotFoundError:
            continue
        residuals = [r - t for r, t in zip(rel, targets)]
        if all(abs(r) <= tolerance_db for r in residuals):
            return np.asarray(bws)
    raise CalibrationError(
        "bandwidth calibration did not reach the level targets",
        residuals_db=residuals if residuals is not None else [np.inf] * 3,
    )
