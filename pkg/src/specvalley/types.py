"""Shared value types: signals, formants, and sampled spectral envelopes."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FormantSpec:
    """One formant: center frequency and bandwidth, both in Hz."""

    frequency: float
    bandwidth: float

    def __post_init__(self):
        if not (np.isfinite(self.frequency) and self.frequency > 0):
            raise ValueError(f"formant frequency must be positive, got {self.frequency}")
        if not (np.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"formant bandwidth must be positive, got {self.bandwidth}")


@dataclass
class SignalBuffer:
    """Sampled real signal plus its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    def __len__(self):
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


def power_mean_db(levels_db: np.ndarray) -> float:
    """Level of the average spectral power, in dB.

    The average is taken in the linear power domain. Averaging the dB values
    themselves would sit far below every peak for resonant spectra and could
    never equal a valley level, which is the crossing this analysis is built on.
    """
    levels_db = np.asarray(levels_db, dtype=np.float64)
    return float(10.0 * np.log10(np.mean(10.0 ** (levels_db / 10.0))))


@dataclass
class SpectralEnvelope:
    """Log-magnitude spectrum sampled on a uniform frequency grid.

    `mean_level_db` is the level of the mean spectral power over the grid
    (see `power_mean_db`), computed at construction.
    """

    freqs: np.ndarray
    levels_db: np.ndarray
    mean_level_db: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=np.float64)
        self.levels_db = np.asarray(self.levels_db, dtype=np.float64)
        if self.freqs.shape != self.levels_db.shape or self.freqs.ndim != 1:
            raise ValueError("freqs and levels_db must be 1-D arrays of equal length")
        if len(self.freqs) >= 2 and not np.all(np.diff(self.freqs) > 0):
            raise ValueError("frequency grid must be strictly increasing")
        if not np.all(np.isfinite(self.levels_db)):
            raise ValueError("envelope levels must be finite")
        if self.mean_level_db is None:
            self.mean_level_db = power_mean_db(self.levels_db)

    @property
    def grid_spacing_hz(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    def shifted(self, gain_db: float) -> "SpectralEnvelope":
        """Same envelope with a constant dB offset applied everywhere."""
        return SpectralEnvelope(self.freqs, self.levels_db + gain_db)
