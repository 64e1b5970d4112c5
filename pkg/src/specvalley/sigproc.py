"""Core signal processing: framing, linear prediction, roots, and spectra."""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    NumericFailureError,
    SingularEnvelopeError,
    UnstableModelError,
)
from .types import FormantSpec, SignalBuffer, SpectralEnvelope

WINDOW_KINDS = ("hamming", "hann", "rectangular")


@dataclass
class LpcModel:
    """All-pole predictor: A(z) = 1 - sum_k coefficients[k-1] * z^-k."""

    order: int
    coefficients: np.ndarray
    gain: float
    sample_rate: float

    @property
    def a_polynomial(self) -> np.ndarray:
        """Error-filter taps [1, -a_1, ..., -a_p] (powers of z^-1)."""
        return np.concatenate(([1.0], -np.asarray(self.coefficients, dtype=np.float64)))


def preemphasize(x: SignalBuffer, alpha: float) -> SignalBuffer:
    """First-difference high-pass: y[n] = x[n] - alpha*x[n-1], y[0] = x[0]."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"pre-emphasis coefficient must be in [0, 1), got {alpha}")
    s = x.samples
    y = np.empty_like(s)
    if len(s):
        y[0] = s[0]
        y[1:] = s[1:] - alpha * s[:-1]
    return SignalBuffer(y, x.sample_rate)


def frame_signal(x: SignalBuffer, frame_ms: float, overlap_fraction: float) -> np.ndarray:
    """Slice into fixed frames; returns an (n_frames, frame_len) array.

    Hop is frame_len*(1 - overlap_fraction) rounded to the nearest sample;
    a trailing partial frame is discarded. A signal shorter than one frame
    yields zero frames (shape (0, frame_len)), not an error.
    """
    if frame_ms <= 0:
        raise ValueError("frame_ms must be positive")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError("overlap_fraction must be in [0, 1)")
    frame_len = int(round(frame_ms / 1000.0 * x.sample_rate))
    if frame_len < 1:
        raise ValueError("frame shorter than one sample")
    hop = max(int(round(frame_len * (1.0 - overlap_fraction))), 1)
    n = len(x.samples)
    if n < frame_len:
        return np.empty((0, frame_len))
    count = 1 + (n - frame_len) // hop
    idx = np.arange(frame_len)[None, :] + hop * np.arange(count)[:, None]
    return x.samples[idx]


def window(frame: np.ndarray, kind: str = "hamming") -> np.ndarray:
    """Apply a named window; 'rectangular' is the identity."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise ValueError("frame must be non-empty")
    n = frame.shape[-1]
    if kind == "rectangular":
        return frame.copy()
    if kind == "hamming":
        w = 0.54 - 0.46 * np.cos(2 * np.pi * np.arange(n) / (n - 1)) if n > 1 else np.ones(1)
    elif kind == "hann":
        w = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / (n - 1)) if n > 1 else np.ones(1)
    else:
        raise ValueError(f"unknown window kind {kind!r}; expected one of {WINDOW_KINDS}")
    return frame * w


def autocorrelation(frame: np.ndarray, max_lag: int) -> np.ndarray:
    """r[k] = sum_n x[n]*x[n+k] for k = 0..max_lag."""
    frame = np.asarray(frame, dtype=np.float64)
    n = len(frame)
    if max_lag >= n:
        raise ValueError(f"max_lag {max_lag} must be < frame length {n}")
    full = np.correlate(frame, frame, mode="full")
    return full[n - 1 : n + max_lag]


def levinson(r: np.ndarray, order: int, sample_rate: float) -> LpcModel:
    """Solve the autocorrelation normal equations by Levinson-Durbin.

    Returns the predictor model; gain^2 = r[0]*prod(1 - k_i^2). Raises
    DegenerateInputError for r[0] <= 0 and UnstableModelError (with the
    offending stage) when a reflection coefficient leaves [-1, 1].
    """
    r = np.asarray(r, dtype=np.float64)
    if order < 1:
        raise ValueError("order must be >= 1")
    if len(r) < order + 1:
        raise ValueError(f"need {order + 1} autocorrelation lags, got {len(r)}")
    if r[0] <= 0:
        raise DegenerateInputError(f"zero-lag autocorrelation must be positive, got {r[0]}")
    a = np.zeros(order + 1)
    a[0] = 1.0
    e = r[0]
    for m in range(1, order + 1):
        if e <= 0:
            raise UnstableModelError(f"prediction error vanished at stage {m}", stage=m)
        k = -np.dot(a[:m], r[m:0:-1]) / e
        if abs(k) > 1.0 + 1e-12:
            raise UnstableModelError(
                f"reflection coefficient {k:.6g} outside [-1, 1] at stage {m}", stage=m
            )
        a[: m + 1] += k * a[m::-1]
        e *= 1.0 - k * k
    return LpcModel(
        order=order,
        coefficients=-a[1:],
        gain=float(np.sqrt(max(e, 0.0))),
        sample_rate=sample_rate,
    )


def lpc_envelope(m: LpcModel, n_points: int = 1024) -> SpectralEnvelope:
    """dB magnitude of gain/A(e^jw) on n_points uniform frequencies to Nyquist."""
    if n_points < 64:
        raise ValueError("n_points must be >= 64")
    if m.gain <= 0:
        raise SingularEnvelopeError("model gain must be positive for a dB envelope")
    nfft = 2 * (n_points - 1)
    a = m.a_polynomial
    spec = np.fft.rfft(a, nfft)
    mag = np.abs(spec)
    if np.any(mag == 0.0):
        raise SingularEnvelopeError("predictor has a root on the evaluation grid")
    levels = 20.0 * np.log10(m.gain / mag)
    if not np.all(np.isfinite(levels)):
        raise SingularEnvelopeError("non-finite dB level in envelope")
    freqs = np.linspace(0.0, m.sample_rate / 2.0, n_points)
    return SpectralEnvelope(freqs, levels)


def polynomial_roots(coeffs: np.ndarray) -> np.ndarray:
    """All complex roots via companion-matrix eigenvalues.

    `coeffs` are ordered highest degree first; the leading coefficient must be
    nonzero and the degree at least 1.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim != 1 or len(c) < 2:
        raise ValueError("polynomial degree must be >= 1")
    if c[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    c = c / c[0]
    n = len(c) - 1
    companion = np.zeros((n, n), dtype=np.complex128)
    companion[0, :] = -c[1:]
    if n > 1:
        companion[np.arange(1, n), np.arange(0, n - 1)] = 1.0
    try:
        return np.linalg.eigvals(companion)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise NumericFailureError(f"eigenvalue iteration failed: {exc}") from exc


def roots_to_formants(
    roots: np.ndarray,
    sample_rate: float,
    min_frequency: float = 150.0,
    max_bandwidth: float = 500.0,
    nyquist_margin: float = 100.0,
) -> list[FormantSpec]:
    """Map upper-half-plane roots to formant candidates, sorted by frequency.

    Each root r*e^(j*theta) with theta > 0 maps to F = theta*fs/(2*pi) and
    B = -fs*ln(r)/pi. Candidates are gated to F in [min_frequency,
    fs/2 - nyquist_margin] and 0 < B < max_bandwidth; real-axis and heavily
    damped poles fall out. May return fewer than three entries.
    """
    out = []
    nyq = sample_rate / 2.0
    for root in np.asarray(roots, dtype=np.complex128):
        theta = np.angle(root)
        if theta <= 0:
            continue
        radius = abs(root)
        if radius <= 0 or radius >= 1:
            continue
        freq = theta * sample_rate / (2 * np.pi)
        bw = -sample_rate * np.log(radius) / np.pi
        if min_frequency <= freq <= nyq - nyquist_margin and 0 < bw < max_bandwidth:
            out.append(FormantSpec(freq, bw))
    out.sort(key=lambda f: f.frequency)
    return out


def analytic_cascade_spectrum(
    formants, sample_rate: float, n_points: int = 1024
) -> SpectralEnvelope:
    """Exact dB response of cascaded two-pole resonators on a uniform grid.

    Each resonator has poles at radius exp(-pi*B/fs), angles +/-2*pi*F/fs,
    and is scaled for unity gain at 0 Hz. An empty formant list gives a flat
    0 dB envelope.
    """
    if n_points < 64:
        raise ValueError("n_points must be >= 64")
    freqs = np.linspace(0.0, sample_rate / 2.0, n_points)
    levels = np.zeros(n_points)
    zinv = np.exp(-2j * np.pi * freqs / sample_rate)
    for f in formants:
        if f.frequency >= sample_rate / 2.0:
            raise ValueError(
                f"formant at {f.frequency} Hz is at or above Nyquist ({sample_rate / 2.0} Hz)"
            )
        radius = np.exp(-np.pi * f.bandwidth / sample_rate)
        theta = 2 * np.pi * f.frequency / sample_rate
        a1 = -2.0 * radius * np.cos(theta)
        a2 = radius * radius
        den = 1.0 + a1 * zinv + a2 * zinv * zinv
        levels += 20.0 * np.log10((1.0 + a1 + a2) / np.abs(den))
    return SpectralEnvelope(freqs, levels)
