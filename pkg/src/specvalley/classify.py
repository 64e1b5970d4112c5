"""Frame-based front/back vowel classification from valley-level features."""

from dataclasses import dataclass, field

import numpy as np

from .errors import NoDecisionError, UnstableModelError
from .scales import hz_to_bark
from .sigproc import frame_signal, preemphasize, window
from .types import FormantSpec, SignalBuffer, power_mean_db

SPACING_RULES = ("f3f2_3bark", "f2f1_bark", "v1_only", "v2_only")


@dataclass
class PipelineConfig:
    """Frame analysis settings for the classification pipeline.

    `lp_order=None` scales the order with the sample rate (rate/1000 + 2,
    which is 18 at 16 kHz). Valley brackets are anchored at the root-derived
    formant frequencies, so merged envelope peaks do not invalidate a frame.
    """

    frame_ms: float = 20.0
    overlap_fraction: float = 0.5
    preemphasis: float = 0.97
    window_kind: str = "hamming"
    lp_order: int | None = None
    n_points: int = 512
    min_formants: int = 3
    min_formant_hz: float = 150.0
    max_formant_bandwidth_hz: float = 500.0
    nyquist_margin_hz: float = 100.0
    sample_rate: float | None = None  # assert the segment rate when set

    def order_for(self, sample_rate: float) -> int:
        if self.lp_order is not None:
            return self.lp_order
        return int(round(sample_rate / 1000.0)) + 2


@dataclass
class FrameFeatures:
    """Per-frame relative valley levels and the first three formants."""

    v1_db: float | None
    v2_db: float | None
    formants: list
    valid: bool
    fail_reason: str | None = None


@dataclass
class SegmentDecision:
    """Segment-level decision from frame means."""

    mean_v1: float
    mean_v2: float
    mean_diff: float
    predicted: str
    frames_used: int
    frames_discarded: int


@dataclass
class ClassificationReport:
    """Per-class and overall accuracy plus confusion counts."""

    feature: str
    threshold: float
    front_accuracy: float
    back_accuracy: float
    overall_accuracy: float
    confusion: dict = field(default_factory=dict)
    n_front: int = 0
    n_back: int = 0
    n_undecided: int = 0


def _audio_of(seg) -> SignalBuffer:
    return seg.audio if hasattr(seg, "audio") else seg


def frame_pipeline(seg, cfg: PipelineConfig | None = None):
    """Pre-emphasize, window, fit LP, and measure V_I/V_II per frame.

    Frames that do not yield three in-range formant candidates (or whose
    valley brackets collapse) come back invalid with a reason; nothing is
    interpolated across frames.
    """
    cfg = cfg or PipelineConfig()
    audio = _audio_of(seg)
    fs = audio.sample_rate
    if cfg.sample_rate is not None and fs != cfg.sample_rate:
        raise ValueError(f"segment rate {fs} != configured rate {cfg.sample_rate}")
    order = cfg.order_for(fs)
    emphasized = preemphasize(audio, cfg.preemphasis)
    frames = frame_signal(emphasized, cfg.frame_ms, cfg.overlap_fraction)
    out = []
    if frames.shape[0] == 0:
        return out
    frames = window(frames, cfg.window_kind)
    n = frames.shape[1]
    # batched autocorrelation r[k] = sum_t x[t] x[t+k], one lag at a time
    lags = np.empty((frames.shape[0], order + 1))
    for k in range(order + 1):
        lags[:, k] = np.einsum("ij,ij->i", frames[:, : n - k], frames[:, k:])
    nfft = 2 * (cfg.n_points - 1)
    grid = np.linspace(0.0, fs / 2.0, cfg.n_points)
    for r in lags:
        if r[0] <= 0:
            out.append(FrameFeatures(None, None, [], False, "silent frame"))
            continue
        try:
            a, err = _levinson_raw(r, order)
        except UnstableModelError as exc:
            out.append(FrameFeatures(None, None, [], False, f"unstable LP fit: {exc}"))
            continue
        formants = _formant_candidates(
            a, fs, cfg.min_formant_hz, cfg.max_formant_bandwidth_hz, cfg.nyquist_margin_hz
        )
        if len(formants) < cfg.min_formants:
            out.append(
                FrameFeatures(None, None, formants, False, "fewer than three formants")
            )
            continue
        spec = np.abs(np.fft.rfft(a, nfft))
        if np.any(spec == 0.0):
            out.append(FrameFeatures(None, None, formants, False, "singular envelope"))
            continue
        env_db = 20.0 * np.log10(np.sqrt(max(err, 1e-300)) / spec)
        mean_db = power_mean_db(env_db)
        vals = []
        reason = None
        for f_lo, f_hi in ((formants[0], formants[1]), (formants[1], formants[2])):
            lo = int(np.searchsorted(grid, f_lo.frequency, side="right"))
            hi = int(np.searchsorted(grid, f_hi.frequency, side="left"))
            if hi - lo < 2:
                reason = "valley bracket too narrow"
                break
            vals.append(float(env_db[lo:hi].min() - mean_db))
        if reason:
            out.append(FrameFeatures(None, None, formants, False, reason))
        else:
            out.append(FrameFeatures(vals[0], vals[1], formants[:3], True))
    return out


def _levinson_raw(r, order):
    a = np.zeros(order + 1)
    a[0] = 1.0
    e = r[0]
    for m in range(1, order + 1):
        if e <= 0:
            raise UnstableModelError(f"prediction error vanished at stage {m}", stage=m)
        k = -np.dot(a[:m], r[m:0:-1]) / e
        if abs(k) > 1.0 + 1e-12:
            raise UnstableModelError(f"|k|={abs(k):.3g} > 1 at stage {m}", stage=m)
        a[: m + 1] += k * a[m::-1]
        e *= 1.0 - k * k
    return a, e


def _formant_candidates(a, fs, min_hz, max_bw, nyq_margin):
    n = len(a) - 1
    companion = np.zeros((n, n))
    companion[0, :] = -a[1:] / a[0]
    if n > 1:
        companion[np.arange(1, n), np.arange(0, n - 1)] = 1.0
    roots = np.linalg.eigvals(companion)
    out = []
    nyq = fs / 2.0
    for root in roots:
        theta = np.angle(root)
        radius = abs(root)
        if theta <= 0 or radius <= 0 or radius >= 1:
            continue
        freq = theta * fs / (2 * np.pi)
        bw = -fs * np.log(radius) / np.pi
        if min_hz <= freq <= nyq - nyq_margin and 0 < bw < max_bw:
            out.append(FormantSpec(freq, bw))
    out.sort(key=lambda f: f.frequency)
    return out


def _valid_frames(features):
    valid = [f for f in features if f.valid]
    if not valid:
        raise NoDecisionError("no valid frames in segment")
    return valid


def decide_segment(features, threshold_db: float = 5.0) -> SegmentDecision:
    """Back when the mean valley-level difference strictly exceeds the threshold.

    mean(V_I) - mean(V_II) is the difference between the two valley levels; a
    value exactly at the threshold classifies as front.
    """
    valid = _valid_frames(features)
    mean_v1 = float(np.mean([f.v1_db for f in valid]))
    mean_v2 = float(np.mean([f.v2_db for f in valid]))
    diff = mean_v1 - mean_v2
    return SegmentDecision(
        mean_v1=mean_v1,
        mean_v2=mean_v2,
        mean_diff=diff,
        predicted="back" if diff > threshold_db else "front",
        frames_used=len(valid),
        frames_discarded=len(features) - len(valid),
    )


def decide_by_formant_spacing(features, rule: str = "f3f2_3bark",
                              threshold: float | None = None) -> SegmentDecision:
    """Alternative decisions from formant spacing in bark or a single valley.

    f3f2_3bark: front iff mean bark(F3)-bark(F2) < 3 (threshold in bark).
    f2f1_bark:  the same rule applied to (F1, F2).
    v1_only:    back iff mean V_I > threshold (dB, default 0).
    v2_only:    back iff mean V_II < threshold (dB, default 0).
    """
    if rule not in SPACING_RULES:
        raise ValueError(f"unknown rule {rule!r}; expected one of {SPACING_RULES}")
    valid = _valid_frames(features)
    mean_v1 = float(np.mean([f.v1_db for f in valid]))
    mean_v2 = float(np.mean([f.v2_db for f in valid]))
    if rule in ("f3f2_3bark", "f2f1_bark"):
        thr = 3.0 if threshold is None else threshold
        lo, hi = (1, 2) if rule == "f3f2_3bark" else (0, 1)
        spacing = float(
            np.mean(
                [
                    hz_to_bark(f.formants[hi].frequency) - hz_to_bark(f.formants[lo].frequency)
                    for f in valid
                ]
            )
        )
        predicted = "front" if spacing < thr else "back"
    elif rule == "v1_only":
        thr = 0.0 if threshold is None else threshold
        predicted = "back" if mean_v1 > thr else "front"
    else:
        thr = 0.0 if threshold is None else threshold
        predicted = "back" if mean_v2 < thr else "front"
    return SegmentDecision(
        mean_v1=mean_v1,
        mean_v2=mean_v2,
        mean_diff=mean_v1 - mean_v2,
        predicted=predicted,
        frames_used=len(valid),
        frames_discarded=len(features) - len(valid),
    )


def score(decisions, truths, feature: str = "valley", threshold: float = 5.0) -> ClassificationReport:
    """Accuracy bookkeeping; undecided segments (None) count as errors."""
    if len(decisions) != len(truths):
        raise ValueError("decisions and truths must have equal length")
    if not decisions:
        raise ValueError("nothing to score")
    confusion: dict = {}
    counts = {"front": 0, "back": 0}
    correct = {"front": 0, "back": 0}
    undecided = 0
    for dec, truth in zip(decisions, truths):
        if truth not in counts:
            raise ValueError(f"truth label {truth!r} must be front or back")
        pred = dec.predicted if isinstance(dec, SegmentDecision) else dec
        if pred is None:
            undecided += 1
            pred = "undecided"
        confusion[(truth, pred)] = confusion.get((truth, pred), 0) + 1
        counts[truth] += 1
        if pred == truth:
            correct[truth] += 1
    def acc(cls):
        return 100.0 * correct[cls] / counts[cls] if counts[cls] else float("nan")
    total = counts["front"] + counts["back"]
    return ClassificationReport(
        feature=feature,
        threshold=threshold,
        front_accuracy=acc("front"),
        back_accuracy=acc("back"),
        overall_accuracy=100.0 * (correct["front"] + correct["back"]) / total,
        confusion=confusion,
        n_front=counts["front"],
        n_back=counts["back"],
        n_undecided=undecided,
    )


@dataclass
class Histogram:
    """Normalized histogram; frequencies sum to 1 over in-range values."""

    bin_centers: np.ndarray
    frequencies: np.ndarray
    n_out_of_range: int


def normalized_histogram(values, bin_width: float, value_range) -> Histogram:
    """Fixed-width histogram over `value_range`; out-of-range values counted."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        raise ValueError("no values to histogram")
    lo, hi = value_range
    if hi <= lo:
        raise ValueError("empty value range")
    n_bins = int(np.ceil((hi - lo) / bin_width))
    edges = lo + bin_width * np.arange(n_bins + 1)
    in_range = values[(values >= lo) & (values < edges[-1])]
    counts, _ = np.histogram(in_range, bins=edges)
    freqs = counts / in_range.size if in_range.size else counts.astype(float)
    centers = edges[:-1] + bin_width / 2.0
    return Histogram(centers, freqs, int(values.size - in_range.size))
