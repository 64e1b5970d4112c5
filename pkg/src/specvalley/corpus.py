"""Corpus ingestion: WAV audio, phone labels, vowel tables, noise mixing."""

import csv
import wave
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateInputError,
    FormatError,
    LabelOrderingError,
    LabelParseError,
    ValidationError,
)
from .types import SignalBuffer

MIN_SEGMENT_DURATION_S = 0.045


@dataclass
class VowelSegment:
    """A labeled vowel excerpt cut from an utterance."""

    audio: SignalBuffer
    phone_label: str
    fb_class: str  # front | back | central
    utterance_id: str
    start_sample: int
    end_sample: int


@dataclass
class PbEntry:
    """One vowel row of a mean-formant table: frequencies plus peak levels."""

    vowel: str
    gender: str
    f0: float
    f1: float
    f2: float
    f3: float
    l1: float
    l2: float
    l3: float


@dataclass
class NoiseSpec:
    """Additive-noise recipe; `seed` makes the draw reproducible."""

    kind: str  # white | babble
    snr_db: float
    seed: int = 0
    babble_source: str | None = None

    def __post_init__(self):
        if self.kind not in ("white", "babble"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "babble" and not self.babble_source:
            raise ValueError("babble noise needs a babble_source file")
        if not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")


@dataclass
class VowelInventory:
    """Vowel class map plus the neighbor labels that disqualify a segment."""

    classes: dict  # label -> front | back | central
    excluded_neighbors: frozenset

    def fb_class(self, label: str):
        return self.classes.get(label)


def load_wav(path) -> SignalBuffer:
    """Read a 16-bit PCM mono WAV into [-1, 1) floats."""
    try:
        with wave.open(str(path), "rb") as wf:
            if wf.getcomptype() != "NONE":
                raise FormatError(
                    f"compressed WAV ({wf.getcomptype()}) not supported", field="compression"
                )
            if wf.getnchannels() != 1:
                raise FormatError(
                    f"expected mono audio, got {wf.getnchannels()} channels", field="channels"
                )
            if wf.getsampwidth() != 2:
                raise FormatError(
                    f"expected 16-bit samples, got {8 * wf.getsampwidth()}-bit",
                    field="sample_width",
                )
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise FormatError(f"not a readable WAV file: {exc}", field="container") from exc
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return SignalBuffer(samples, rate)


def save_wav(path, x: SignalBuffer):
    """Write a signal as 16-bit PCM mono WAV, clipping to full scale."""
    scaled = np.clip(np.round(x.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(int(x.sample_rate))
        wf.writeframes(scaled.tobytes())


def load_phone_labels(path):
    """Parse 'start end label' lines (sample units) into ordered triples."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise LabelParseError(
                    f"expected 'start end label', got {line!r}", line_number=lineno
                )
            try:
                start, end = int(parts[0]), int(parts[1])
            except ValueError:
                raise LabelParseError(
                    f"non-integer sample bounds in {line!r}", line_number=lineno
                ) from None
            if end <= start:
                raise LabelParseError(
                    f"empty or reversed span in {line!r}", line_number=lineno
                )
            if out and start < out[-1][1]:
                raise LabelOrderingError(
                    f"label {parts[2]!r} starts before the previous one ends",
                    line_number=lineno,
                )
            out.append((start, end, parts[2]))
    return out


def select_vowel_segments(
    labels,
    audio: SignalBuffer,
    inventory: VowelInventory,
    utterance_id: str = "",
    min_duration_s: float = MIN_SEGMENT_DURATION_S,
):
    """Keep inventory vowels with clean neighbors and sufficient duration.

    A vowel is dropped when either neighbor label is in the inventory's
    exclusion set (nasals, 'r'-like, aspirated 'h') or when it is shorter
    than `min_duration_s`. Central vowels are kept but tagged so callers can
    exclude them from scoring.
    """
    out = []
    for k, (start, end, label) in enumerate(labels):
        fb = inventory.fb_class(label)
        if fb is None:
            continue
        if (end - start) / audio.sample_rate < min_duration_s:
            continue
        prev_label = labels[k - 1][2] if k > 0 else None
        next_label = labels[k + 1][2] if k + 1 < len(labels) else None
        if prev_label in inventory.excluded_neighbors:
            continue
        if next_label in inventory.excluded_neighbors:
            continue
        end_clipped = min(end, len(audio.samples))
        if end_clipped <= start:
            continue
        out.append(
            VowelSegment(
                audio=SignalBuffer(audio.samples[start:end_clipped].copy(), audio.sample_rate),
                phone_label=label,
                fb_class=fb,
                utterance_id=utterance_id,
                start_sample=start,
                end_sample=end_clipped,
            )
        )
    return out


PB_COLUMNS = ("vowel", "gender", "F0", "F1", "F2", "F3", "L1", "L2", "L3")


def load_pb_table(path):
    """Read a mean-formant CSV with header vowel,gender,F0,F1,F2,F3,L1,L2,L3."""
    entries = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(PB_COLUMNS):
            missing = set(PB_COLUMNS) - set(h.strip() for h in (header or []))
            raise FormatError(
                f"bad header {header!r}", field=",".join(sorted(missing)) or "header"
            )
        for rowno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != len(PB_COLUMNS):
                raise ValidationError(f"expected {len(PB_COLUMNS)} fields", row=rowno)
            vowel, gender = row[0].strip(), row[1].strip()
            try:
                nums = [float(v) for v in row[2:]]
            except ValueError:
                raise ValidationError(f"non-numeric field in row {row!r}", row=rowno) from None
            f0, f1, f2, f3, l1, l2, l3 = nums
            if not f1 < f2 < f3:
                raise ValidationError(
                    f"formants out of order for {vowel}/{gender}: {f1}, {f2}, {f3}",
                    row=rowno,
                )
            entries.append(PbEntry(vowel, gender, f0, f1, f2, f3, l1, l2, l3))
    return entries


def pb_mean_formants(entries, gender: str):
    """vowel -> (F1, F2, F3) means for one gender, averaging duplicate rows."""
    acc: dict = {}
    for e in entries:
        if e.gender != gender:
            continue
        acc.setdefault(e.vowel, []).append((e.f1, e.f2, e.f3))
    return {
        v: tuple(float(np.mean([row[i] for row in rows])) for i in range(3))
        for v, rows in acc.items()
    }


def _data_path(name: str) -> Path:
    return Path(str(resources.files("specvalley").joinpath("data", name)))


def default_pb_table_path() -> Path:
    """Bundled mean-formant table (adult male and female rows)."""
    return _data_path("pb_means.csv")


def load_inventory(inventory_path, exclusions_path) -> VowelInventory:
    """Load 'label class' lines plus a one-label-per-line exclusion list."""
    classes = {}
    with open(inventory_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2 or parts[1] not in ("front", "back", "central"):
                raise LabelParseError(
                    f"expected '<label> front|back|central', got {line!r}",
                    line_number=lineno,
                )
            classes[parts[0]] = parts[1]
    excluded = set()
    with open(exclusions_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                excluded.add(line)
    return VowelInventory(classes=classes, excluded_neighbors=frozenset(excluded))


def timit_inventory() -> VowelInventory:
    """Bundled inventory for TIMIT-style labels."""
    return load_inventory(_data_path("timit_inventory.txt"), _data_path("timit_exclusions.txt"))


def dravidian_inventory() -> VowelInventory:
    """Bundled inventory for the Kannada/Tamil label scheme."""
    return load_inventory(
        _data_path("dravidian_inventory.txt"), _data_path("dravidian_exclusions.txt")
    )


def collect_segments(corpus_dir, labels_ext: str, inventory: VowelInventory,
                     min_duration_s: float = MIN_SEGMENT_DURATION_S):
    """Load every WAV in a directory and select its vowel segments.

    Files are visited in sorted order so the result is deterministic. WAVs
    without a label sidecar are skipped.
    """
    corpus_dir = Path(corpus_dir)
    segments = []
    for wav_path in sorted(corpus_dir.glob("*.wav")):
        label_path = wav_path.with_suffix(labels_ext)
        if not label_path.exists():
            continue
        audio = load_wav(wav_path)
        labels = load_phone_labels(label_path)
        segments.extend(
            select_vowel_segments(
                labels, audio, inventory, utterance_id=wav_path.stem,
                min_duration_s=min_duration_s,
            )
        )
    return segments


def mix_noise(x: SignalBuffer, spec: NoiseSpec, babble: SignalBuffer | None = None) -> SignalBuffer:
    """Add noise scaled so the mixed extent sits at exactly spec.snr_db.

    Powers are mean squared amplitudes over the segment. For babble noise a
    start offset into the source is drawn from the seed; pass a preloaded
    `babble` buffer to skip re-reading the source file. Identical spec and
    signal give bit-identical output.
    """
    p_signal = float(np.mean(x.samples**2))
    if p_signal <= 0:
        raise DegenerateInputError("cannot set an SNR against a zero-power signal")
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "white":
        noise = rng.standard_normal(len(x.samples))
    else:
        if babble is None:
            babble = load_wav(spec.babble_source)
        if babble.sample_rate != x.sample_rate:
            raise FormatError(
                f"babble rate {babble.sample_rate} != signal rate {x.sample_rate}",
                field="sample_rate",
            )
        if len(babble.samples) < len(x.samples):
            raise FormatError("babble source shorter than the signal", field="length")
        max_off = len(babble.samples) - len(x.samples)
        off = int(rng.integers(0, max_off + 1))
        noise = babble.samples[off : off + len(x.samples)].copy()
    p_noise = float(np.mean(noise**2))
    if p_noise <= 0:
        raise DegenerateInputError("noise draw has zero power")
    noise *= np.sqrt(p_signal / (p_noise * 10.0 ** (spec.snr_db / 10.0)))
    return SignalBuffer(x.samples + noise, x.sample_rate)
