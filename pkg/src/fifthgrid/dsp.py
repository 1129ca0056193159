"""Audio front end: WAV input, sliding windows, constant-Q bins, thresholding.

Bins follow the chromatic scale from C0 (index 0) to B9 (index 119) in equal
temperament with A4 = 440 Hz.  Each bin uses a Hann-windowed complex kernel
centred in the frame.  A kernel longer than the frame is truncated to the
frame length, so the lowest bins lose resolution.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.io import wavfile
from scipy.signal import get_window

from .lattice import DEFAULT_OCTAVES, N_CHROMA, Interpretation, Note

N_BINS = N_CHROMA * DEFAULT_OCTAVES
A4_INDEX = 57
A4_HZ = 440.0
FRAME_LENGTH = 4096
HOP = 1024
ALPHA_FACTOR = 3.25
BINS_PER_OCTAVE = 12
Q = 1.0 / (2.0 ** (1.0 / BINS_PER_OCTAVE) - 1.0)
OPACITY_OFFSET = 0.05


class AudioFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class Frame:
    start_index: int
    bins: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bins, dtype=np.float64)
        if arr.shape != (N_BINS,):
            raise ValueError(f"a frame holds {N_BINS} bins, got shape {arr.shape}")
        if (arr < 0).any():
            raise ValueError("bins must be nonnegative")
        object.__setattr__(self, "bins", arr)

    def scaled(self, factor: float) -> "Frame":
        return Frame(self.start_index, self.bins * factor)


@dataclass
class HeatSequence:
    frames: list[Frame]
    normalization: float = 1.0  # the global max the frames were divided by

    def matrix(self) -> np.ndarray:
        """Bins x frames, chromatic order."""
        if not self.frames:
            return np.zeros((N_BINS, 0))
        return np.stack([f.bins for f in self.frames], axis=1)

    def to_csv(self) -> str:
        m = self.matrix()
        lines = ["note," + ",".join(str(f.start_index) for f in self.frames)]
        for k in range(N_BINS):
            lines.append(bin_to_note(k).name + "," + ",".join(repr(float(v)) for v in m[k]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        """3D heatmap points: per frame, [bin, magnitude] for nonzero bins."""
        doc = {
            "normalization": self.normalization,
            "frames": [[[int(k), float(f.bins[k])] for k in np.flatnonzero(f.bins)] for f in self.frames],
        }
        return json.dumps(doc)

    def interpretations(self, alpha_factor: float = ALPHA_FACTOR) -> list[Interpretation]:
        return [threshold_interpretation(f, alpha_factor) for f in self.frames]


def load_audio(path: str | Path) -> Signal:
    """Mono float signal from a WAV file (PCM 8/16/24/32-bit or float)."""
    try:
        rate, data = wavfile.read(str(path))
    except FileNotFoundError:
        raise
    except (ValueError, EOFError) as exc:
        raise AudioFormatError(f"{path}: {exc}") from exc
    if data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        # 24-bit files arrive left-justified in int32
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype.kind == "f":
        samples = data.astype(np.float64)
    else:
        raise AudioFormatError(f"{path}: unsupported sample type {data.dtype}")
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return Signal(samples, int(rate))


def write_wav(path: str | Path, signal: Signal, bits: int = 16) -> None:
    x = np.clip(signal.samples, -1.0, 1.0)
    if bits == 16:
        # same scale the reader divides by, so a round trip is within one step
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    elif bits == 32:
        data = x.astype(np.float32)
    else:
        raise ValueError("bits must be 16 (PCM) or 32 (float)")
    wavfile.write(str(path), signal.sample_rate, data)


def window_offsets(n_samples: int, length: int = FRAME_LENGTH, hop: int = HOP) -> list[int]:
    if not length >= hop >= 1:
        raise ValueError("need length >= hop >= 1")
    if n_samples < hop:
        raise ValueError(f"signal of {n_samples} samples is shorter than one hop ({hop})")
    return list(range(0, n_samples, hop))


def windows(signal: Signal, length: int = FRAME_LENGTH, hop: int = HOP) -> list[tuple[int, np.ndarray]]:
    """(offset, samples) for every offset below the signal length; tails zero-padded."""
    x = signal.samples
    out = []
    for off in window_offsets(x.size, length, hop):
        w = x[off: off + length]
        if w.size < length:
            w = np.concatenate([w, np.zeros(length - w.size)])
        out.append((off, w))
    return out


def bin_frequency(k: int | np.ndarray) -> float | np.ndarray:
    return A4_HZ * 2.0 ** ((np.asarray(k) - A4_INDEX) / 12.0)


def bin_to_note(k: int) -> Note:
    if not 0 <= k < N_BINS:
        raise ValueError(f"bin {k} outside 0..{N_BINS - 1}")
    return Note.from_chromatic(k)


def note_to_bin(note: Note) -> int:
    return note.chromatic_index


def kernel_length(k: int, sample_rate: int, frame_length: int = FRAME_LENGTH) -> int:
    """Support of bin ``k``'s kernel, truncated to the frame."""
    return min(frame_length, int(math.ceil(Q * sample_rate / bin_frequency(k))))


def cqt_kernel(k: int, sample_rate: int, frame_length: int = FRAME_LENGTH) -> np.ndarray:
    """Complex kernel for bin ``k`` laid out over a full frame.

    Normalised by the window sum so a unit sine at the bin centre reads 0.5.
    Bins above Nyquist get an all-zero kernel.
    """
    out = np.zeros(frame_length, dtype=complex)
    f = float(bin_frequency(k))
    if f >= sample_rate / 2:
        return out
    n = kernel_length(k, sample_rate, frame_length)
    w = get_window("hann", n, fftbins=False) if n > 1 else np.ones(1)
    t = np.arange(n) - (n - 1) / 2.0
    start = (frame_length - n) // 2
    out[start: start + n] = w * np.exp(-2j * np.pi * f * t / sample_rate) / w.sum()
    return out


@lru_cache(maxsize=8)
def cqt_kernels(sample_rate: int, frame_length: int = FRAME_LENGTH) -> np.ndarray:
    """Kernel matrix, bins x samples."""
    k = np.stack([cqt_kernel(i, sample_rate, frame_length) for i in range(N_BINS)])
    k.setflags(write=False)
    return k


def cqt_frame(window: np.ndarray, sample_rate: int, start_index: int = 0) -> Frame:
    window = np.asarray(window, dtype=np.float64)
    return Frame(start_index, np.abs(cqt_kernels(sample_rate, window.size) @ window))


def analyze(signal: Signal, length: int = FRAME_LENGTH, hop: int = HOP, normalize_max: bool = True) -> HeatSequence:
    """Windows, constant-Q frames, and (by default) global normalisation."""
    frames = [cqt_frame(w, signal.sample_rate, off) for off, w in windows(signal, length, hop)]
    seq = HeatSequence(frames)
    return normalize(seq) if normalize_max else seq


def normalize(seq: HeatSequence) -> HeatSequence:
    """Divide every bin of every frame by the largest bin in the sequence."""
    peak = max((float(f.bins.max()) for f in seq.frames), default=0.0)
    if peak == 0.0:
        return HeatSequence(list(seq.frames), seq.normalization)
    return HeatSequence([f.scaled(1.0 / peak) for f in seq.frames], seq.normalization * peak)


def frame_to_grid(frame: Frame) -> Interpretation:
    """Weighted interpretation holding the bin magnitudes."""
    grid = np.zeros((N_CHROMA, DEFAULT_OCTAVES))
    for k, v in enumerate(frame.bins):
        note = bin_to_note(k)
        grid[note.chroma, note.octave] = v
    return Interpretation(grid)


def threshold(frame: Frame, alpha_factor: float = ALPHA_FACTOR) -> float:
    return alpha_factor * float(frame.bins.mean())


def audible(frame: Frame, alpha_factor: float = ALPHA_FACTOR) -> np.ndarray:
    """Boolean per bin; nothing is audible in a silent frame."""
    alpha = threshold(frame, alpha_factor)
    if alpha == 0.0:
        return np.zeros(N_BINS, dtype=bool)
    return frame.bins >= alpha


def threshold_interpretation(frame: Frame, alpha_factor: float = ALPHA_FACTOR) -> Interpretation:
    on = audible(frame, alpha_factor)
    return Interpretation.from_notes(bin_to_note(int(k)) for k in np.flatnonzero(on))


def window_score(frame: Frame, alpha_factor: float = ALPHA_FACTOR) -> float:
    """Mean magnitude of the audible bins; 0 when none are audible."""
    on = audible(frame, alpha_factor)
    count = int(on.sum())
    return float(frame.bins[on].sum()) / count if count else 0.0


def select_window(frames: Sequence[Frame], alpha_factor: float = ALPHA_FACTOR) -> int:
    if not frames:
        raise ValueError("no frames to choose from")
    scores = [window_score(f, alpha_factor) for f in frames]
    return int(np.argmax(scores))  # argmax keeps the first of equal scores


def select_complete_window(frames: Sequence[Frame], n_samples: int, length: int = FRAME_LENGTH,
                           alpha_factor: float = ALPHA_FACTOR) -> int:
    """select_window over the frames that lie wholly inside the signal.

    A zero-padded tail frame has fewer audible bins at a similar level, so
    its mean audible magnitude is inflated; it only competes when the signal
    is shorter than one frame.  Returns an index into ``frames``.
    """
    complete = [i for i, f in enumerate(frames) if f.start_index + length <= n_samples]
    if not complete:
        return select_window(frames, alpha_factor)
    return complete[select_window([frames[i] for i in complete], alpha_factor)]


def opacity(frame: Frame) -> np.ndarray:
    """Per-bin cube opacity for the 3D view, relative to the frame's loudest bin."""
    peak = float(frame.bins.max())
    if peak == 0.0:
        return np.full(N_BINS, OPACITY_OFFSET)
    return frame.bins / peak + OPACITY_OFFSET


# synthetic test material

HARMONIC_AMPLITUDES = (1.0, 0.6, 0.4, 0.3)
SYNTH_RATE = 44100


def synth_note(notes: Note | Sequence[Note], seconds: float = 0.5, sample_rate: int = SYNTH_RATE,
               amplitudes: Sequence[float] = HARMONIC_AMPLITUDES, envelope: np.ndarray | None = None) -> Signal:
    """Sum of harmonic tones (partials at 1x, 2x, 3x, 4x the fundamental)."""
    if isinstance(notes, Note):
        notes = [notes]
    t = np.arange(int(round(seconds * sample_rate))) / sample_rate
    x = np.zeros_like(t)
    for note in notes:
        f0 = float(bin_frequency(note.chromatic_index))
        for h, a in enumerate(amplitudes, start=1):
            if h * f0 < sample_rate / 2:
                x += a * np.sin(2 * np.pi * h * f0 * t)
    if envelope is not None:
        x = x * envelope
    peak = np.abs(x).max()
    if peak > 0:
        x = 0.9 * x / peak
    return Signal(x, sample_rate)


def adsr(n_samples: int, sample_rate: int = SYNTH_RATE, attack: float = 0.05, decay: float = 0.1,
         sustain: float = 0.5, release: float = 0.2) -> np.ndarray:
    """Piecewise-linear envelope spanning ``n_samples``."""
    a, d, r = (int(round(v * sample_rate)) for v in (attack, decay, release))
    s = max(0, n_samples - a - d - r)
    env = np.concatenate([
        np.linspace(0.0, 1.0, a, endpoint=False),
        np.linspace(1.0, sustain, d, endpoint=False),
        np.full(s, sustain),
        np.linspace(sustain, 0.0, r),
    ])
    return env[:n_samples] if env.size >= n_samples else np.pad(env, (0, n_samples - env.size))
