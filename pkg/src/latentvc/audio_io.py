"""Mono 16 kHz 16-bit PCM WAV I/O and sample-domain slicing primitives.

Everything downstream works on `Waveform` objects: float64 samples nominally
in [-1, 1] at a fixed 16 kHz rate. Resampling and multi-channel audio are
deliberately unsupported.
"""
from __future__ import annotations

import logging
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AudioFormatError, NonFiniteError

SAMPLE_RATE = 16000
_PCM_SCALE = 32768.0  # 16-bit full scale; +32767 reads back as 32767/32768

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Waveform:
    """A mono audio signal: float samples plus their sample rate."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self) -> None:
        samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"waveform samples must be 1-D, got shape {samples.shape}")
        if samples.size and not np.isfinite(samples).all():
            raise NonFiniteError("waveform contains NaN or Inf samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate


def read_wav(path: str | Path) -> Waveform:
    """Read a mono 16-bit PCM WAV at 16 kHz, scaling samples by 1/32768."""
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            sample_width = wf.getsampwidth()
            rate = wf.getframerate()
            comp = wf.getcomptype()
            n_frames = wf.getnframes()
            raw = wf.readframes(n_frames)
    except (wave.Error, EOFError) as exc:
        raise AudioFormatError(f"{path}: not a PCM WAV file ({exc})") from exc
    if comp != "NONE":
        raise AudioFormatError(f"{path}: compressed WAV ({comp}) is unsupported")
    if n_channels != 1:
        raise AudioFormatError(f"{path}: {n_channels} channels, only mono is supported")
    if sample_width != 2:
        raise AudioFormatError(f"{path}: {8 * sample_width}-bit depth, only 16-bit is supported")
    if rate != SAMPLE_RATE:
        raise AudioFormatError(f"{path}: sample rate {rate}, only {SAMPLE_RATE} Hz is supported")
    pcm = np.frombuffer(raw, dtype="<i2")
    return Waveform(pcm.astype(np.float64) / _PCM_SCALE, rate)


def write_wav(path: str | Path, w: Waveform) -> None:
    """Write a 16-bit PCM WAV. Out-of-range samples are clipped to [-1, 1).

    Round trip through `read_wav` reproduces in-range samples to within one
    quantization step (1/32768). Clipping is logged with a sample count.
    """
    if w.sample_rate != SAMPLE_RATE:
        raise ValueError(f"pipeline waveforms are {SAMPLE_RATE} Hz, got {w.sample_rate}")
    hi = 32767.0 / _PCM_SCALE
    clipped = int(np.count_nonzero((w.samples < -1.0) | (w.samples > hi)))
    if clipped:
        log.warning("write_wav(%s): clipped %d out-of-range samples", path, clipped)
    pcm = np.rint(np.clip(w.samples, -1.0, hi) * _PCM_SCALE).astype("<i2")
    try:
        with wave.open(str(path), "wb") as wf:
            wf.setnchannels(1)
            wf.setsampwidth(2)
            wf.setframerate(SAMPLE_RATE)
            wf.writeframes(pcm.tobytes())
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc


def slice_pad(w: Waveform, start: int, length: int) -> Waveform:
    """Return `length` samples starting at `start`, zero-padded outside [0, len).

    Equivalent to slicing an infinitely zero-extended signal; `start` may be
    negative and the requested range may extend past the end.
    """
    if length < 0:
        raise ValueError(f"length must be >= 0, got {length}")
    out = np.zeros(length, dtype=np.float64)
    lo = max(start, 0)
    hi = min(start + length, len(w))
    if hi > lo:
        out[lo - start : hi - start] = w.samples[lo:hi]
    return Waveform(out, w.sample_rate)
