"""Conditioning features: log-mel spectrograms and pooled speaker embeddings.

The mel extractor is fixed to the codec's 62.5 Hz frame rate: hop 256 at
16 kHz, window 1024, n_fft 1024, periodic Hann, no center padding, 128
HTK-style triangular filters spanning 0-8000 Hz, natural log with a 1e-5
power floor.

The speaker encoder is a deterministic stand-in for a learned model: mel
statistics pooling (per-bin mean and std over time) followed by a fixed
seeded random projection to 192 dims and L2 normalization.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .audio_io import SAMPLE_RATE, Waveform

N_FFT = 1024
WIN_LENGTH = 1024
HOP_LENGTH = 256
N_MELS = 128
FRAME_RATE = SAMPLE_RATE / HOP_LENGTH  # 62.5 Hz
FMIN = 0.0
FMAX = 8000.0
LOG_FLOOR = 1e-5
SPK_DIM = 192
DEFAULT_SEED = 0


def hz_to_mel(f):
    """HTK mel scale: 2595 * log10(1 + f/700)."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=1)
def mel_filterbank() -> np.ndarray:
    """(N_MELS, n_fft//2 + 1) triangular filters, unit peak, HTK mel spacing.

    At 128 bins over 0-8 kHz the lowest triangles are narrower than one FFT
    bin (15.625 Hz) and may contain no bin center; those filters are all-zero
    and their log-mel output sits at the floor.
    """
    n_bins = N_FFT // 2 + 1
    bin_hz = np.arange(n_bins) * (SAMPLE_RATE / N_FFT)
    mel_pts = np.linspace(hz_to_mel(FMIN), hz_to_mel(FMAX), N_MELS + 2)
    hz_pts = mel_to_hz(mel_pts)
    rising = (bin_hz[None, :] - hz_pts[:-2, None]) / (hz_pts[1:-1] - hz_pts[:-2])[:, None]
    falling = (hz_pts[2:, None] - bin_hz[None, :]) / (hz_pts[2:] - hz_pts[1:-1])[:, None]
    fb = np.maximum(0.0, np.minimum(rising, falling))
    fb.flags.writeable = False
    return fb


@lru_cache(maxsize=1)
def _hann_window() -> np.ndarray:
    # Periodic Hann: 0.5 - 0.5*cos(2*pi*n/N)
    w = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(WIN_LENGTH) / WIN_LENGTH)
    w.flags.writeable = False
    return w


def frame_count(n_samples: int) -> int:
    """Number of mel frames for an n-sample input: (n - win)//hop + 1, 0 if n < win."""
    if n_samples < WIN_LENGTH:
        return 0
    return (n_samples - WIN_LENGTH) // HOP_LENGTH + 1


def mel_spectrogram(w: Waveform) -> np.ndarray:
    """Log-mel matrix of shape (T, 128), T = frame_count(len(w)).

    STFT power -> mel filterbank -> log(max(power, 1e-5)). Frames start at
    sample t*hop with no center padding, so the signal must cover at least
    one window.
    """
    n = len(w)
    if n < WIN_LENGTH:
        raise ValueError(f"input too short for mel extraction: {n} < {WIN_LENGTH} samples")
    frames = np.lib.stride_tricks.sliding_window_view(w.samples, WIN_LENGTH)[::HOP_LENGTH]
    spectrum = np.fft.rfft(frames * _hann_window(), n=N_FFT, axis=1)
    power = spectrum.real**2 + spectrum.imag**2
    mel_power = power @ mel_filterbank().T
    return np.log(np.maximum(mel_power, LOG_FLOOR))


@lru_cache(maxsize=8)
def speaker_projection(seed: int) -> np.ndarray:
    """Fixed (192, 256) projection, Glorot-uniform from the seeded PRNG."""
    limit = np.sqrt(6.0 / (SPK_DIM + 2 * N_MELS))
    rng = np.random.default_rng(seed)
    proj = rng.uniform(-limit, limit, size=(SPK_DIM, 2 * N_MELS))
    proj.flags.writeable = False
    return proj


def speaker_embedding(w: Waveform, seed: int = DEFAULT_SEED) -> np.ndarray:
    """192-dim unit-norm speaker vector from mel statistics pooling.

    Pools the log-mel to [per-bin mean; per-bin std over time] (256 dims),
    applies the seeded projection, and L2-normalizes. Deterministic for a
    given (input, seed).
    """
    mel = mel_spectrogram(w)
    pooled = np.concatenate([mel.mean(axis=0), mel.std(axis=0)])
    raw = speaker_projection(seed) @ pooled
    norm = np.linalg.norm(raw)
    if norm == 0.0:
        raise ValueError("degenerate input: speaker embedding has zero norm")
    return raw / norm
