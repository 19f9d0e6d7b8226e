"""Chunkwise streaming inference over fixed analysis windows.

Each step processes one window of the source laid out as
history | current | overlap | future. The window starts at ``k*C - H``
(silence-padded before t=0 and past the end of the stream), gets one
encode -> convert -> decode pass, and only the current region is emitted.
The hop equals the current length, so each step's overlap region co-times
with the next step's first O current samples; those O samples are blended
with a cosine cross-fade to hide any seam.

Latency splits into a model part (current + overlap + future: audio the
model must wait for) and a compute part (per-chunk encode/convert/decode
wall time); history is already-received past audio and costs nothing.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .audio_io import SAMPLE_RATE, Waveform, slice_pad
from .codec import CodecInterface
from .converter import ConverterFn
from .features import mel_spectrogram, speaker_embedding

CODEC_HOP = 256


def _ms_to_samples(ms: float, what: str) -> int:
    exact = ms * SAMPLE_RATE / 1000.0
    n = round(exact)
    if abs(exact - n) > 1e-6:
        raise ValueError(f"{what}={ms} ms is not a whole number of samples at {SAMPLE_RATE} Hz")
    return int(n)


@dataclass(frozen=True)
class StreamConfig:
    """Window geometry in milliseconds; sample counts derive at 16 kHz.

    Defaults give a 2.4 s window split 2160 | 120 | 20 | 100 ms, i.e.
    38400 samples = 34560 + 1920 + 320 + 1600.
    """

    window_ms: float = 2400.0
    current_ms: float = 120.0
    overlap_ms: float = 20.0
    future_ms: float = 100.0

    def __post_init__(self) -> None:
        if self.current_ms <= 0:
            raise ValueError(f"current_ms must be > 0, got {self.current_ms}")
        if self.overlap_ms < 0 or self.future_ms < 0:
            raise ValueError("overlap_ms and future_ms must be >= 0")
        if self.history_ms < 0:
            raise ValueError(
                f"window_ms={self.window_ms} too short for current+overlap+future="
                f"{self.current_ms + self.overlap_ms + self.future_ms} ms"
            )
        for name in ("window_ms", "current_ms", "overlap_ms", "future_ms"):
            _ms_to_samples(getattr(self, name), name)
        if self.window_samples % CODEC_HOP != 0:
            raise ValueError(
                f"window of {self.window_samples} samples is not a multiple of the codec hop {CODEC_HOP}"
            )

    @property
    def history_ms(self) -> float:
        return self.window_ms - self.current_ms - self.overlap_ms - self.future_ms

    @property
    def window_samples(self) -> int:
        return _ms_to_samples(self.window_ms, "window_ms")

    @property
    def current_samples(self) -> int:
        return _ms_to_samples(self.current_ms, "current_ms")

    @property
    def overlap_samples(self) -> int:
        return _ms_to_samples(self.overlap_ms, "overlap_ms")

    @property
    def future_samples(self) -> int:
        return _ms_to_samples(self.future_ms, "future_ms")

    @property
    def history_samples(self) -> int:
        return self.window_samples - self.current_samples - self.overlap_samples - self.future_samples


def compute_t_model(cfg: StreamConfig) -> float:
    """Model-induced latency in ms: audio the model must see beyond each
    emitted sample. History does not count; it is already in the past."""
    return cfg.current_ms + cfg.overlap_ms + cfg.future_ms


@dataclass(frozen=True)
class LatencyReport:
    t_model_ms: float
    t_current_ms: float
    t_overlap_ms: float
    t_future_ms: float
    t_compute_mean_ms: float
    t_compute_p95_ms: float
    t_enc_ms: float
    t_convert_ms: float
    t_dec_ms: float
    t_latency_ms: float
    chunk_count: int
    rtf: float

    def to_dict(self) -> dict:
        return {
            "t_model_ms": self.t_model_ms,
            "t_current_ms": self.t_current_ms,
            "t_overlap_ms": self.t_overlap_ms,
            "t_future_ms": self.t_future_ms,
            "t_compute_ms": {
                "mean": self.t_compute_mean_ms,
                "p95": self.t_compute_p95_ms,
                "enc": self.t_enc_ms,
                "convert": self.t_convert_ms,
                "dec": self.t_dec_ms,
            },
            "t_latency_ms": self.t_latency_ms,
            "chunk_count": self.chunk_count,
            "rtf": self.rtf,
        }


def build_report(
    cfg: StreamConfig,
    timings: list[tuple[float, float, float]],
    wall_s: float,
    duration_s: float,
) -> LatencyReport:
    """Fold per-chunk (enc, convert, dec) ms samples into a LatencyReport."""
    if not timings:
        raise ValueError("cannot build a latency report from zero chunks")
    arr = np.asarray(timings, dtype=np.float64)
    totals = arr.sum(axis=1)
    t_compute_mean = float(totals.mean())
    t_model = compute_t_model(cfg)
    return LatencyReport(
        t_model_ms=t_model,
        t_current_ms=cfg.current_ms,
        t_overlap_ms=cfg.overlap_ms,
        t_future_ms=cfg.future_ms,
        t_compute_mean_ms=t_compute_mean,
        t_compute_p95_ms=float(np.percentile(totals, 95)),
        t_enc_ms=float(arr[:, 0].mean()),
        t_convert_ms=float(arr[:, 1].mean()),
        t_dec_ms=float(arr[:, 2].mean()),
        t_latency_ms=t_model + t_compute_mean,
        chunk_count=len(timings),
        rtf=wall_s / duration_s,
    )


def crossfade_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cosine fade-in/fade-out weight pair over n samples.

    w_in(i) = 0.5*(1 - cos(pi*(i+0.5)/n)); w_out = 1 - w_in. The half-sample
    offset keeps weights strictly inside (0, 1), so n=1 gives an even 0.5/0.5
    split.
    """
    if n < 1:
        raise ValueError(f"crossfade length must be >= 1, got {n}")
    i = np.arange(n, dtype=np.float64)
    w_in = 0.5 * (1.0 - np.cos(np.pi * (i + 0.5) / n))
    return w_in, 1.0 - w_in


def crossfade(prev_tail: np.ndarray, new_head: np.ndarray) -> np.ndarray:
    """Blend the retained overlap tail into the head of the next chunk."""
    prev_tail = np.asarray(prev_tail, dtype=np.float64)
    new_head = np.asarray(new_head, dtype=np.float64)
    if prev_tail.shape != new_head.shape or prev_tail.ndim != 1:
        raise ValueError(f"crossfade inputs must be equal-length 1-D, got {prev_tail.shape} and {new_head.shape}")
    w_in, w_out = crossfade_weights(len(prev_tail))
    return w_out * prev_tail + w_in * new_head


@dataclass
class StreamState:
    """Single-owner mutable per-stream state; steps must run sequentially."""

    cond_mel: np.ndarray
    spk: np.ndarray
    k: int = 0
    retained_tail: np.ndarray | None = None
    timings: list[tuple[float, float, float]] = field(default_factory=list)


def init_stream(reference: Waveform, seed: int = 0) -> StreamState:
    """Precompute the conditioning features from the reference once."""
    return StreamState(
        cond_mel=mel_spectrogram(reference),
        spk=speaker_embedding(reference, seed=seed),
    )


def stream_step(
    state: StreamState,
    cfg: StreamConfig,
    source: Waveform,
    k: int,
    codec: CodecInterface,
    converter: ConverterFn,
    flush: bool = False,
) -> tuple[np.ndarray, StreamState, dict[str, float]]:
    """Process step k and emit exactly `current` samples.

    The window is source[k*C - H : k*C - H + W], zero-padded outside the
    stream. After one encode/convert/decode pass the current region is
    emitted with its first O samples cross-faded against the tail retained
    from the previous step (step 0 emits unmodified); the new overlap region
    is retained for the next step.
    """
    if k != state.k:
        raise ValueError(f"stream steps must run in order: expected step {state.k}, got {k}")
    C = cfg.current_samples
    H = cfg.history_samples
    O = cfg.overlap_samples
    needed = k * C + C + O + cfg.future_samples
    if not flush and len(source) < needed:
        raise ValueError(
            f"insufficient input for step {k}: need {needed} samples, have {len(source)}; "
            "pass flush=True at end of stream"
        )

    window = slice_pad(source, k * C - H, cfg.window_samples)
    t0 = time.perf_counter()
    z = codec.encode(window)
    t1 = time.perf_counter()
    z_hat = converter(z, state.cond_mel, state.spk)
    t2 = time.perf_counter()
    y = codec.decode(z_hat)
    t3 = time.perf_counter()

    out = y.samples[H : H + C].copy()
    new_tail = y.samples[H + C : H + C + O].copy()
    if k >= 1 and O > 0:
        out[:O] = crossfade(state.retained_tail, out[:O])
    state.retained_tail = new_tail
    state.k = k + 1
    step_timings = {
        "t_enc_ms": (t1 - t0) * 1000.0,
        "t_convert_ms": (t2 - t1) * 1000.0,
        "t_dec_ms": (t3 - t2) * 1000.0,
    }
    state.timings.append((step_timings["t_enc_ms"], step_timings["t_convert_ms"], step_timings["t_dec_ms"]))
    return out, state, step_timings


def stream_run(
    source: Waveform,
    reference: Waveform,
    cfg: StreamConfig,
    codec: CodecInterface,
    converter: ConverterFn,
) -> tuple[Waveform, LatencyReport]:
    """Stream the whole source through the converter.

    Conditioning features come from the reference once, up front. The final
    steps zero-pad the missing future context; the output is trimmed back to
    the source length, so durations match exactly.
    """
    n = len(source)
    if n < 1:
        raise ValueError("source must contain at least one sample")
    wall_start = time.perf_counter()
    state = init_stream(reference)
    C = cfg.current_samples
    O = cfg.overlap_samples
    F = cfg.future_samples
    steps = math.ceil(n / C)
    chunks = []
    for k in range(steps):
        flush = k * C + C + O + F > n
        chunk, state, _ = stream_step(state, cfg, source, k, codec, converter, flush=flush)
        chunks.append(chunk)
    out = np.concatenate(chunks)[:n]
    wall_s = time.perf_counter() - wall_start
    report = build_report(cfg, state.timings, wall_s, duration_s=source.duration_s)
    return Waveform(out), report
