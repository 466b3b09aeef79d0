"""Deterministic synthetic singing generator for end-to-end pipeline tests.

Produces a crude but controllable voice: a harmonic stack following the
note pitches (periodic part) plus seeded uniform noise (aperiodic part),
with optional vibrato and onset pitch bends.  Alongside the waveform it
returns the exact per-frame F0 contour and a ground-truth phoneme
segmentation, so alignment and smoothing code can be scored against known
answers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .align import Durations
from .dsp import F0Contour
from .regulator import rhythm_adjust
from .score import NoteFrameSpans, Score, note_frame_boundaries


@dataclass(frozen=True)
class SynthConfig:
    """Generator knobs.  Same seed, same score, same bytes out."""

    sample_rate: int = 44100
    n_harmonics: int = 8
    vibrato_rate: float = 6.0
    vibrato_depth: float = 10.0
    bend_depth: float = 0.0
    bend_frames: int = 0
    noise_level: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.n_harmonics < 1:
            raise ValueError(f"n_harmonics must be >= 1, got {self.n_harmonics}")
        if self.vibrato_depth < 0 or self.bend_depth < 0:
            raise ValueError("vibrato_depth and bend_depth must be >= 0")
        if self.vibrato_rate < 0 or self.bend_frames < 0:
            raise ValueError("vibrato_rate and bend_frames must be >= 0")
        if not 0.0 <= self.noise_level < 1.0:
            raise ValueError(
                f"noise_level must lie in [0, 1), got {self.noise_level}")


def midi_to_hz(pitch: float) -> float:
    """Equal temperament, A4 (MIDI 69) = 440 Hz."""
    return 440.0 * 2.0 ** ((pitch - 69.0) / 12.0)


def _frame_f0(score: Score, spans: NoteFrameSpans, cfg: SynthConfig,
              hop: int) -> np.ndarray:
    f0 = np.zeros(spans.total_frames)
    for note, (lo, hi) in zip(score.notes, spans.spans):
        if note.is_rest:
            continue
        t_sec = np.arange(lo, hi) * hop / cfg.sample_rate
        values = midi_to_hz(note.pitch) + cfg.vibrato_depth * np.sin(
            2.0 * np.pi * cfg.vibrato_rate * t_sec)
        if cfg.bend_frames > 0 and cfg.bend_depth > 0:
            k = np.arange(hi - lo)
            ramp = np.where(k < cfg.bend_frames,
                            -cfg.bend_depth * (1.0 - k / cfg.bend_frames), 0.0)
            values = values + ramp
        f0[lo:hi] = values
    return f0


def _sample_f0(f0: np.ndarray, spans: NoteFrameSpans, rests: Sequence[bool],
               hop: int, n_samples: int) -> np.ndarray:
    """Per-sample F0 via linear interpolation between frame centers.

    Interpolation runs within each note only, so pitch never glides across
    a note boundary and rests stay exactly at 0.
    """
    out = np.zeros(n_samples)
    centers = np.arange(len(f0)) * hop
    for (lo, hi), is_rest in zip(spans.spans, rests):
        if is_rest:
            continue
        s0 = lo * hop
        s1 = min(hi * hop, n_samples)
        out[s0:s1] = np.interp(np.arange(s0, s1), centers[lo:hi], f0[lo:hi])
    return out


def generate_utterance(score: Score, cfg: SynthConfig, hop: int = 512):
    """Render a score to (waveform, F0 ground truth, duration ground truth).

    Per note the contour is pitch + vibrato sinusoid + onset bend ramp; the
    waveform stacks harmonics 1..K with 1/k amplitudes over the integrated
    per-sample F0, plus seeded uniform noise everywhere.  Rest notes emit
    noise only.  Ground-truth durations split each note span evenly across
    its phonemes.  The waveform is trimmed so mel extraction at this hop
    yields exactly the quantized frame count.
    """
    spans = note_frame_boundaries(score, cfg.sample_rate, hop)
    total_frames = spans.total_frames
    f0 = _frame_f0(score, spans, cfg, hop)
    contour = F0Contour(f0)
    durations = rhythm_adjust(np.ones(len(score.phonemes)),
                              score.phoneme_note_idx, spans)

    n_samples = max(1, (total_frames - 1) * hop + hop // 2)
    rests = [note.is_rest for note in score.notes]
    sample_f0 = _sample_f0(f0, spans, rests, hop, n_samples)
    phase = np.cumsum(sample_f0) / cfg.sample_rate
    harmonic = np.zeros(n_samples)
    for k in range(1, cfg.n_harmonics + 1):
        harmonic += np.sin(2.0 * np.pi * k * phase) / k
    scale = 0.5 / sum(1.0 / k for k in range(1, cfg.n_harmonics + 1))
    harmonic = np.where(sample_f0 > 0, harmonic * scale, 0.0)

    rng = np.random.default_rng(cfg.seed)
    waveform = harmonic + cfg.noise_level * rng.uniform(-1.0, 1.0, n_samples)
    return waveform, contour, durations


def corrupt_with_breath(waveform, spans_to_corrupt: Sequence[tuple[int, int]],
                        seed: int = 0) -> np.ndarray:
    """Replace sample spans with lowpass-filtered noise at matched RMS.

    Breath-like stress stimulus: the corrupted spans keep the original
    energy envelope but lose all harmonic structure.  Samples outside the
    given spans are untouched.
    """
    out = np.array(waveform, dtype=np.float64, copy=True)
    if out.ndim != 1:
        raise ValueError(f"waveform must be 1-D, got shape {out.shape}")
    rng = np.random.default_rng(seed)
    kernel = np.ones(8) / 8.0
    for start, end in spans_to_corrupt:
        if not 0 <= start < end <= out.size:
            raise ValueError(
                f"span [{start}, {end}) out of range for {out.size} samples")
        target_rms = float(np.sqrt(np.mean(out[start:end] ** 2)))
        noise = np.convolve(rng.uniform(-1.0, 1.0, end - start), kernel,
                            mode="same")
        noise_rms = float(np.sqrt(np.mean(noise ** 2)))
        if target_rms == 0.0 or noise_rms == 0.0:
            out[start:end] = 0.0
        else:
            out[start:end] = noise * (target_rms / noise_rms)
    return out


# Durations is re-exported for callers consuming ground-truth alignments.
__all__ = ["SynthConfig", "midi_to_hz", "generate_utterance",
           "corrupt_with_breath", "Durations"]
