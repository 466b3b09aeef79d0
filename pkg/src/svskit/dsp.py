"""Mel-spectrogram extraction and F0 contour processing.

The mel front end is fixed to one documented convention: Hann window,
center reflect padding, magnitude (not power) spectrum, HTK-scale
triangular filters without area normalization, and natural-log compression
with a floor.  F0 contours are per-frame Hz values where 0 marks an
unvoiced frame; the frame rate is the mel hop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

F0_MIN_HZ = 20.0
F0_MAX_HZ = 2000.0


@dataclass(frozen=True)
class MelConfig:
    """STFT and filterbank settings for mel extraction."""

    sample_rate: int = 44100
    fft_size: int = 2048
    win_size: int = 2048
    hop: int = 512
    n_mels: int = 80
    fmin: float = 0.0
    fmax: float = 22050.0
    log_floor: float = 1e-5

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not (0 < self.hop <= self.win_size <= self.fft_size):
            raise ValueError(
                f"need 0 < hop <= win_size <= fft_size, got hop={self.hop}, "
                f"win_size={self.win_size}, fft_size={self.fft_size}")
        if self.n_mels < 1:
            raise ValueError(f"n_mels must be >= 1, got {self.n_mels}")
        if not (0.0 <= self.fmin < self.fmax <= self.sample_rate / 2):
            raise ValueError(
                f"need 0 <= fmin < fmax <= sample_rate/2, got "
                f"fmin={self.fmin}, fmax={self.fmax}, sr={self.sample_rate}")
        if self.log_floor <= 0:
            raise ValueError(f"log_floor must be positive, got {self.log_floor}")


@dataclass(frozen=True)
class MelSpectrogram:
    """Log-mel frames (T x n_mels) plus the config that produced them."""

    frames: np.ndarray
    config: MelConfig


@dataclass(frozen=True)
class F0Contour:
    """Per-frame fundamental frequency in Hz; 0.0 marks an unvoiced frame."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).copy()
        if values.ndim != 1:
            raise ValueError(f"F0 contour must be 1-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("F0 contour contains non-finite values")
        if np.any(values < 0):
            raise ValueError("F0 values must be >= 0 (0 marks unvoiced)")
        voiced = values[values > 0]
        if voiced.size and (voiced.min() <= F0_MIN_HZ or voiced.max() >= F0_MAX_HZ):
            raise ValueError(
                f"voiced F0 must lie in ({F0_MIN_HZ}, {F0_MAX_HZ}) Hz, got "
                f"range [{voiced.min():.3f}, {voiced.max():.3f}]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def voiced_mask(self) -> np.ndarray:
        return self.values > 0


def hz_to_mel(hz):
    """HTK mel scale."""
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(config: MelConfig) -> np.ndarray:
    """Triangular HTK-scale filters, peak 1, shape (n_mels, fft_size//2 + 1)."""
    n_bins = config.fft_size // 2 + 1
    bin_hz = np.arange(n_bins) * config.sample_rate / config.fft_size
    mel_pts = np.linspace(hz_to_mel(config.fmin), hz_to_mel(config.fmax),
                          config.n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    left = hz_pts[:-2, None]
    center = hz_pts[1:-1, None]
    right = hz_pts[2:, None]
    rising = (bin_hz - left) / (center - left)
    falling = (right - bin_hz) / (right - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def _hann(length: int) -> np.ndarray:
    # Periodic Hann, the STFT analysis convention.
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(length) / length)


def _frame(samples: np.ndarray, config: MelConfig) -> np.ndarray:
    pad = config.fft_size // 2
    padded = np.pad(samples, pad, mode="reflect")
    n_frames = samples.size // config.hop + 1
    windows = sliding_window_view(padded, config.fft_size)[::config.hop]
    return windows[:n_frames]


def stft_magnitude(samples, config: MelConfig) -> np.ndarray:
    """Magnitude STFT, shape (T, fft_size//2 + 1), T = floor(N/hop) + 1.

    Frame t is centered on sample t*hop via reflect padding of
    fft_size//2 samples on each side.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("samples must be a non-empty 1-D array")
    frames = _frame(x, config)
    window = _hann(config.win_size)
    if config.win_size < config.fft_size:
        lpad = (config.fft_size - config.win_size) // 2
        window = np.pad(window, (lpad, config.fft_size - config.win_size - lpad))
    return np.abs(np.fft.rfft(frames * window, axis=1))


def mel_spectrogram(samples, config: MelConfig) -> MelSpectrogram:
    """Log-mel spectrogram: ln(max(filterbank @ |STFT|, log_floor))."""
    magnitude = stft_magnitude(samples, config)
    mel_energy = magnitude @ mel_filterbank(config).T
    frames = np.log(np.maximum(mel_energy, config.log_floor))
    return MelSpectrogram(frames=frames, config=config)


def _voiced_runs(mask: np.ndarray):
    """Yield (start, end) of maximal voiced runs, half-open."""
    padded = np.concatenate(([False], mask, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return zip(edges[::2], edges[1::2])


def _median_filter(run: np.ndarray, kernel: int) -> np.ndarray:
    if kernel == 1 or run.size == 1:
        return run.copy()
    pad = kernel // 2
    padded = np.pad(run, pad, mode="reflect")
    return np.median(sliding_window_view(padded, kernel), axis=1)


def median_smooth_f0(f0: F0Contour, kernel: int) -> F0Contour:
    """Median-filter each maximal voiced run; unvoiced frames pass through.

    Each run is padded by reflection at its own edges, so unvoiced zeros
    never leak into a median window and the voicing mask is preserved
    exactly.  Short-term bends and vibrato are flattened while the note
    pitch survives.
    """
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"kernel must be an odd positive integer, got {kernel}")
    out = f0.values.copy()
    for start, end in _voiced_runs(f0.voiced_mask):
        out[start:end] = _median_filter(f0.values[start:end], kernel)
    return F0Contour(out)


def log_f0_masked(f0: F0Contour) -> tuple[np.ndarray, np.ndarray]:
    """Natural log of voiced F0 values plus the voiced mask.

    Unvoiced entries hold 0.0 in the log vector and False in the mask;
    downstream losses must consult the mask rather than the placeholder.
    """
    mask = f0.voiced_mask
    logs = np.zeros_like(f0.values)
    logs[mask] = np.log(f0.values[mask])
    return logs, mask
