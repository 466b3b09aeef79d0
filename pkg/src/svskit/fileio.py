"""Text and WAV file formats shared by the CLI and the pipeline.

All text formats are whitespace-delimited UTF-8.  Headers name the payload
and its dimensions:

    MAT <T> <D>        one row of D decimals per line, T lines
    GAUSS <S> <D>      S mean rows, then S log-std rows
    DUR <S>            one integer per line
    PRED <S>           one positive decimal per line
    MEL <T> <M> <sr> <hop>   T rows of M decimals

F0 files are headerless: one Hz value per line, 0 = unvoiced.  Floats are
written with round-trip precision.  All writes go through a temp file and
an atomic rename, so readers never observe partial output.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .align import Durations, GaussianSeq
from .dsp import F0Contour, MelSpectrogram


def atomic_write_text(path, text: str) -> None:
    """Write text to ``path`` via temp file + rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return repr(float(x))


def _rows(matrix: np.ndarray) -> list[str]:
    return [" ".join(_fmt(v) for v in row) for row in np.atleast_2d(matrix)]


def _read_lines(path) -> list[str]:
    with open(path, "r", encoding="utf-8") as handle:
        return [line.strip() for line in handle if line.strip()]


def _parse_header(path, line: str, tag: str, n_fields: int) -> list[int]:
    parts = line.split()
    if len(parts) != n_fields + 1 or parts[0] != tag:
        raise ValueError(
            f"{path}:1: expected header '{tag}' with {n_fields} fields, "
            f"got {line!r}")
    try:
        return [int(p) for p in parts[1:]]
    except ValueError:
        raise ValueError(f"{path}:1: non-integer header field in {line!r}") from None


def _parse_matrix(path, lines: list[str], n_rows: int, n_cols: int,
                  first_line: int) -> np.ndarray:
    if len(lines) != n_rows:
        raise ValueError(
            f"{path}: expected {n_rows} data rows, found {len(lines)}")
    out = np.empty((n_rows, n_cols))
    for i, line in enumerate(lines):
        parts = line.split()
        if len(parts) != n_cols:
            raise ValueError(
                f"{path}:{first_line + i}: expected {n_cols} values, "
                f"got {len(parts)}")
        try:
            out[i] = [float(p) for p in parts]
        except ValueError:
            raise ValueError(
                f"{path}:{first_line + i}: non-numeric value") from None
    return out


def write_matrix(path, matrix) -> None:
    m = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    lines = [f"MAT {m.shape[0]} {m.shape[1]}"] + _rows(m)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    lines = _read_lines(path)
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    n_rows, n_cols = _parse_header(path, lines[0], "MAT", 2)
    return _parse_matrix(path, lines[1:], n_rows, n_cols, first_line=2)


def write_gaussian_seq(path, gaussians: GaussianSeq) -> None:
    lines = [f"GAUSS {gaussians.n_steps} {gaussians.n_dims}"]
    lines += _rows(gaussians.means)
    lines += _rows(gaussians.log_stds)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_gaussian_seq(path) -> GaussianSeq:
    lines = _read_lines(path)
    if not lines:
        raise ValueError(f"{path}: empty Gaussian file")
    n_steps, n_dims = _parse_header(path, lines[0], "GAUSS", 2)
    data = _parse_matrix(path, lines[1:], 2 * n_steps, n_dims, first_line=2)
    return GaussianSeq(means=data[:n_steps], log_stds=data[n_steps:])


def write_durations(path, durations: Durations) -> None:
    lines = [f"DUR {len(durations)}"] + [str(int(d)) for d in durations.values]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_durations(path) -> Durations:
    lines = _read_lines(path)
    if not lines:
        raise ValueError(f"{path}: empty durations file")
    (n,) = _parse_header(path, lines[0], "DUR", 1)
    if len(lines) - 1 != n:
        raise ValueError(f"{path}: expected {n} durations, found {len(lines) - 1}")
    try:
        values = np.array([int(line) for line in lines[1:]], dtype=np.int64)
    except ValueError:
        raise ValueError(f"{path}: durations must be integers") from None
    return Durations(values)


def write_predictions(path, predicted) -> None:
    p = np.asarray(predicted, dtype=np.float64)
    lines = [f"PRED {p.size}"] + [_fmt(v) for v in p]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_predictions(path) -> np.ndarray:
    lines = _read_lines(path)
    if not lines:
        raise ValueError(f"{path}: empty predictions file")
    (n,) = _parse_header(path, lines[0], "PRED", 1)
    if len(lines) - 1 != n:
        raise ValueError(f"{path}: expected {n} predictions, found {len(lines) - 1}")
    try:
        return np.array([float(line) for line in lines[1:]])
    except ValueError:
        raise ValueError(f"{path}: predictions must be decimals") from None


def write_f0(path, f0: F0Contour) -> None:
    atomic_write_text(path, "\n".join(_fmt(v) for v in f0.values) + "\n")


def read_f0(path) -> F0Contour:
    lines = _read_lines(path)
    if not lines:
        raise ValueError(f"{path}: empty F0 file")
    try:
        values = np.array([float(line) for line in lines])
    except ValueError:
        raise ValueError(f"{path}: F0 values must be one decimal per line") from None
    return F0Contour(values)


def write_mel(path, mel: MelSpectrogram) -> None:
    frames = mel.frames
    header = (f"MEL {frames.shape[0]} {frames.shape[1]} "
              f"{mel.config.sample_rate} {mel.config.hop}")
    atomic_write_text(path, "\n".join([header] + _rows(frames)) + "\n")


def read_mel(path) -> tuple[np.ndarray, int, int]:
    """Read a MEL file; returns (frames, sample_rate, hop)."""
    lines = _read_lines(path)
    if not lines:
        raise ValueError(f"{path}: empty mel file")
    n_frames, n_mels, sample_rate, hop = _parse_header(path, lines[0], "MEL", 4)
    frames = _parse_matrix(path, lines[1:], n_frames, n_mels, first_line=2)
    return frames, sample_rate, hop


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read mono 16-bit PCM; returns (float64 samples in [-1, 1), sample_rate)."""
    sample_rate, data = wavfile.read(path)
    if data.dtype != np.int16:
        raise ValueError(f"{path}: expected 16-bit PCM, got dtype {data.dtype}")
    if data.ndim != 1:
        raise ValueError(f"{path}: expected mono audio, got shape {data.shape}")
    return data.astype(np.float64) / 32768.0, int(sample_rate)


def write_wav(path, samples, sample_rate: int) -> None:
    """Write mono 16-bit PCM atomically, clipping to full scale."""
    x = np.asarray(samples, dtype=np.float64)
    pcm = np.clip(np.rint(x * 32767.0), -32768, 32767).astype(np.int16)
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    os.close(fd)
    try:
        wavfile.write(tmp, int(sample_rate), pcm)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
