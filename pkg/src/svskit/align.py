"""Monotonic alignment search, optionally constrained to note boundaries.

The search assigns every frame to exactly one phoneme, left to right, with
each phoneme receiving at least one frame, maximizing the summed
log-likelihood of the chosen cells.  Ties between optimal alignments are
broken deterministically: transitions happen as late as possible, with the
last transition taking priority (equivalently, among optimal duration
vectors the one whose reversed tuple is lexicographically smallest wins).

The note-bounded variant partitions the problem at note boundaries: frames
of a note may only align to that note's phonemes, so the constrained search
factorizes exactly into independent per-note searches.  A note owning a
single phoneme bypasses the search entirely and receives its full span.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .score import NoteFrameSpans

LOG_STD_BOUND = 7.0

_LOG_2PI = float(np.log(2.0 * np.pi))

BRUTE_FORCE_MAX_FRAMES = 12
BRUTE_FORCE_MAX_PHONEMES = 5


@dataclass(frozen=True)
class GaussianSeq:
    """Per-step diagonal Gaussian parameters: means and log-stds, S x D."""

    means: np.ndarray
    log_stds: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64).copy()
        log_stds = np.asarray(self.log_stds, dtype=np.float64).copy()
        if means.ndim != 2 or means.shape != log_stds.shape:
            raise ValueError(
                f"means and log_stds must be matching 2-D arrays, got "
                f"{means.shape} and {log_stds.shape}")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(log_stds))):
            raise ValueError("Gaussian parameters must be finite")
        if np.any(np.abs(log_stds) > LOG_STD_BOUND):
            raise ValueError(
                f"log_stds must lie within [-{LOG_STD_BOUND}, {LOG_STD_BOUND}]")
        means.setflags(write=False)
        log_stds.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "log_stds", log_stds)

    @property
    def n_steps(self) -> int:
        return self.means.shape[0]

    @property
    def n_dims(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class LogLikMatrix:
    """T x S table: log-likelihood of frame t under phoneme s."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).copy()
        if values.ndim != 2:
            raise ValueError(f"log-likelihood table must be 2-D, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("log-likelihood table contains non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_phonemes(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class Durations:
    """Per-phoneme frame counts; every entry >= 1."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("durations must be a non-empty 1-D vector")
        if not np.issubdtype(values.dtype, np.integer):
            raise ValueError(f"durations must be integers, got dtype {values.dtype}")
        values = values.astype(np.int64)
        if np.any(values < 1):
            raise ValueError("every phoneme must receive at least one frame")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Durations):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def total(self) -> int:
        return int(self.values.sum())


def gaussian_loglik_matrix(latents, priors: GaussianSeq) -> LogLikMatrix:
    """Log-likelihood of each frame's latent under each diagonal Gaussian.

    values[t, s] = sum over dims of
        -0.5*ln(2*pi) - log_std - (x - mean)^2 / (2 * std^2)
    """
    x = np.asarray(latents, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"latents must be 2-D (frames x dims), got {x.shape}")
    if x.shape[1] != priors.n_dims:
        raise ValueError(
            f"latent dimension {x.shape[1]} does not match prior dimension "
            f"{priors.n_dims}")
    inv_var = np.exp(-2.0 * priors.log_stds)                      # (S, D)
    const = -0.5 * _LOG_2PI * priors.n_dims - priors.log_stds.sum(axis=1)
    diff = x[:, None, :] - priors.means[None, :, :]               # (T, S, D)
    quad = 0.5 * np.einsum("tsd,sd->ts", diff * diff, inv_var)
    return LogLikMatrix(const[None, :] - quad)


def frame_to_phoneme(durations: Durations) -> np.ndarray:
    """Expand durations to the per-frame phoneme index vector."""
    return np.repeat(np.arange(len(durations)), durations.values)


def fit_segment_gaussians(latents, durations: Durations,
                          min_std: float = 0.1) -> GaussianSeq:
    """Fit one diagonal Gaussian per phoneme from its segment of frames.

    ``min_std`` floors the per-dimension standard deviation so one-frame
    segments and constant dimensions stay usable as alignment priors.
    """
    x = np.asarray(latents, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != durations.total:
        raise ValueError(
            f"latents shape {x.shape} does not cover {durations.total} frames")
    if min_std <= 0:
        raise ValueError(f"min_std must be positive, got {min_std}")
    bounds = np.concatenate(([0], np.cumsum(durations.values)))
    means = np.empty((len(durations), x.shape[1]))
    stds = np.empty_like(means)
    for s in range(len(durations)):
        segment = x[bounds[s]:bounds[s + 1]]
        means[s] = segment.mean(axis=0)
        stds[s] = np.maximum(segment.std(axis=0), min_std)
    log_stds = np.clip(np.log(stds), -LOG_STD_BOUND, LOG_STD_BOUND)
    return GaussianSeq(means=means, log_stds=log_stds)


def alignment_score(loglik: LogLikMatrix, durations: Durations) -> float:
    """Total log-likelihood of the alignment described by ``durations``."""
    if durations.total != loglik.n_frames or len(durations) != loglik.n_phonemes:
        raise ValueError("durations do not describe an alignment of this table")
    path = frame_to_phoneme(durations)
    return float(loglik.values[np.arange(loglik.n_frames), path].sum())


def mas(loglik: LogLikMatrix) -> Durations:
    """Best monotonic complete alignment via dynamic programming.

    Q[t, s] is the best score of a path ending at frame t on phoneme s; each
    step either stays on the phoneme or advances by one.  On ties the
    backtrack prefers the diagonal predecessor, which realizes the
    advance-as-late-as-possible rule.
    """
    t_frames, s_phonemes = loglik.n_frames, loglik.n_phonemes
    if t_frames < s_phonemes:
        raise ValueError(
            f"cannot align {t_frames} frames to {s_phonemes} phonemes "
            f"(need at least one frame per phoneme)")
    v = loglik.values
    q = np.full((t_frames, s_phonemes), -np.inf)
    from_diag = np.zeros((t_frames, s_phonemes), dtype=bool)
    q[0, 0] = v[0, 0]
    for t in range(1, t_frames):
        stay = q[t - 1]
        advance = np.concatenate(([-np.inf], q[t - 1, :-1]))
        take_diag = advance >= stay
        take_diag[0] = False
        q[t] = v[t] + np.where(take_diag, advance, stay)
        from_diag[t] = take_diag

    durations = np.zeros(s_phonemes, dtype=np.int64)
    s = s_phonemes - 1
    for t in range(t_frames - 1, 0, -1):
        durations[s] += 1
        if from_diag[t, s]:
            s -= 1
    durations[0] += 1
    if s != 0:
        raise AssertionError("backtrack did not reach phoneme 0")
    return Durations(durations)


def brute_force_mas(loglik: LogLikMatrix) -> Durations:
    """Exhaustive oracle: enumerate every composition of T into S parts.

    Guarded to tiny instances; applies the same tie rule as ``mas`` by
    minimizing the reversed duration tuple among score-optimal candidates.
    """
    t_frames, s_phonemes = loglik.n_frames, loglik.n_phonemes
    if t_frames > BRUTE_FORCE_MAX_FRAMES or s_phonemes > BRUTE_FORCE_MAX_PHONEMES:
        raise ValueError(
            f"instance too large for enumeration: {t_frames} x {s_phonemes} "
            f"(limit {BRUTE_FORCE_MAX_FRAMES} x {BRUTE_FORCE_MAX_PHONEMES})")
    if t_frames < s_phonemes:
        raise ValueError(
            f"cannot align {t_frames} frames to {s_phonemes} phonemes "
            f"(need at least one frame per phoneme)")
    best_score = -np.inf
    best = None
    best_key = None
    for cuts in itertools.combinations(range(1, t_frames), s_phonemes - 1):
        bounds = (0,) + cuts + (t_frames,)
        durations = Durations(np.diff(bounds))
        score = alignment_score(loglik, durations)
        key = tuple(durations.values[::-1])
        if score > best_score or (score == best_score and key < best_key):
            best_score, best, best_key = score, durations, key
    return best


def _validate_note_map(phoneme_note_idx: Sequence[int], n_notes: int) -> np.ndarray:
    idx = np.asarray(phoneme_note_idx, dtype=np.int64)
    if idx.ndim != 1 or idx.size == 0:
        raise ValueError("phoneme_note_idx must be a non-empty 1-D sequence")
    if idx[0] != 0 or idx[-1] != n_notes - 1 or np.any(~np.isin(np.diff(idx), (0, 1))):
        raise ValueError(
            "phoneme_note_idx must be non-decreasing, start at 0, and cover "
            f"all {n_notes} notes")
    return idx


def mas_note_bounded(loglik: LogLikMatrix, phoneme_note_idx: Sequence[int],
                     spans: NoteFrameSpans) -> Durations:
    """Monotonic alignment search restricted to note boundaries.

    Frames of note n align only to phonemes of note n, so the table is
    sliced per note and each slice solved independently.  A single-phoneme
    note skips the search and takes its whole span.
    """
    idx = _validate_note_map(phoneme_note_idx, len(spans.spans))
    if idx.size != loglik.n_phonemes:
        raise ValueError(
            f"{idx.size} mapped phonemes but table has {loglik.n_phonemes}")
    if spans.total_frames != loglik.n_frames:
        raise ValueError(
            f"spans cover {spans.total_frames} frames but table has "
            f"{loglik.n_frames}")
    pieces = []
    for n, (f_lo, f_hi) in enumerate(spans.spans):
        phoneme_ids = np.flatnonzero(idx == n)
        n_ph = phoneme_ids.size
        span_len = f_hi - f_lo
        if span_len < n_ph:
            raise ValueError(
                f"note {n} is infeasible: {span_len} frames for {n_ph} phonemes")
        if n_ph == 1:
            pieces.append(np.array([span_len], dtype=np.int64))
            continue
        sub = LogLikMatrix(
            loglik.values[f_lo:f_hi, phoneme_ids[0]:phoneme_ids[-1] + 1])
        pieces.append(mas(sub).values)
    return Durations(np.concatenate(pieces))
