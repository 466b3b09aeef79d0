"""Length regulation: expand by duration, and rescale predictions to notes.

``rhythm_adjust`` takes raw positive duration predictions and, note by
note, keeps only their ratios: each note's predictions are scaled so they
sum exactly to the note's frame span.  Integerization uses the
largest-remainder method (floor everything, then hand the missing frames
to the largest fractional parts, earlier phoneme on ties), and any phoneme
floored to zero steals a frame from the currently largest one, since every
phoneme must occupy at least one frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .align import Durations, frame_to_phoneme
from .score import NoteFrameSpans


@dataclass(frozen=True)
class PhonemeFrameExpansion:
    """Frame-to-phoneme index vector produced by expanding durations."""

    frame_to_phoneme: np.ndarray

    @classmethod
    def from_durations(cls, durations: Durations) -> "PhonemeFrameExpansion":
        return cls(frame_to_phoneme(durations))


def expand(values, durations: Durations) -> np.ndarray:
    """Repeat row s of ``values`` durations[s] times, order preserved."""
    rows = np.asarray(values)
    if rows.ndim != 2:
        raise ValueError(f"values must be 2-D (steps x dims), got {rows.shape}")
    if rows.shape[0] != len(durations):
        raise ValueError(
            f"{rows.shape[0]} rows but {len(durations)} durations")
    return np.repeat(rows, durations.values, axis=0)


def largest_remainder(shares, total: int) -> np.ndarray:
    """Apportion ``total`` integer units proportionally to positive shares.

    Floors the exact proportional amounts, gives the shortfall to the
    largest fractional parts (earlier index on ties), then repairs any zero
    by stealing one unit from the largest entry.  The result always sums to
    ``total`` with every entry >= 1; requires total >= len(shares).
    """
    weights = np.asarray(shares, dtype=np.float64)
    if weights.ndim != 1 or weights.size == 0:
        raise ValueError("shares must be a non-empty 1-D vector")
    if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise ValueError("shares must be positive and finite")
    if total < weights.size:
        raise ValueError(
            f"cannot apportion {total} units over {weights.size} entries "
            f"with a minimum of one each")
    raw = weights / weights.sum() * total
    counts = np.floor(raw).astype(np.int64)
    fractions = raw - counts
    shortfall = total - int(counts.sum())
    # Stable sort keeps earlier indices first among equal fractions.
    for i in np.argsort(-fractions, kind="stable")[:shortfall]:
        counts[i] += 1
    while np.any(counts == 0):
        counts[np.argmin(counts)] += 1
        counts[np.argmax(counts)] -= 1
    return counts


def rhythm_adjust(predicted, phoneme_note_idx: Sequence[int],
                  spans: NoteFrameSpans) -> Durations:
    """Scale predicted phoneme durations to match each note's frame span.

    Only the ratios of predictions within a note matter; per-note sums equal
    the span lengths exactly, keeping synthesis locked to the score rhythm.
    """
    preds = np.asarray(predicted, dtype=np.float64)
    idx = np.asarray(phoneme_note_idx, dtype=np.int64)
    if preds.ndim != 1 or preds.size != idx.size:
        raise ValueError(
            f"predicted durations ({preds.shape}) must be one positive value "
            f"per mapped phoneme ({idx.size})")
    if np.any(preds <= 0) or not np.all(np.isfinite(preds)):
        raise ValueError("predicted durations must be positive and finite")
    pieces = []
    for n, (f_lo, f_hi) in enumerate(spans.spans):
        note_preds = preds[idx == n]
        span_len = f_hi - f_lo
        if note_preds.size == 0:
            raise ValueError(f"note {n} owns no phonemes")
        if span_len < note_preds.size:
            raise ValueError(
                f"note {n} is infeasible: {span_len} frames for "
                f"{note_preds.size} phonemes")
        pieces.append(largest_remainder(note_preds, span_len))
    return Durations(np.concatenate(pieces))
