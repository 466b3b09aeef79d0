"""Music-score parsing, validation, and frame quantization.

Score files are UTF-8 text with one utterance per line and five mandatory
pipe-separated fields::

    utt_id|phonemes|note_pitches|note_durations_sec|phoneme_note_idx

``phonemes`` is a space-separated list of phoneme symbols.  ``note_pitches``
holds one token per note, each a MIDI integer in [0, 127] or the literal
``rest``.  ``note_durations_sec`` holds one positive decimal per note.
``phoneme_note_idx`` assigns each phoneme to the index of the note that owns
it; the mapping must be non-decreasing, start at note 0, and reach every
note, so every note owns at least one phoneme.  Rests are ordinary notes
that carry a silence phoneme in the phoneme stream.

An optional sixth field carries one flag token per phoneme (slur/aspirate
markers found in annotated corpora); flags are preserved verbatim but have
no semantics here.  Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

REST = -1

_FIELD_NAMES = ("utt_id", "phonemes", "note_pitches", "note_durations_sec",
                "phoneme_note_idx", "flags")


class ScoreError(ValueError):
    """Base class for score parsing and validation failures."""


class ScoreSyntaxError(ScoreError):
    """Malformed score text.  Carries 1-based ``line`` and ``column``."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}" if line else message)
        self.line = line
        self.column = column


class ScoreMappingError(ScoreError):
    """phoneme_note_idx is not a monotone surjection onto the notes."""


class ScoreValueError(ScoreError):
    """A field value is out of range (duration, pitch)."""


@dataclass(frozen=True)
class Note:
    """A single note: MIDI pitch (or ``REST``) and duration in seconds."""

    pitch: int
    duration_sec: float

    def __post_init__(self):
        if not (self.duration_sec > 0.0 and math.isfinite(self.duration_sec)):
            raise ScoreValueError(
                f"note duration must be a positive finite number of seconds, "
                f"got {self.duration_sec!r}")
        if self.pitch != REST and not (0 <= self.pitch <= 127):
            raise ScoreValueError(
                f"note pitch must be REST or a MIDI number in [0, 127], "
                f"got {self.pitch!r}")

    @property
    def is_rest(self) -> bool:
        return self.pitch == REST


@dataclass(frozen=True)
class Score:
    """One utterance: phonemes, notes, and the phoneme-to-note mapping."""

    utt_id: str
    phonemes: tuple[str, ...]
    notes: tuple[Note, ...]
    phoneme_note_idx: tuple[int, ...]
    flags: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        if not self.utt_id:
            raise ScoreValueError("utt_id must be non-empty")
        if not self.phonemes or not self.notes:
            raise ScoreValueError("a score needs at least one phoneme and one note")
        if len(self.phoneme_note_idx) != len(self.phonemes):
            raise ScoreMappingError(
                f"phoneme_note_idx has {len(self.phoneme_note_idx)} entries "
                f"for {len(self.phonemes)} phonemes")
        idx = self.phoneme_note_idx
        if idx[0] != 0:
            raise ScoreMappingError("phoneme_note_idx must start at note 0")
        if idx[-1] != len(self.notes) - 1:
            raise ScoreMappingError(
                f"phoneme_note_idx must end at the last note "
                f"({len(self.notes) - 1}), got {idx[-1]}")
        for a, b in zip(idx, idx[1:]):
            if b - a not in (0, 1):
                raise ScoreMappingError(
                    f"phoneme_note_idx must be non-decreasing and must not "
                    f"skip notes (saw step {a} -> {b})")
        if self.flags is not None and len(self.flags) != len(self.phonemes):
            raise ScoreValueError(
                f"flags field has {len(self.flags)} entries for "
                f"{len(self.phonemes)} phonemes")

    @property
    def total_duration_sec(self) -> float:
        return sum(n.duration_sec for n in self.notes)

    def phoneme_counts(self) -> list[int]:
        """Number of phonemes owned by each note, in note order."""
        counts = [0] * len(self.notes)
        for i in self.phoneme_note_idx:
            counts[i] += 1
        return counts


@dataclass(frozen=True)
class NoteFrameSpans:
    """Half-open frame intervals [start, end), one per note, contiguous from 0."""

    spans: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.spans:
            raise ScoreValueError("spans must be non-empty")
        if self.spans[0][0] != 0:
            raise ScoreValueError("first span must start at frame 0")
        prev_end = 0
        for i, (start, end) in enumerate(self.spans):
            if start != prev_end:
                raise ScoreValueError(
                    f"span {i} starts at {start}, expected {prev_end} "
                    f"(spans must be contiguous)")
            if end <= start:
                raise ScoreValueError(f"span {i} is empty: [{start}, {end})")
            prev_end = end

    @property
    def total_frames(self) -> int:
        return self.spans[-1][1]

    def length(self, i: int) -> int:
        start, end = self.spans[i]
        return end - start


def _round_half_away(x: float) -> int:
    # Deterministic, locale-independent rounding; ties go away from zero.
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def note_frame_boundaries(score: Score, sample_rate: float, hop: int) -> NoteFrameSpans:
    """Quantize note durations to frame spans at the given frame rate.

    Boundaries are rounded cumulative durations, not summed per-note
    roundings, so the total frame count never drifts from
    ``round(total_sec * sample_rate / hop)`` however long the score is.

    Raises ``ScoreValueError`` naming the note if any note quantizes to an
    empty span or to fewer frames than the phonemes it must hold.
    """
    if sample_rate <= 0:
        raise ScoreValueError(f"sample_rate must be positive, got {sample_rate}")
    if hop <= 0:
        raise ScoreValueError(f"hop must be positive, got {hop}")
    counts = score.phoneme_counts()
    boundaries = [0]
    cum = 0.0
    for note in score.notes:
        cum += note.duration_sec
        boundaries.append(_round_half_away(cum * sample_rate / hop))
    spans = []
    for i in range(len(score.notes)):
        start, end = boundaries[i], boundaries[i + 1]
        n_frames = end - start
        if n_frames < 1:
            raise ScoreValueError(
                f"note {i} of '{score.utt_id}' quantizes to {n_frames} frames "
                f"({score.notes[i].duration_sec} s at hop {hop})")
        if n_frames < counts[i]:
            raise ScoreValueError(
                f"note {i} of '{score.utt_id}' has {n_frames} frames for "
                f"{counts[i]} phonemes")
        spans.append((start, end))
    return NoteFrameSpans(tuple(spans))


def _parse_pitch(token: str, line: int, column: int) -> int:
    if token.lower() == "rest":
        return REST
    try:
        pitch = int(token)
    except ValueError:
        raise ScoreSyntaxError(
            f"note pitch must be a MIDI integer or 'rest', got {token!r}",
            line, column) from None
    if not 0 <= pitch <= 127:
        raise ScoreValueError(
            f"line {line}: note pitch {pitch} outside [0, 127]")
    return pitch


def _parse_line(text: str, line_no: int) -> Score:
    fields = text.split("|")
    if len(fields) not in (5, 6):
        raise ScoreSyntaxError(
            f"expected 5 or 6 pipe-separated fields, got {len(fields)}",
            line_no, 1)

    # Column bookkeeping: 1-based offset of each field within the line.
    offsets = [1]
    for f in fields[:-1]:
        offsets.append(offsets[-1] + len(f) + 1)

    utt_id = fields[0].strip()
    if not utt_id:
        raise ScoreSyntaxError("empty utt_id field", line_no, offsets[0])
    phonemes = tuple(fields[1].split())
    if not phonemes:
        raise ScoreSyntaxError("empty phoneme field", line_no, offsets[1])

    pitch_tokens = fields[2].split()
    dur_tokens = fields[3].split()
    if not pitch_tokens:
        raise ScoreSyntaxError("empty note_pitches field", line_no, offsets[2])
    if len(pitch_tokens) != len(dur_tokens):
        raise ScoreSyntaxError(
            f"{len(pitch_tokens)} pitches but {len(dur_tokens)} durations",
            line_no, offsets[3])

    pitches = [_parse_pitch(tok, line_no, offsets[2]) for tok in pitch_tokens]
    durations = []
    for tok in dur_tokens:
        try:
            durations.append(float(tok))
        except ValueError:
            raise ScoreSyntaxError(
                f"note duration must be a decimal, got {tok!r}",
                line_no, offsets[3]) from None
    notes = tuple(Note(p, d) for p, d in zip(pitches, durations))

    idx_tokens = fields[4].split()
    try:
        mapping = tuple(int(tok) for tok in idx_tokens)
    except ValueError:
        raise ScoreSyntaxError(
            "phoneme_note_idx entries must be integers",
            line_no, offsets[4]) from None

    flags = None
    if len(fields) == 6:
        flags = tuple(fields[5].split())

    return Score(utt_id, phonemes, notes, mapping, flags)


def parse_scores(text: str) -> list[Score]:
    """Parse a score document into one ``Score`` per utterance line."""
    scores = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        scores.append(_parse_line(line, line_no))
    return scores


def parse_score(text: str) -> Score:
    """Parse a document that must contain exactly one utterance."""
    scores = parse_scores(text)
    if len(scores) != 1:
        raise ScoreSyntaxError(
            f"expected exactly one utterance, found {len(scores)}",
            line=1, column=1)
    return scores[0]


def serialize_score(score: Score) -> str:
    """Render a score back to its single-line file form (round-trip exact)."""
    pitches = " ".join("rest" if n.is_rest else str(n.pitch) for n in score.notes)
    durations = " ".join(repr(float(n.duration_sec)) for n in score.notes)
    mapping = " ".join(str(i) for i in score.phoneme_note_idx)
    fields = [score.utt_id, " ".join(score.phonemes), pitches, durations, mapping]
    if score.flags is not None:
        fields.append(" ".join(score.flags))
    return "|".join(fields)
