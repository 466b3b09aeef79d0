"""Algorithmic core for score-driven singing voice synthesis experiments.

Covers music-score parsing and frame quantization, mel/F0 feature
processing, note-bounded monotonic alignment search, rhythm-preserving
length regulation, training objectives with analytic gradients, and a
deterministic synthetic corpus generator for end-to-end validation.
"""

from .align import (
    Durations,
    GaussianSeq,
    LogLikMatrix,
    alignment_score,
    brute_force_mas,
    fit_segment_gaussians,
    frame_to_phoneme,
    gaussian_loglik_matrix,
    mas,
    mas_note_bounded,
)
from .config import PipelineConfig, load_pipeline_config, parse_pipeline_config
from .dsp import (
    F0Contour,
    MelConfig,
    MelSpectrogram,
    log_f0_masked,
    mel_filterbank,
    mel_spectrogram,
    median_smooth_f0,
    stft_magnitude,
)
from .objectives import (
    DiagGaussianBatch,
    FeatureStack,
    LossWeights,
    duration_loss,
    feature_matching_loss,
    final_loss,
    kl_aperiodic,
    kl_diag_gaussian,
    lsgan_losses,
    mel_loss,
    pitch_loss,
    sample_gaussian,
)
from .regulator import PhonemeFrameExpansion, expand, largest_remainder, rhythm_adjust
from .score import (
    REST,
    Note,
    NoteFrameSpans,
    Score,
    ScoreError,
    ScoreMappingError,
    ScoreSyntaxError,
    ScoreValueError,
    note_frame_boundaries,
    parse_score,
    parse_scores,
    serialize_score,
)
from .synth import SynthConfig, corrupt_with_breath, generate_utterance, midi_to_hz

__version__ = "0.1.0"

__all__ = [
    "Durations", "GaussianSeq", "LogLikMatrix", "alignment_score",
    "brute_force_mas", "fit_segment_gaussians", "frame_to_phoneme",
    "gaussian_loglik_matrix", "mas", "mas_note_bounded",
    "PipelineConfig", "load_pipeline_config", "parse_pipeline_config",
    "F0Contour", "MelConfig", "MelSpectrogram", "log_f0_masked",
    "mel_filterbank", "mel_spectrogram", "median_smooth_f0", "stft_magnitude",
    "DiagGaussianBatch", "FeatureStack", "LossWeights", "duration_loss",
    "feature_matching_loss", "final_loss", "kl_aperiodic", "kl_diag_gaussian",
    "lsgan_losses", "mel_loss", "pitch_loss", "sample_gaussian",
    "PhonemeFrameExpansion", "expand", "largest_remainder", "rhythm_adjust",
    "REST", "Note", "NoteFrameSpans", "Score", "ScoreError",
    "ScoreMappingError", "ScoreSyntaxError", "ScoreValueError",
    "note_frame_boundaries", "parse_score", "parse_scores", "serialize_score",
    "SynthConfig", "corrupt_with_breath", "generate_utterance", "midi_to_hz",
]
