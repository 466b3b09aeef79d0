"""Command-line entry point wiring the pipeline together.

Subcommands are thin wrappers over the library: ``parse``, ``mel``,
``smooth``, ``align``, ``regulate``, ``losses``, ``gen``, and ``pipeline``.
Exit codes: 0 success, 1 usage error, 2 data or validation error.  Every
command computes all results before writing anything, and each file is
written atomically, so a failing run leaves no partial artifacts.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import align as align_mod
from . import dsp, fileio, objectives, regulator, synth
from .config import PipelineConfig, load_pipeline_config
from .score import Score, ScoreError, note_frame_boundaries, parse_scores, serialize_score


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; remap to our exit code 1.
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="svskit", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config file (key = value lines)")
    common.add_argument("--out-dir", default=".", help="output directory")
    common.add_argument("--seed", type=int, help="override the generator seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common],
                       help="validate a score file and print its canonical form")
    p.add_argument("score_file")

    p = sub.add_parser("mel", parents=[common],
                       help="extract a log-mel spectrogram from a WAV file")
    p.add_argument("wav_file")

    p = sub.add_parser("smooth", parents=[common],
                       help="median-smooth an F0 contour per voiced run")
    p.add_argument("f0_file")
    p.add_argument("--kernel", type=int, help="odd median window (default from config)")

    p = sub.add_parser("align", parents=[common],
                       help="note-bounded monotonic alignment from latents and priors")
    p.add_argument("--latents", required=True, help="MAT file of frame latents")
    p.add_argument("--priors", required=True, help="GAUSS file of phoneme priors")
    p.add_argument("--score", required=True, help="score file with one utterance")

    p = sub.add_parser("regulate", parents=[common],
                       help="rescale predicted durations to note spans")
    p.add_argument("--score", required=True, help="score file with one utterance")
    p.add_argument("--pred", required=True, help="PRED file of positive predictions")

    p = sub.add_parser("losses", parents=[common],
                       help="compute loss components from files and print them")
    p.add_argument("--weights", help="weights file (key=value lines)")
    p.add_argument("--q-periodic", help="GAUSS posterior for the periodic KL")
    p.add_argument("--p-periodic", help="GAUSS prior for the periodic KL")
    p.add_argument("--q-linguistic", help="GAUSS posterior for the linguistic KL")
    p.add_argument("--p-linguistic", help="GAUSS prior for the linguistic KL")
    p.add_argument("--q-aperiodic", help="GAUSS detached aperiodic posterior")
    p.add_argument("--p-aperiodic", help="GAUSS aperiodic prior")
    p.add_argument("--f0-true", help="F0 file, ground truth")
    p.add_argument("--f0-pred", help="per-frame F0 predictions, one per line")
    p.add_argument("--f0-smooth-pred", help="per-frame smoothed-F0 predictions")
    p.add_argument("--kernel", type=int, help="median kernel for the pitch loss")
    p.add_argument("--mel-true", help="MEL file, ground truth")
    p.add_argument("--mel-pred", help="MEL file, prediction")
    p.add_argument("--dur-true", help="DUR file, ground truth")
    p.add_argument("--dur-pred", help="PRED file, predicted durations")
    p.add_argument("--disc-real", action="append", default=[],
                   help="MAT file of discriminator outputs on real audio (repeatable)")
    p.add_argument("--disc-fake", action="append", default=[],
                   help="MAT file of discriminator outputs on generated audio")
    p.add_argument("--fm-real", action="append", default=[],
                   help="MAT file of discriminator features on real audio")
    p.add_argument("--fm-fake", action="append", default=[],
                   help="MAT file of discriminator features on generated audio")

    p = sub.add_parser("gen", parents=[common],
                       help="render synthetic utterances with ground truth")
    p.add_argument("score_file")

    p = sub.add_parser("pipeline", parents=[common],
                       help="gen -> mel/F0 -> align -> regulate, report agreement")
    p.add_argument("score_file")
    return parser


def _load_config(args) -> PipelineConfig:
    if args.config:
        return load_pipeline_config(args.config)
    return PipelineConfig()


def _load_scores(path) -> list[Score]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return parse_scores(handle.read())
    except ScoreError as err:
        raise ScoreError(f"{path}:{err}") from err


def _load_single_score(path) -> Score:
    scores = _load_scores(path)
    if len(scores) != 1:
        raise ScoreError(f"{path}: expected exactly one utterance, found {len(scores)}")
    return scores[0]


def _out(args, name: str) -> Path:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / name


def _cmd_parse(args) -> int:
    for score in _load_scores(args.score_file):
        print(serialize_score(score))
    return 0


def _cmd_mel(args) -> int:
    cfg = _load_config(args)
    samples, sample_rate = fileio.read_wav(args.wav_file)
    if sample_rate != cfg.mel.sample_rate:
        raise ValueError(
            f"{args.wav_file}: sample rate {sample_rate} does not match "
            f"configured {cfg.mel.sample_rate}")
    mel = dsp.mel_spectrogram(samples, cfg.mel)
    fileio.write_mel(_out(args, Path(args.wav_file).stem + ".mel"), mel)
    return 0


def _cmd_smooth(args) -> int:
    cfg = _load_config(args)
    kernel = args.kernel if args.kernel is not None else cfg.kernel
    contour = fileio.read_f0(args.f0_file)
    smoothed = dsp.median_smooth_f0(contour, kernel)
    fileio.write_f0(_out(args, Path(args.f0_file).stem + ".smooth.f0"), smoothed)
    return 0


def _cmd_align(args) -> int:
    cfg = _load_config(args)
    score = _load_single_score(args.score)
    latents = fileio.read_matrix(args.latents)
    priors = fileio.read_gaussian_seq(args.priors)
    spans = note_frame_boundaries(score, cfg.mel.sample_rate, cfg.mel.hop)
    loglik = align_mod.gaussian_loglik_matrix(latents, priors)
    durations = align_mod.mas_note_bounded(loglik, score.phoneme_note_idx, spans)
    fileio.write_durations(_out(args, f"{score.utt_id}.dur"), durations)
    return 0


def _cmd_regulate(args) -> int:
    cfg = _load_config(args)
    score = _load_single_score(args.score)
    predicted = fileio.read_predictions(args.pred)
    spans = note_frame_boundaries(score, cfg.mel.sample_rate, cfg.mel.hop)
    durations = regulator.rhythm_adjust(predicted, score.phoneme_note_idx, spans)
    fileio.write_durations(_out(args, f"{score.utt_id}.dur"), durations)
    return 0


def _read_weights_file(path) -> objectives.LossWeights:
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = float(value)
    return objectives.LossWeights(**values)


def _cmd_losses(args) -> int:
    cfg = _load_config(args)
    weights = _read_weights_file(args.weights) if args.weights else cfg.weights
    kernel = args.kernel if args.kernel is not None else cfg.kernel
    components = {name: 0.0 for name in objectives.FINAL_LOSS_COMPONENTS}
    report: list[tuple[str, float]] = []

    if args.q_periodic or args.p_periodic:
        q = _as_batch(fileio.read_gaussian_seq(_require(args.q_periodic, "--q-periodic")))
        p = _as_batch(fileio.read_gaussian_seq(_require(args.p_periodic, "--p-periodic")))
        components["kl_p"], _ = objectives.kl_diag_gaussian(q, p)
        report.append(("kl_p", components["kl_p"]))
    linguistic = (args.q_linguistic, args.p_linguistic,
                  args.q_aperiodic, args.p_aperiodic)
    if any(linguistic):
        names = ("--q-linguistic", "--p-linguistic", "--q-aperiodic", "--p-aperiodic")
        batches = [_as_batch(fileio.read_gaussian_seq(_require(path, name)))
                   for path, name in zip(linguistic, names)]
        components["kl_a"], _ = objectives.kl_aperiodic(
            *batches, lambda_l=weights.lambda_l)
        report.append(("kl_a", components["kl_a"]))
    if args.f0_true or args.f0_pred:
        f0_true = fileio.read_f0(_require(args.f0_true, "--f0-true"))
        pred = _read_vector(_require(args.f0_pred, "--f0-pred"))
        smooth = (_read_vector(args.f0_smooth_pred)
                  if args.f0_smooth_pred else pred)
        components["pitch"], _ = objectives.pitch_loss(
            f0_true, pred, smooth, weights.lambda_s, kernel)
        report.append(("pitch", components["pitch"]))
    if args.mel_true or args.mel_pred:
        mel_true, _, _ = fileio.read_mel(_require(args.mel_true, "--mel-true"))
        mel_pred, _, _ = fileio.read_mel(_require(args.mel_pred, "--mel-pred"))
        components["mel"], _ = objectives.mel_loss(mel_true, mel_pred)
        report.append(("mel", components["mel"]))
    if args.dur_true or args.dur_pred:
        d_true = fileio.read_durations(_require(args.dur_true, "--dur-true"))
        d_pred = fileio.read_predictions(_require(args.dur_pred, "--dur-pred"))
        components["dur"], _ = objectives.duration_loss(
            d_true.values.astype(float), d_pred)
        report.append(("dur", components["dur"]))
    if args.disc_real or args.disc_fake:
        if len(args.disc_real) != len(args.disc_fake) or not args.disc_real:
            raise ValueError("--disc-real and --disc-fake must pair up")
        real = [fileio.read_matrix(p) for p in args.disc_real]
        fake = [fileio.read_matrix(p) for p in args.disc_fake]
        dis, adv, _ = objectives.lsgan_losses(real, fake)
        components["adv"] = adv
        report.append(("dis", dis))
        report.append(("adv", adv))
    if args.fm_real or args.fm_fake:
        if len(args.fm_real) != len(args.fm_fake) or not args.fm_real:
            raise ValueError("--fm-real and --fm-fake must pair up")
        real = objectives.FeatureStack(
            tuple(fileio.read_matrix(p) for p in args.fm_real))
        fake = objectives.FeatureStack(
            tuple(fileio.read_matrix(p) for p in args.fm_fake))
        components["fm"], _ = objectives.feature_matching_loss(real, fake)
        report.append(("fm", components["fm"]))

    report.append(("final", objectives.final_loss(components, weights)))
    for name, value in report:
        print(f"{name} {value:.9g}")
    return 0


def _require(value, flag: str):
    if not value:
        raise ValueError(f"{flag} is required for this loss component")
    return value


def _read_vector(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as handle:
        values = [line.strip() for line in handle if line.strip()]
    try:
        return np.array([float(v) for v in values])
    except ValueError:
        raise ValueError(f"{path}: expected one decimal per line") from None


def _as_batch(seq: align_mod.GaussianSeq) -> objectives.DiagGaussianBatch:
    return objectives.DiagGaussianBatch(means=seq.means, log_stds=seq.log_stds)


def _synth_config(args, cfg: PipelineConfig) -> synth.SynthConfig:
    if args.seed is None:
        return cfg.synth
    from dataclasses import replace
    return replace(cfg.synth, seed=args.seed)


def _cmd_gen(args) -> int:
    cfg = _load_config(args)
    synth_cfg = _synth_config(args, cfg)
    staged = []
    for score in _load_scores(args.score_file):
        waveform, contour, durations = synth.generate_utterance(
            score, synth_cfg, hop=cfg.mel.hop)
        staged.append((score.utt_id, waveform, contour, durations))
    for utt_id, waveform, contour, durations in staged:
        fileio.write_wav(_out(args, f"{utt_id}.wav"), waveform,
                         synth_cfg.sample_rate)
        fileio.write_f0(_out(args, f"{utt_id}.f0"), contour)
        fileio.write_durations(_out(args, f"{utt_id}.dur"), durations)
    return 0


def _cmd_pipeline(args) -> int:
    cfg = _load_config(args)
    synth_cfg = _synth_config(args, cfg)
    staged = []
    total = within = 0
    for score in _load_scores(args.score_file):
        waveform, contour, truth = synth.generate_utterance(
            score, synth_cfg, hop=cfg.mel.hop)
        mel = dsp.mel_spectrogram(waveform, cfg.mel)
        spans = note_frame_boundaries(score, cfg.mel.sample_rate, cfg.mel.hop)
        priors = align_mod.fit_segment_gaussians(mel.frames, truth)
        loglik = align_mod.gaussian_loglik_matrix(mel.frames, priors)
        recovered = align_mod.mas_note_bounded(
            loglik, score.phoneme_note_idx, spans)
        regulated = regulator.rhythm_adjust(
            recovered.values.astype(float), score.phoneme_note_idx, spans)
        errors = np.abs(recovered.values - truth.values)
        total += len(truth)
        within += int((errors <= 2).sum())
        staged.append((score.utt_id, waveform, contour, mel, truth, regulated,
                       int(errors.max())))
    for utt_id, waveform, contour, mel, truth, regulated, max_err in staged:
        fileio.write_wav(_out(args, f"{utt_id}.wav"), waveform,
                         synth_cfg.sample_rate)
        fileio.write_f0(_out(args, f"{utt_id}.f0"), contour)
        fileio.write_mel(_out(args, f"{utt_id}.mel"), mel)
        fileio.write_durations(_out(args, f"{utt_id}.gt.dur"), truth)
        fileio.write_durations(_out(args, f"{utt_id}.dur"), regulated)
        print(f"{utt_id} phonemes {len(truth)} max_err {max_err}")
    print(f"total {total} within2 {within} rate {within / total:.4f}")
    return 0


_COMMANDS = {
    "parse": _cmd_parse,
    "mel": _cmd_mel,
    "smooth": _cmd_smooth,
    "align": _cmd_align,
    "regulate": _cmd_regulate,
    "losses": _cmd_losses,
    "gen": _cmd_gen,
    "pipeline": _cmd_pipeline,
}


def run(argv=None) -> int:
    """Parse arguments and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"svskit: usage error: {err}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (ScoreError, ValueError, OSError) as err:
        print(f"svskit: error: {err}", file=sys.stderr)
        return 2


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
