"""Pipeline configuration: flat ``key = value`` text with section prefixes.

Example::

    mel.fft_size = 2048
    smooth.kernel = 13
    loss.lambda_mel = 45
    sample.temperature = 0.667
    synth.vibrato_depth = 10

Unknown keys are rejected so typos fail loudly.  Defaults reproduce the
44.1 kHz / 80-mel front end, the kernel-13 smoother, the standard loss
weights, and temperature 0.667.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .dsp import MelConfig
from .objectives import LossWeights
from .synth import SynthConfig

_SECTIONS = {
    "mel": (MelConfig, ("sample_rate", "fft_size", "win_size", "hop",
                        "n_mels", "fmin", "fmax", "log_floor")),
    "loss": (LossWeights, ("lambda_l", "lambda_s", "lambda_fm", "lambda_mel",
                           "lambda_pitch", "lambda_a", "lambda_p", "lambda_dur")),
    "synth": (SynthConfig, ("n_harmonics", "vibrato_rate", "vibrato_depth",
                            "bend_depth", "bend_frames", "noise_level", "seed")),
}
_SCALARS = {
    "smooth.kernel": ("kernel", int),
    "sample.temperature": ("temperature", float),
}


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the CLI pipeline needs, with documented defaults."""

    mel: MelConfig = MelConfig()
    kernel: int = 13
    weights: LossWeights = LossWeights()
    temperature: float = 0.667
    synth: SynthConfig = SynthConfig()

    def __post_init__(self):
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ValueError(f"smooth.kernel must be odd and >= 1, got {self.kernel}")
        if not 0 <= self.temperature:
            raise ValueError(
                f"sample.temperature must be >= 0, got {self.temperature}")
        if self.synth.sample_rate != self.mel.sample_rate:
            object.__setattr__(
                self, "synth", replace(self.synth, sample_rate=self.mel.sample_rate))


def _field_type(cls, name: str):
    for f in fields(cls):
        if f.name == name:
            return f.type
    raise KeyError(name)


def _convert(raw: str, type_name: str, key: str, line_no: int):
    try:
        if type_name == "int":
            return int(raw)
        return float(raw)
    except ValueError:
        raise ValueError(
            f"line {line_no}: value {raw!r} for {key} is not a number") from None


def parse_pipeline_config(text: str) -> PipelineConfig:
    """Parse config text; unknown keys or malformed lines raise ValueError."""
    section_values: dict[str, dict] = {name: {} for name in _SECTIONS}
    scalar_values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _SCALARS:
            attr, conv = _SCALARS[key]
            scalar_values[attr] = _convert(value, conv.__name__, key, line_no)
            continue
        section, _, field_name = key.partition(".")
        if section in _SECTIONS and field_name in _SECTIONS[section][1]:
            cls = _SECTIONS[section][0]
            type_name = str(_field_type(cls, field_name))
            section_values[section][field_name] = _convert(
                value, type_name, key, line_no)
            continue
        raise ValueError(f"line {line_no}: unknown config key {key!r}")

    mel = MelConfig(**section_values["mel"])
    weights = LossWeights(**section_values["loss"])
    synth = SynthConfig(sample_rate=mel.sample_rate, **section_values["synth"])
    return PipelineConfig(mel=mel, weights=weights, synth=synth, **scalar_values)


def load_pipeline_config(path) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_pipeline_config(handle.read())
