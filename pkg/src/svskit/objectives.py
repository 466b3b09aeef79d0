"""Training objectives as pure numeric functions with analytic gradients.

Every loss returns ``(value, grads)`` where ``grads`` maps parameter-block
names to arrays of matching shape, so correctness can be checked against
finite differences without an autodiff framework.  Reductions follow one
convention throughout: KL divergences are summed over latent dimensions and
averaged over rows; element-wise losses are plain means.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .dsp import F0Contour, median_smooth_f0

LOG_STD_BOUND = 7.0

FINAL_LOSS_COMPONENTS = ("adv", "fm", "mel", "pitch", "kl_a", "kl_p", "dur")


@dataclass(frozen=True)
class DiagGaussianBatch:
    """Diagonal Gaussian parameters for a batch of rows: means/log-stds, N x D."""

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
    def shape(self) -> tuple[int, int]:
        return self.means.shape


@dataclass(frozen=True)
class LossWeights:
    """Weighting factors for the combined objective."""

    lambda_l: float = 1.0
    lambda_s: float = 1.0
    lambda_fm: float = 2.0
    lambda_mel: float = 45.0
    lambda_pitch: float = 10.0
    lambda_a: float = 1.0
    lambda_p: float = 1.0
    lambda_dur: float = 1.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class FeatureStack:
    """One array per discriminator layer, arbitrary shapes."""

    layers: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("feature stack must hold at least one layer")
        layers = tuple(np.asarray(a, dtype=np.float64) for a in self.layers)
        object.__setattr__(self, "layers", layers)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.layers)


def _check_pair(q: DiagGaussianBatch, p: DiagGaussianBatch, what: str):
    if q.shape != p.shape:
        raise ValueError(f"{what}: shape mismatch {q.shape} vs {p.shape}")


def kl_diag_gaussian(q: DiagGaussianBatch, p: DiagGaussianBatch):
    """KL(q || p) for diagonal Gaussians, summed over dims, averaged over rows.

    Per element: log s_p - log s_q + (s_q^2 + (m_q - m_p)^2) / (2 s_p^2) - 1/2.
    """
    _check_pair(q, p, "kl_diag_gaussian")
    n = q.shape[0]
    diff = q.means - p.means
    var_q = np.exp(2.0 * q.log_stds)
    var_p = np.exp(2.0 * p.log_stds)
    elem = p.log_stds - q.log_stds + (var_q + diff * diff) / (2.0 * var_p) - 0.5
    value = float(elem.sum() / n)
    g_q_means = diff / var_p / n
    grads = {
        "q_means": g_q_means,
        "p_means": -g_q_means,
        "q_log_stds": (var_q / var_p - 1.0) / n,
        "p_log_stds": (1.0 - (var_q + diff * diff) / var_p) / n,
    }
    return value, grads


def kl_aperiodic(q_l: DiagGaussianBatch, p_l: DiagGaussianBatch,
                 q_a_detached: DiagGaussianBatch, p_a: DiagGaussianBatch,
                 lambda_l: float):
    """Linguistic KL plus weighted KL against the detached aperiodic posterior.

    The detachment is part of the contract: gradients with respect to
    ``q_a_detached`` are identically zero, while ``p_a`` is still pulled
    toward it.
    """
    kl_l, grads_l = kl_diag_gaussian(q_l, p_l)
    kl_a, grads_a = kl_diag_gaussian(q_a_detached, p_a)
    value = kl_l + lambda_l * kl_a
    grads = {
        "q_l_means": grads_l["q_means"],
        "q_l_log_stds": grads_l["q_log_stds"],
        "p_l_means": grads_l["p_means"],
        "p_l_log_stds": grads_l["p_log_stds"],
        "q_a_means": np.zeros_like(q_a_detached.means),
        "q_a_log_stds": np.zeros_like(q_a_detached.log_stds),
        "p_a_means": lambda_l * grads_a["p_means"],
        "p_a_log_stds": lambda_l * grads_a["p_log_stds"],
    }
    return value, grads


def sample_gaussian(stats: DiagGaussianBatch, tau: float, eps) -> np.ndarray:
    """Reparameterized draw: mean + tau * std * eps.

    ``tau`` scales the standard deviation at sampling time; 0 collapses the
    draw onto the mean.
    """
    if not (np.isfinite(tau) and tau >= 0):
        raise ValueError(f"tau must be finite and >= 0, got {tau}")
    noise = np.asarray(eps, dtype=np.float64)
    if noise.shape != stats.shape:
        raise ValueError(
            f"eps shape {noise.shape} does not match parameters {stats.shape}")
    return stats.means + tau * np.exp(stats.log_stds) * noise


def pitch_loss(f0_true: F0Contour, f0_pred, f0_smooth_pred,
               lambda_s: float, kernel: int):
    """L1 log-F0 loss plus weighted L1 against the median-smoothed target.

    Both terms are means over the voiced frames of the true contour;
    unvoiced frames are excluded via the shared mask.  Predictions must be
    positive wherever the mask is set.
    """
    pred = np.asarray(f0_pred, dtype=np.float64)
    smooth_pred = np.asarray(f0_smooth_pred, dtype=np.float64)
    n = len(f0_true)
    if pred.shape != (n,) or smooth_pred.shape != (n,):
        raise ValueError(
            f"predictions must be length-{n} vectors, got {pred.shape} and "
            f"{smooth_pred.shape}")
    mask = f0_true.voiced_mask
    g_pred = np.zeros(n)
    g_smooth = np.zeros(n)
    voiced = int(mask.sum())
    if voiced == 0:
        return 0.0, {"f0_pred": g_pred, "f0_smooth_pred": g_smooth}
    if np.any(pred[mask] <= 0) or np.any(smooth_pred[mask] <= 0):
        raise ValueError("predictions must be positive on voiced frames")

    smooth_true = median_smooth_f0(f0_true, kernel).values
    r_raw = np.log(f0_true.values[mask]) - np.log(pred[mask])
    r_smooth = np.log(smooth_true[mask]) - np.log(smooth_pred[mask])
    value = float(np.abs(r_raw).mean() + lambda_s * np.abs(r_smooth).mean())
    g_pred[mask] = -np.sign(r_raw) / pred[mask] / voiced
    g_smooth[mask] = -lambda_s * np.sign(r_smooth) / smooth_pred[mask] / voiced
    return value, {"f0_pred": g_pred, "f0_smooth_pred": g_smooth}


def mel_loss(mel_true, mel_pred):
    """Mean absolute difference over all spectrogram entries."""
    a = np.asarray(mel_true, dtype=np.float64)
    b = np.asarray(mel_pred, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    sign = np.sign(diff) / a.size
    return float(np.abs(diff).mean()), {"mel_true": sign, "mel_pred": -sign}


def duration_loss(d_true, d_pred):
    """Mean squared difference between duration vectors."""
    a = np.asarray(d_true, dtype=np.float64)
    b = np.asarray(d_pred, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"duration vectors must match: {a.shape} vs {b.shape}")
    diff = a - b
    grad = 2.0 * diff / a.size
    return float((diff * diff).mean()), {"d_true": grad, "d_pred": -grad}


def lsgan_losses(d_real_outs: Sequence, d_fake_outs: Sequence):
    """Least-squares GAN losses over a set of sub-discriminator outputs.

    Returns (L_dis, L_adv, grads).  Each array is reduced by its own mean,
    then means are averaged across sub-discriminators with equal weight:
    L_dis pushes real outputs to 1 and fake to 0, L_adv pushes fake to 1.
    """
    if len(d_real_outs) == 0 or len(d_real_outs) != len(d_fake_outs):
        raise ValueError("need matching, non-empty real/fake output lists")
    k = len(d_real_outs)
    dis = 0.0
    adv = 0.0
    grads = {"dis_real": [], "dis_fake": [], "adv_fake": []}
    for real, fake in zip(d_real_outs, d_fake_outs):
        r = np.asarray(real, dtype=np.float64)
        g = np.asarray(fake, dtype=np.float64)
        dis += float(((r - 1.0) ** 2).mean() + (g ** 2).mean())
        adv += float(((g - 1.0) ** 2).mean())
        grads["dis_real"].append(2.0 * (r - 1.0) / (r.size * k))
        grads["dis_fake"].append(2.0 * g / (g.size * k))
        grads["adv_fake"].append(2.0 * (g - 1.0) / (g.size * k))
    return dis / k, adv / k, grads


def feature_matching_loss(real: FeatureStack, fake: FeatureStack):
    """Sum over layers of the per-layer mean absolute feature difference."""
    if real.counts != fake.counts or any(
            r.shape != f.shape for r, f in zip(real.layers, fake.layers)):
        raise ValueError("feature stacks must match layer-by-layer")
    value = 0.0
    grads = {"real": [], "fake": []}
    for r, f in zip(real.layers, fake.layers):
        diff = r - f
        value += float(np.abs(diff).mean())
        sign = np.sign(diff) / r.size
        grads["real"].append(sign)
        grads["fake"].append(-sign)
    return value, grads


def final_loss(components: Mapping[str, float], weights: LossWeights) -> float:
    """Weighted sum of the named loss components.

    adv + lambda_fm*fm + lambda_mel*mel + lambda_pitch*pitch
        + lambda_a*kl_a + lambda_p*kl_p + lambda_dur*dur
    """
    missing = [k for k in FINAL_LOSS_COMPONENTS if k not in components]
    if missing:
        raise ValueError(f"missing loss components: {missing}")
    vals = {k: float(components[k]) for k in FINAL_LOSS_COMPONENTS}
    bad = [k for k, v in vals.items() if not np.isfinite(v)]
    if bad:
        raise ValueError(f"non-finite loss components: {bad}")
    return (vals["adv"]
            + weights.lambda_fm * vals["fm"]
            + weights.lambda_mel * vals["mel"]
            + weights.lambda_pitch * vals["pitch"]
            + weights.lambda_a * vals["kl_a"]
            + weights.lambda_p * vals["kl_p"]
            + weights.lambda_dur * vals["dur"])
