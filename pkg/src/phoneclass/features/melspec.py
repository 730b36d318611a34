"""Log-mel filterbank features with derivative stacks and context windows.

The convolutional path consumes 11-frame context windows of 40 log-mel
energies plus first and second derivatives (11 x 120). Frames are 20 ms
with a 10 ms hop, so a context window spans exactly
(11 - 1) * 10 + 20 = 120 ms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from phoneclass.errors import ContractError, FeatureError

LOG_FLOOR = 1e-10  # avoids -inf on silent frames
DELTA_HALF_WINDOW = 2  # regression window of +/-2 frames, edges replicated


@dataclass(frozen=True)
class MelConfig:
    sample_rate_hz: int = 16000
    frame_length_s: float = 0.020
    frame_hop_s: float = 0.010
    n_mels: int = 40
    context_frames: int = 11
    fmin_hz: float = 0.0
    fmax_hz: float = 8000.0
    per_utterance_cmvn: bool = False

    def __post_init__(self):
        if self.context_frames % 2 != 1:
            raise ValueError("context_frames must be odd")
        if self.n_mels <= 0:
            raise ValueError("n_mels must be positive")
        if self.frame_length_s <= self.frame_hop_s:
            raise ValueError("frame_length_s must exceed frame_hop_s")

    @property
    def frame_length(self) -> int:
        return round(self.frame_length_s * self.sample_rate_hz)

    @property
    def frame_hop(self) -> int:
        return round(self.frame_hop_s * self.sample_rate_hz)

    @property
    def n_fft(self) -> int:
        n = 1
        while n < self.frame_length:
            n *= 2
        return n

    @property
    def feature_width(self) -> int:
        """Statics plus two derivative stacks."""
        return 3 * self.n_mels

    @property
    def context_span_ms(self) -> int:
        """Exact context span in integer milliseconds."""
        hop_ms = round(self.frame_hop_s * 1000)
        frame_ms = round(self.frame_length_s * 1000)
        return (self.context_frames - 1) * hop_ms + frame_ms


@dataclass(frozen=True)
class FeatureWindow:
    """Context window of stacked features, shape context_frames x (3 * n_mels)."""

    values: np.ndarray
    center_frame_index: int

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ContractError(f"feature window must be 2-D, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ContractError("feature window contains non-finite values")


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(config: MelConfig) -> np.ndarray:
    """Triangular filters on the mel scale, shape n_mels x (n_fft // 2 + 1)."""
    n_bins = config.n_fft // 2 + 1
    fmax = min(config.fmax_hz, config.sample_rate_hz / 2)
    mel_points = np.linspace(hz_to_mel(config.fmin_hz), hz_to_mel(fmax), config.n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    bin_freqs = np.arange(n_bins) * config.sample_rate_hz / config.n_fft

    fb = np.zeros((config.n_mels, n_bins))
    for m in range(config.n_mels):
        left, center, right = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        rising = (bin_freqs - left) / (center - left)
        falling = (right - bin_freqs) / (right - center)
        fb[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    return fb


def mel_frames(samples: np.ndarray, config: MelConfig) -> np.ndarray:
    """Log-mel energies, one row per frame: shape n_frames x n_mels."""
    samples = np.asarray(samples, dtype=np.float64)
    flen, hop = config.frame_length, config.frame_hop
    if len(samples) < flen:
        raise FeatureError(f"signal of {len(samples)} samples shorter than one {flen}-sample frame")

    framed = np.lib.stride_tricks.sliding_window_view(samples, flen)[::hop]
    windowed = framed * np.hamming(flen)
    spectrum = np.fft.rfft(windowed, n=config.n_fft, axis=1)
    power = np.abs(spectrum) ** 2
    energies = power @ mel_filterbank(config).T
    return np.log(np.maximum(energies, LOG_FLOOR))


def append_deltas(feats: np.ndarray) -> np.ndarray:
    """Stack first and second derivatives: n x d -> n x 3d.

    Regression-window deltas over +/-2 frames; sequences shorter than the
    window are handled by edge replication.
    """
    feats = np.asarray(feats, dtype=np.float64)
    if feats.ndim != 2:
        raise ContractError(f"expected a 2-D feature matrix, got shape {feats.shape}")

    def regression(x: np.ndarray) -> np.ndarray:
        padded = np.pad(x, ((DELTA_HALF_WINDOW, DELTA_HALF_WINDOW), (0, 0)), mode="edge")
        num = sum(
            n * (padded[DELTA_HALF_WINDOW + n : len(x) + DELTA_HALF_WINDOW + n] - padded[DELTA_HALF_WINDOW - n : len(x) + DELTA_HALF_WINDOW - n])
            for n in range(1, DELTA_HALF_WINDOW + 1)
        )
        denom = 2 * sum(n * n for n in range(1, DELTA_HALF_WINDOW + 1))
        return num / denom

    delta = regression(feats)
    delta2 = regression(delta)
    return np.hstack([feats, delta, delta2])


def context_window(feats: np.ndarray, center_frame: int, config: MelConfig | None = None) -> FeatureWindow:
    """Slice of ``context_frames`` rows centered at ``center_frame``.

    Out-of-range rows are zero-padded so edge frames still produce a full
    window.
    """
    config = config or MelConfig()
    feats = np.asarray(feats, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != config.feature_width:
        raise ContractError(
            f"expected features of width {config.feature_width}, got shape {feats.shape}"
        )
    n = feats.shape[0]
    if not 0 <= center_frame < n:
        raise ContractError(f"center_frame {center_frame} outside [0, {n - 1}]")

    half = config.context_frames // 2
    out = np.zeros((config.context_frames, config.feature_width))
    lo = max(center_frame - half, 0)
    hi = min(center_frame + half + 1, n)
    out[lo - (center_frame - half) : hi - (center_frame - half)] = feats[lo:hi]
    return FeatureWindow(values=out, center_frame_index=center_frame)


def center_frame_index(center_s: float, config: MelConfig, n_frames: int) -> int:
    """Mel-frame index whose 20 ms frame is centered nearest ``center_s``.

    Clamped to the valid range so utterance-edge frames remain usable.
    """
    idx = round((center_s - config.frame_length_s / 2) / config.frame_hop_s)
    return min(max(idx, 0), n_frames - 1)


def utterance_features(samples: np.ndarray, config: MelConfig) -> np.ndarray:
    """Full feature matrix for one utterance: log-mels with derivative stacks."""
    feats = append_deltas(mel_frames(samples, config))
    if config.per_utterance_cmvn:
        mean = feats.mean(axis=0)
        std = feats.std(axis=0)
        feats = (feats - mean) / np.maximum(std, 1e-8)
    return feats
