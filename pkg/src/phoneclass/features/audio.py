"""Waveform loading and raw-audio window slicing.

The raw-encoder path consumes fixed-length ~127 ms slices:
round(0.127 * rate) samples, i.e. 2032 samples at 16 kHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from phoneclass.errors import FeatureError, WindowError

WAVEFORM_WINDOW_S = 0.127

_INT_SCALE = {np.dtype(np.int16): 32768.0, np.dtype(np.int32): 2147483648.0, np.dtype(np.uint8): 128.0}


def waveform_window_length(sample_rate_hz: int) -> int:
    return round(WAVEFORM_WINDOW_S * sample_rate_hz)


@dataclass(frozen=True)
class WaveformWindow:
    """Fixed-length raw audio slice centered on a frame."""

    samples: np.ndarray
    center_s: float
    sample_rate_hz: int

    def __post_init__(self):
        expected = waveform_window_length(self.sample_rate_hz)
        if self.samples.ndim != 1 or len(self.samples) != expected:
            raise WindowError(
                f"waveform window must hold {expected} samples at {self.sample_rate_hz} Hz, "
                f"got shape {self.samples.shape}"
            )
        if not np.all(np.isfinite(self.samples)):
            raise WindowError("waveform window contains non-finite samples")


def load_waveform(audio_path: str | Path, target_rate_hz: int = 16000) -> np.ndarray:
    """Read a WAV file as mono float64 in [-1, 1], resampled to the target rate."""
    audio_path = Path(audio_path)
    try:
        rate, data = wavfile.read(audio_path)
    except (OSError, ValueError) as exc:
        raise FeatureError(f"cannot read audio file {audio_path}: {exc}") from exc

    samples = np.asarray(data)
    dtype = samples.dtype
    scale = _INT_SCALE.get(dtype)
    samples = samples.astype(np.float64)
    if samples.ndim == 2:  # downmix channels
        samples = samples.mean(axis=1)
    if scale is not None:
        if dtype == np.uint8:  # unsigned storage is offset by half the range
            samples -= 128.0
        samples /= scale
    samples = np.clip(samples, -1.0, 1.0)

    if rate != target_rate_hz:
        g = math.gcd(int(rate), int(target_rate_hz))
        samples = resample_poly(samples, target_rate_hz // g, rate // g)
        samples = np.clip(samples, -1.0, 1.0)
    return samples


def waveform_window(samples: np.ndarray, center_s: float, sample_rate_hz: int) -> WaveformWindow:
    """Fixed-length slice centered at ``center_s``, zero-padded at the edges."""
    n = len(samples)
    center = round(center_s * sample_rate_hz)
    if center_s < 0 or center >= n:
        raise WindowError(f"window center {center_s:.4f}s lies outside the signal ({n} samples)")

    length = waveform_window_length(sample_rate_hz)
    start = center - length // 2
    out = np.zeros(length, dtype=np.float64)
    lo = max(start, 0)
    hi = min(start + length, n)
    out[lo - start : hi - start] = samples[lo:hi]
    return WaveformWindow(samples=out, center_s=center_s, sample_rate_hz=sample_rate_hz)
