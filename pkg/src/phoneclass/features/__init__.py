"""Model input representations: mel context windows and raw audio slices."""

from phoneclass.features.audio import (
    WAVEFORM_WINDOW_S,
    WaveformWindow,
    load_waveform,
    waveform_window,
    waveform_window_length,
)
from phoneclass.features.cache import FeatureCache, load_cache, save_cache
from phoneclass.features.melspec import (
    FeatureWindow,
    MelConfig,
    append_deltas,
    center_frame_index,
    context_window,
    hz_to_mel,
    mel_filterbank,
    mel_frames,
    mel_to_hz,
    utterance_features,
)
from phoneclass.features.pipeline import extract_feature_windows, extract_waveform_windows

__all__ = [
    "FeatureCache",
    "FeatureWindow",
    "MelConfig",
    "WAVEFORM_WINDOW_S",
    "WaveformWindow",
    "append_deltas",
    "center_frame_index",
    "context_window",
    "extract_feature_windows",
    "extract_waveform_windows",
    "hz_to_mel",
    "load_cache",
    "load_waveform",
    "mel_filterbank",
    "mel_frames",
    "mel_to_hz",
    "save_cache",
    "utterance_features",
    "waveform_window",
    "waveform_window_length",
]
