"""Batch feature extraction for frame datasets.

Per utterance the audio is loaded once; the mel/derivative matrix (CNN path)
or the raw signal (raw-encoder path) is then sliced per frame record.
Outputs are deterministic for a given input regardless of utterance order.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import numpy as np

from phoneclass.corpus.alignments import UtteranceRecord
from phoneclass.corpus.frames import FrameRecord
from phoneclass.errors import DataError
from phoneclass.features.audio import load_waveform, waveform_window, waveform_window_length
from phoneclass.features.cache import FeatureCache, load_cache, save_cache
from phoneclass.features.melspec import (
    MelConfig,
    center_frame_index,
    context_window,
    utterance_features,
)


def _group_by_utterance(frames: list[FrameRecord]) -> dict[str, list[int]]:
    grouped: dict[str, list[int]] = defaultdict(list)
    for i, frame in enumerate(frames):
        grouped[frame.utterance_id].append(i)
    return grouped


def _utterance_map(utterances: list[UtteranceRecord]) -> dict[str, UtteranceRecord]:
    return {u.utterance_id: u for u in utterances}


def extract_feature_windows(
    frames: list[FrameRecord],
    utterances: list[UtteranceRecord],
    config: MelConfig,
    cache_dir: str | Path | None = None,
) -> np.ndarray:
    """Context windows for every frame record: shape (n, context, 3 * n_mels)."""
    if cache_dir is not None:
        cached = load_cache(cache_dir, "feature_window", config.sample_rate_hz, config)
        values = _from_cache(cached, frames)
        if values is not None:
            return values

    by_utt = _group_by_utterance(frames)
    utt_map = _utterance_map(utterances)
    out = np.zeros((len(frames), config.context_frames, config.feature_width))
    for utterance_id in sorted(by_utt):
        utt = utt_map.get(utterance_id)
        if utt is None:
            raise DataError(f"frame references unknown utterance {utterance_id!r}")
        samples = load_waveform(utt.audio_path, config.sample_rate_hz)
        feats = utterance_features(samples, config)
        for i in by_utt[utterance_id]:
            idx = center_frame_index(frames[i].center_s, config, feats.shape[0])
            out[i] = context_window(feats, idx, config).values

    if cache_dir is not None:
        save_cache(
            cache_dir,
            "feature_window",
            out,
            [f.utterance_id for f in frames],
            [f.center_s for f in frames],
            config.sample_rate_hz,
            config,
        )
    return out


def extract_waveform_windows(
    frames: list[FrameRecord],
    utterances: list[UtteranceRecord],
    sample_rate_hz: int = 16000,
    cache_dir: str | Path | None = None,
) -> np.ndarray:
    """Raw windows for every frame record: shape (n, round(0.127 * rate))."""
    if cache_dir is not None:
        cached = load_cache(cache_dir, "waveform_window", sample_rate_hz)
        values = _from_cache(cached, frames)
        if values is not None:
            return values

    by_utt = _group_by_utterance(frames)
    utt_map = _utterance_map(utterances)
    out = np.zeros((len(frames), waveform_window_length(sample_rate_hz)))
    for utterance_id in sorted(by_utt):
        utt = utt_map.get(utterance_id)
        if utt is None:
            raise DataError(f"frame references unknown utterance {utterance_id!r}")
        samples = load_waveform(utt.audio_path, sample_rate_hz)
        for i in by_utt[utterance_id]:
            out[i] = waveform_window(samples, frames[i].center_s, sample_rate_hz).samples

    if cache_dir is not None:
        save_cache(
            cache_dir,
            "waveform_window",
            out,
            [f.utterance_id for f in frames],
            [f.center_s for f in frames],
            sample_rate_hz,
        )
    return out


def _from_cache(cached: FeatureCache | None, frames: list[FrameRecord]) -> np.ndarray | None:
    if cached is None:
        return None
    rows = []
    for frame in frames:
        value = cached.get(frame.utterance_id, frame.center_s)
        if value is None:
            return None  # cache incomplete for this dataset
        rows.append(value)
    return np.stack(rows) if rows else None
