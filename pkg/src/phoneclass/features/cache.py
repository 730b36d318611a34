"""On-disk feature cache keyed by (utterance_id, center time).

Layout: a directory holding ``header.json`` (kind + extraction config) and
``data.npz`` (keys and value arrays). A cache whose header no longer matches
the requested config is treated as absent, which forces recomputation.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from phoneclass.features.melspec import MelConfig

HEADER_NAME = "header.json"
DATA_NAME = "data.npz"


def _center_key(center_s: float) -> int:
    return round(center_s * 1e6)


class FeatureCache:
    """Stores one feature array per frame record."""

    def __init__(self, utterance_ids: list[str], centers_s: list[float], values: np.ndarray):
        if len(utterance_ids) != len(centers_s) or len(utterance_ids) != len(values):
            raise ValueError("keys and values must have equal length")
        self.utterance_ids = list(utterance_ids)
        self.centers_s = [float(c) for c in centers_s]
        self.values = values
        self._index = {
            (uid, _center_key(c)): i for i, (uid, c) in enumerate(zip(self.utterance_ids, self.centers_s))
        }

    def __len__(self) -> int:
        return len(self.utterance_ids)

    def get(self, utterance_id: str, center_s: float) -> np.ndarray | None:
        i = self._index.get((utterance_id, _center_key(center_s)))
        return None if i is None else self.values[i]


def _config_dict(kind: str, config: MelConfig | None, sample_rate_hz: int) -> dict:
    header = {"kind": kind, "sample_rate_hz": sample_rate_hz}
    if config is not None:
        header["mel_config"] = asdict(config)
    return header


def save_cache(
    cache_dir: str | Path,
    kind: str,
    values: np.ndarray,
    utterance_ids: list[str],
    centers_s: list[float],
    sample_rate_hz: int,
    config: MelConfig | None = None,
) -> Path:
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    header = _config_dict(kind, config, sample_rate_hz)
    header["count"] = len(utterance_ids)
    (cache_dir / HEADER_NAME).write_text(json.dumps(header, indent=2, sort_keys=True), encoding="utf-8")
    np.savez_compressed(
        cache_dir / DATA_NAME,
        utterance_ids=np.asarray(utterance_ids, dtype=object),
        centers_us=np.asarray([_center_key(c) for c in centers_s], dtype=np.int64),
        values=values,
    )
    return cache_dir


def load_cache(
    cache_dir: str | Path,
    kind: str,
    sample_rate_hz: int,
    config: MelConfig | None = None,
) -> FeatureCache | None:
    """Returns the cache, or None when missing or stale (config mismatch)."""
    cache_dir = Path(cache_dir)
    header_path = cache_dir / HEADER_NAME
    data_path = cache_dir / DATA_NAME
    if not header_path.exists() or not data_path.exists():
        return None
    header = json.loads(header_path.read_text(encoding="utf-8"))
    expected = _config_dict(kind, config, sample_rate_hz)
    if {k: header.get(k) for k in expected} != expected:
        return None
    with np.load(data_path, allow_pickle=True) as data:
        utterance_ids = [str(u) for u in data["utterance_ids"]]
        centers_s = [c / 1e6 for c in data["centers_us"]]
        values = data["values"]
    return FeatureCache(utterance_ids, centers_s, values)
