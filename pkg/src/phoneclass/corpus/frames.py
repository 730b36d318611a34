"""Frame extraction, class balancing and train/validation splitting.

Frame grid convention: centers every ``hop_s`` (default 10 ms), anchored at
the start of the utterance's first segment. A frame belongs to the segment
containing its center under half-open [start, end) intervals, so a center
exactly on a boundary belongs to the later segment. Grid arithmetic runs in
integer microseconds to keep results bit-stable.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from phoneclass.corpus.alignments import UtteranceRecord
from phoneclass.corpus.inventory import PhoneInventory
from phoneclass.errors import BalancingError, ParseError, SplitError

# Model input span per frame; drives the duration bookkeeping of manifests.
FRAME_LENGTH_S = 0.127


@dataclass(frozen=True)
class FrameRecord:
    """One labeled classification instance."""

    utterance_id: str
    center_s: float
    label: int
    speaker_id: str
    gender: str


@dataclass(frozen=True)
class BalancingPolicy:
    balance_phones: bool = True
    balance_gender: bool = False
    seed: int = 0
    target_count: int | None = None
    # When set, silence does not participate in the per-class minimum and is
    # only capped at the resulting target, never required.
    exclude_silence_from_minimum: bool = False


@dataclass
class CorpusManifest:
    """Frame/duration bookkeeping for one dataset.

    ``duration_hours`` counts what the model sees as input: overlapping
    127 ms windows, one per frame.
    """

    corpus_tag: str
    usage: str  # train | validation | test
    frame_count: int
    frame_length_s: float = FRAME_LENGTH_S
    seed: int | None = None
    per_class_counts: dict[str, int] = field(default_factory=dict)

    @property
    def duration_hours(self) -> float:
        return self.frame_count * self.frame_length_s / 3600.0

    def to_dict(self) -> dict:
        return {
            "corpus_tag": self.corpus_tag,
            "usage": self.usage,
            "frame_count": self.frame_count,
            "frame_length_s": self.frame_length_s,
            "duration_hours": self.duration_hours,
            "seed": self.seed,
            "per_class_counts": self.per_class_counts,
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False), encoding="utf-8"
        )


def _sort_key(frame: FrameRecord) -> tuple[str, float]:
    return (frame.utterance_id, frame.center_s)


def extract_frames(
    utterance: UtteranceRecord, inventory: PhoneInventory, hop_s: float = 0.010
) -> list[FrameRecord]:
    """One FrameRecord per grid point whose center falls inside a segment."""
    if hop_s <= 0:
        raise ValueError(f"hop_s must be positive, got {hop_s}")
    if not utterance.segments:
        return []

    hop_us = round(hop_s * 1e6)
    t0_us = round(utterance.segments[0].start_s * 1e6)
    frames: list[FrameRecord] = []
    for seg in utterance.segments:
        start_us = round(seg.start_s * 1e6)
        end_us = round(seg.end_s * 1e6)
        label = inventory.index_of(seg.phone)
        # smallest k with t0 + k*hop >= start, largest with t0 + k*hop < end
        k_min = max(0, -(-(start_us - t0_us) // hop_us))
        k_max = (end_us - t0_us - 1) // hop_us
        for k in range(k_min, k_max + 1):
            frames.append(
                FrameRecord(
                    utterance_id=utterance.utterance_id,
                    center_s=(t0_us + k * hop_us) / 1e6,
                    label=label,
                    speaker_id=utterance.speaker_id,
                    gender=utterance.gender,
                )
            )
    return frames


def _take(rng: np.random.Generator, indices: list[int], count: int) -> list[int]:
    if count >= len(indices):
        return list(indices)
    return list(rng.choice(np.asarray(indices), size=count, replace=False))


def balance(
    frames: list[FrameRecord], policy: BalancingPolicy, inventory: PhoneInventory
) -> list[FrameRecord]:
    """Seeded uniform downsampling to a common per-class count.

    With ``balance_phones``, every inventory class must be present and is cut
    to the minimum class count (or ``target_count`` if smaller). With
    ``balance_gender`` additionally set, F and M contribute equally within
    each class and unknown-gender frames are dropped.
    """
    if not policy.balance_phones:
        return sorted(frames, key=_sort_key)

    by_label: dict[int, list[int]] = defaultdict(list)
    for i, frame in enumerate(frames):
        by_label[frame.label].append(i)

    silence = inventory.silence_label
    required = [c for c in range(inventory.n_classes) if not (policy.exclude_silence_from_minimum and c == silence)]
    for c in required:
        if not by_label.get(c):
            raise BalancingError(f"class {inventory.symbol_of(c)!r} has no frames")

    rng = np.random.default_rng(policy.seed)
    selected: list[int] = []

    if policy.balance_gender:
        by_label_gender: dict[int, dict[str, list[int]]] = defaultdict(lambda: defaultdict(list))
        for i, frame in enumerate(frames):
            if frame.gender in ("F", "M"):
                by_label_gender[frame.label][frame.gender].append(i)
        for c in required:
            for g in ("F", "M"):
                if not by_label_gender.get(c, {}).get(g):
                    raise BalancingError(f"class {inventory.symbol_of(c)!r} has no {g} frames")
        half = min(min(len(by_label_gender[c][g]) for g in ("F", "M")) for c in required)
        if policy.target_count is not None:
            half = min(half, policy.target_count // 2)
        for c in sorted(by_label_gender):
            if policy.exclude_silence_from_minimum and c == silence:
                for g in ("F", "M"):
                    selected.extend(_take(rng, by_label_gender[c].get(g, []), half))
            else:
                for g in ("F", "M"):
                    selected.extend(_take(rng, by_label_gender[c][g], half))
    else:
        target = min(len(by_label[c]) for c in required)
        if policy.target_count is not None:
            target = min(target, policy.target_count)
        for c in sorted(by_label):
            selected.extend(_take(rng, by_label[c], target))

    return sorted((frames[i] for i in selected), key=_sort_key)


def split_train_validation(
    frames: list[FrameRecord], ratio: float, seed: int
) -> tuple[list[FrameRecord], list[FrameRecord]]:
    """Per-class split keeping both sides phone-balanced.

    Each class contributes floor(ratio * n_c) frames to train, clamped so
    that both sides keep at least one frame per class.
    """
    if not 0.0 < ratio < 1.0:
        raise SplitError(f"split ratio must lie in (0, 1), got {ratio}")

    by_label: dict[int, list[int]] = defaultdict(list)
    for i, frame in enumerate(frames):
        by_label[frame.label].append(i)

    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    val_idx: list[int] = []
    for c in sorted(by_label):
        indices = by_label[c]
        if len(indices) < 2:
            raise SplitError(f"class {c} has {len(indices)} frame(s); need at least 2 to split")
        n_train = min(max(int(ratio * len(indices)), 1), len(indices) - 1)
        perm = rng.permutation(len(indices))
        train_idx.extend(indices[p] for p in perm[:n_train])
        val_idx.extend(indices[p] for p in perm[n_train:])

    train = sorted((frames[i] for i in train_idx), key=_sort_key)
    validation = sorted((frames[i] for i in val_idx), key=_sort_key)
    return train, validation


FRAME_COLUMNS = ("utterance_id", "center_s", "label", "speaker_id", "gender")


def write_frames_csv(path: str | Path, frames: list[FrameRecord]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(FRAME_COLUMNS)
        for f in frames:
            writer.writerow([f.utterance_id, f"{f.center_s:.6f}", f.label, f.speaker_id, f.gender])


def read_frames_csv(path: str | Path) -> list[FrameRecord]:
    path = Path(path)
    frames: list[FrameRecord] = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        missing = [c for c in FRAME_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ParseError(f"frame dataset {path}: missing columns {missing}")
        for row in reader:
            frames.append(
                FrameRecord(
                    utterance_id=row["utterance_id"],
                    center_s=float(row["center_s"]),
                    label=int(row["label"]),
                    speaker_id=row["speaker_id"],
                    gender=row["gender"],
                )
            )
    return frames


def class_histogram(frames: list[FrameRecord], inventory: PhoneInventory) -> dict[str, int]:
    counts: dict[str, int] = {}
    for f in frames:
        symbol = inventory.symbol_of(f.label)
        counts[symbol] = counts.get(symbol, 0) + 1
    return counts
