"""Aligned (true, predicted, speaker, utterance) records for a test run."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from phoneclass.errors import MetricError, ParseError

N_CLASSES = 32


@dataclass(frozen=True)
class PredictionSet:
    true_labels: np.ndarray
    predicted_labels: np.ndarray
    speaker_ids: np.ndarray = field(default=None)
    utterance_ids: np.ndarray = field(default=None)

    def __post_init__(self):
        true = np.asarray(self.true_labels, dtype=np.int64)
        pred = np.asarray(self.predicted_labels, dtype=np.int64)
        if len(true) == 0:
            raise MetricError("prediction set is empty")
        if len(true) != len(pred):
            raise MetricError("true and predicted label arrays differ in length")
        for name, arr in (("true", true), ("predicted", pred)):
            if arr.min() < 0 or arr.max() >= N_CLASSES:
                raise MetricError(f"{name} labels outside [0, {N_CLASSES - 1}]")
        speakers = self.speaker_ids if self.speaker_ids is not None else np.full(len(true), "", dtype=object)
        utts = self.utterance_ids if self.utterance_ids is not None else np.full(len(true), "", dtype=object)
        speakers = np.asarray(speakers, dtype=object)
        utts = np.asarray(utts, dtype=object)
        if len(speakers) != len(true) or len(utts) != len(true):
            raise MetricError("speaker/utterance id arrays differ in length from labels")
        object.__setattr__(self, "true_labels", true)
        object.__setattr__(self, "predicted_labels", pred)
        object.__setattr__(self, "speaker_ids", speakers)
        object.__setattr__(self, "utterance_ids", utts)

    def __len__(self) -> int:
        return len(self.true_labels)

    def subset(self, indices) -> "PredictionSet":
        idx = np.asarray(indices)
        return PredictionSet(
            true_labels=self.true_labels[idx],
            predicted_labels=self.predicted_labels[idx],
            speaker_ids=self.speaker_ids[idx],
            utterance_ids=self.utterance_ids[idx],
        )

    @classmethod
    def from_records(cls, records) -> "PredictionSet":
        """Build from an iterable of (true, predicted, speaker_id, utterance_id)."""
        rows = list(records)
        return cls(
            true_labels=np.array([r[0] for r in rows], dtype=np.int64),
            predicted_labels=np.array([r[1] for r in rows], dtype=np.int64),
            speaker_ids=np.array([r[2] if len(r) > 2 else "" for r in rows], dtype=object),
            utterance_ids=np.array([r[3] if len(r) > 3 else "" for r in rows], dtype=object),
        )


PREDICTION_COLUMNS = ("true_label", "predicted_label", "speaker_id", "utterance_id")


def write_predictions_csv(path: str | Path, preds: PredictionSet) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(PREDICTION_COLUMNS)
        for t, p, s, u in zip(preds.true_labels, preds.predicted_labels, preds.speaker_ids, preds.utterance_ids):
            writer.writerow([t, p, s, u])


def read_predictions_csv(path: str | Path) -> PredictionSet:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        missing = [c for c in PREDICTION_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ParseError(f"prediction file {path}: missing columns {missing}")
        rows = [(int(r["true_label"]), int(r["predicted_label"]), r["speaker_id"], r["utterance_id"]) for r in reader]
    return PredictionSet.from_records(rows)
