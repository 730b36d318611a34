"""Accuracy metrics.

Per-phone accuracies weight each phone equally regardless of how many frames
it has; the balanced accuracy is their unweighted mean. Silence is excluded by
default so the score reflects the phones alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from phoneclass.errors import MetricError
from phoneclass.evaluation.predictions import PredictionSet

SILENCE_LABEL = 31


def micro_accuracy(preds: PredictionSet) -> float:
    """Fraction of frames predicted correctly, all frames pooled."""
    return float(np.mean(preds.true_labels == preds.predicted_labels))


def per_phone_accuracy(preds: PredictionSet) -> dict[int, float]:
    """Accuracy for each label that occurs at least once among the true labels."""
    out: dict[int, float] = {}
    correct = preds.true_labels == preds.predicted_labels
    for label in np.unique(preds.true_labels):
        mask = preds.true_labels == label
        out[int(label)] = float(np.mean(correct[mask]))
    return out


@dataclass(frozen=True)
class BalancedAccuracyResult:
    value: float
    per_phone: dict[int, float] = field(repr=False)
    n_frames: int

    def __float__(self) -> float:
        return self.value


def balanced_accuracy(
    preds: PredictionSet,
    phones_included: list[int] | None = None,
    include_silence: bool = False,
    silence_label: int = SILENCE_LABEL,
) -> BalancedAccuracyResult:
    """Unweighted mean of per-phone accuracies.

    With phones_included=None, averages over the labels present in the set
    (minus silence unless include_silence). With an explicit list, every
    listed label must be present; a missing one raises MetricError naming it.
    """
    per = per_phone_accuracy(preds)
    if phones_included is None:
        labels = sorted(per)
        if not include_silence:
            labels = [l for l in labels if l != silence_label]
    else:
        labels = list(phones_included)
        missing = [l for l in labels if l not in per]
        if missing:
            raise MetricError(f"no frames for label(s) {missing}; balanced accuracy undefined")
    if not labels:
        raise MetricError("no labels to average over")
    kept = {l: per[l] for l in labels}
    n_frames = int(np.sum(np.isin(preds.true_labels, labels)))
    return BalancedAccuracyResult(value=float(np.mean([kept[l] for l in labels])), per_phone=kept, n_frames=n_frames)
