"""Pearson correlation between per-speaker accuracy and perceptual scores."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from phoneclass.errors import CorrelationError, ExportError, FitError
from phoneclass.evaluation.metrics import SILENCE_LABEL, balanced_accuracy, micro_accuracy
from phoneclass.evaluation.predictions import PredictionSet
from phoneclass.perceptual.ratings import SpeakerScore

DIMENSIONS = ("severity", "intelligibility")
MIN_POINTS = 3


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise CorrelationError("x and y differ in length")
    if len(x) < MIN_POINTS:
        raise CorrelationError(f"need at least {MIN_POINTS} points, got {len(x)}")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.sum(xc * xc) * np.sum(yc * yc))
    if denom == 0.0:
        raise CorrelationError("zero variance in x or y; correlation undefined")
    return float(np.sum(xc * yc) / denom)


def linear_fit(x, y) -> tuple[float, float]:
    """Least-squares slope and intercept of y on x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2:
        raise FitError("need at least 2 points for a line")
    xc = x - x.mean()
    sxx = np.sum(xc * xc)
    if sxx == 0.0:
        raise FitError("zero variance in x; fit undefined")
    slope = float(np.sum(xc * (y - y.mean())) / sxx)
    return slope, float(y.mean() - slope * x.mean())


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    slope: float
    intercept: float

    def to_dict(self) -> dict:
        return {"r": self.r, "n": self.n, "slope": self.slope, "intercept": self.intercept}


def _speakers_of(preds: PredictionSet) -> np.ndarray:
    speakers = np.asarray(preds.speaker_ids)
    # Missing ids are stored as empty strings; a per-speaker statistic over
    # one anonymous pool would be meaningless, so refuse early.
    if not any(speakers):
        raise CorrelationError("predictions carry no speaker ids; cannot group by speaker")
    return speakers


def speaker_micro_accuracy(preds: PredictionSet) -> dict[str, float]:
    out = {}
    speakers = _speakers_of(preds)
    for speaker in sorted(set(speakers.tolist())):
        out[speaker] = micro_accuracy(preds.subset(np.flatnonzero(speakers == speaker)))
    return out


def speaker_balanced_accuracy(preds: PredictionSet, silence_label: int = SILENCE_LABEL) -> dict[str, float]:
    """Balanced accuracy per speaker over the phones that speaker produced.

    Averaging only over produced phones keeps speakers with small phone
    inventories comparable to the rest instead of penalizing absent phones.
    """
    out = {}
    speakers = _speakers_of(preds)
    for speaker in sorted(set(speakers.tolist())):
        sub = preds.subset(np.flatnonzero(speakers == speaker))
        out[speaker] = balanced_accuracy(sub, silence_label=silence_label).value
    return out


@dataclass(frozen=True)
class CorrelationOutcome:
    dimension: str
    result: CorrelationResult
    speaker_ids: tuple[str, ...]
    accuracies: tuple[float, ...]
    scores: tuple[float, ...]
    excluded: tuple[tuple[str, str], ...]

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "fit": self.result.to_dict(),
            "speakers": [
                {"speaker_id": s, "accuracy": a, "score": v}
                for s, a, v in zip(self.speaker_ids, self.accuracies, self.scores)
            ],
            "excluded": [{"speaker_id": s, "reason": r} for s, r in self.excluded],
        }


def correlate_with_ratings(
    accuracies: dict[str, float],
    scores: dict[str, SpeakerScore],
    dimension: str,
) -> CorrelationOutcome:
    """Pearson r between per-speaker accuracy and one rating dimension.

    Speakers present on only one side (never rated, or rated but absent from
    the test set) are excluded and listed with the reason, so the report can
    say exactly who the correlation covers.
    """
    if dimension not in DIMENSIONS:
        raise CorrelationError(f"unknown rating dimension {dimension!r}; expected one of {DIMENSIONS}")
    excluded = []
    kept = []
    for speaker in sorted(accuracies):
        score = scores.get(speaker)
        if score is None:
            excluded.append((speaker, "not_rated"))
        elif getattr(score, dimension) is None:
            excluded.append((speaker, f"no_{dimension}_rating"))
        else:
            kept.append((speaker, accuracies[speaker], getattr(score, dimension)))
    for speaker in sorted(scores):
        if speaker not in accuracies:
            excluded.append((speaker, "no_predictions"))
    if not kept:
        raise CorrelationError("no speaker has both an accuracy and a rating")
    ids = tuple(s for s, _, _ in kept)
    acc = tuple(a for _, a, _ in kept)
    val = tuple(v for _, _, v in kept)
    r = pearson(acc, val)
    slope, intercept = linear_fit(acc, val)
    return CorrelationOutcome(
        dimension=dimension,
        result=CorrelationResult(r=r, n=len(kept), slope=slope, intercept=intercept),
        speaker_ids=ids,
        accuracies=acc,
        scores=val,
        excluded=tuple(excluded),
    )


def write_scatter_csv(path: str | Path, outcome: CorrelationOutcome) -> None:
    """Per-speaker points as CSV plus a JSON sidecar with the fit and exclusions."""
    if not outcome.speaker_ids:
        raise ExportError("nothing to export: no speakers in the correlation")
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["speaker_id", "accuracy", outcome.dimension])
        for s, a, v in zip(outcome.speaker_ids, outcome.accuracies, outcome.scores):
            writer.writerow([s, f"{a:.6f}", f"{v:.6f}"])
    sidecar = path.with_suffix(path.suffix + ".fit.json")
    sidecar.write_text(json.dumps(outcome.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
