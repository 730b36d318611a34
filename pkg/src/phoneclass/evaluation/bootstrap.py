"""Percentile bootstrap confidence intervals over prediction sets.

The default resampling unit is the frame, stratified by true phone so every
resample keeps every phone represented and the balanced accuracy stays
defined. Resampling whole speakers is available for variance estimates that
respect speaker clustering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from phoneclass.errors import BootstrapError, MetricError
from phoneclass.evaluation.metrics import balanced_accuracy
from phoneclass.evaluation.predictions import PredictionSet

RESAMPLE_UNITS = ("frame", "speaker")
MAX_RETRIES_PER_RESAMPLE = 5


@dataclass(frozen=True)
class BootstrapCI:
    point: float
    low: float
    high: float
    half_width: float
    n_resamples: int
    alpha: float
    seed: int
    unit: str

    def to_dict(self) -> dict:
        return {
            "point": self.point,
            "low": self.low,
            "high": self.high,
            "half_width": self.half_width,
            "n_resamples": self.n_resamples,
            "alpha": self.alpha,
            "seed": self.seed,
            "unit": self.unit,
        }


def _default_statistic(preds: PredictionSet) -> float:
    return balanced_accuracy(preds).value


def _stratified_pools(preds: PredictionSet) -> list[np.ndarray]:
    return [np.flatnonzero(preds.true_labels == label) for label in np.unique(preds.true_labels)]


def _speaker_pools(preds: PredictionSet) -> list[np.ndarray]:
    speakers = np.asarray(preds.speaker_ids)
    uniq = sorted(set(speakers.tolist()))
    if len(uniq) < 2:
        raise BootstrapError("speaker resampling needs at least two distinct speakers")
    return [np.flatnonzero(speakers == s) for s in uniq]


def _resample_indices(rng: np.random.Generator, pools: list[np.ndarray], unit: str) -> np.ndarray:
    if unit == "frame":
        parts = [pool[rng.integers(0, len(pool), size=len(pool))] for pool in pools]
    else:
        chosen = rng.integers(0, len(pools), size=len(pools))
        parts = [pools[k] for k in chosen]
    return np.concatenate(parts)


def bootstrap_ci(
    preds: PredictionSet,
    statistic: Callable[[PredictionSet], float] | None = None,
    n_resamples: int = 1000,
    alpha: float = 0.05,
    seed: int = 0,
    unit: str = "frame",
) -> BootstrapCI:
    """Percentile CI for a statistic of the prediction set.

    Each resample draws from a generator seeded with (seed, resample index),
    so any single resample can be reproduced without replaying the ones
    before it. A resample on which the statistic is undefined (MetricError)
    is redrawn a bounded number of times before giving up.
    """
    if unit not in RESAMPLE_UNITS:
        raise BootstrapError(f"unknown resampling unit {unit!r}; expected one of {RESAMPLE_UNITS}")
    if n_resamples < 1:
        raise BootstrapError("n_resamples must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise BootstrapError("alpha must lie in (0, 1)")
    stat = statistic if statistic is not None else _default_statistic
    try:
        point = float(stat(preds))
    except MetricError as exc:
        raise BootstrapError(f"statistic undefined on the full prediction set: {exc}") from exc

    pools = _stratified_pools(preds) if unit == "frame" else _speaker_pools(preds)
    values = np.empty(n_resamples, dtype=np.float64)
    for i in range(n_resamples):
        value = None
        for attempt in range(MAX_RETRIES_PER_RESAMPLE):
            rng = np.random.default_rng([seed, i, attempt])
            idx = _resample_indices(rng, pools, unit)
            try:
                value = float(stat(preds.subset(idx)))
                break
            except MetricError:
                continue
        if value is None:
            raise BootstrapError(
                f"statistic undefined on resample {i} after {MAX_RETRIES_PER_RESAMPLE} redraws"
            )
        values[i] = value

    low = float(np.quantile(values, alpha / 2.0))
    high = float(np.quantile(values, 1.0 - alpha / 2.0))
    return BootstrapCI(
        point=point,
        low=low,
        high=high,
        half_width=(high - low) / 2.0,
        n_resamples=n_resamples,
        alpha=alpha,
        seed=seed,
        unit=unit,
    )


def intervals_overlap(a: BootstrapCI, b: BootstrapCI) -> bool:
    return a.low <= b.high and b.low <= a.high
