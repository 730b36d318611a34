"""Expert perceptual ratings of speakers, averaged per speaker.

Each rater scores severity and intelligibility on a 0-10 scale. Either cell
may be missing for a given rater; averages are over whoever did score that
dimension. Speakers rated by fewer raters than the panel size are flagged,
not dropped.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from phoneclass.errors import ParseError, RatingError

RATING_MIN = 0.0
RATING_MAX = 10.0
FULL_PANEL = 6

RATING_COLUMNS = ("speaker_id", "rater_id", "severity", "intelligibility")


@dataclass(frozen=True)
class ExpertRating:
    speaker_id: str
    rater_id: str
    severity: float | None
    intelligibility: float | None

    def __post_init__(self):
        for name, value in (("severity", self.severity), ("intelligibility", self.intelligibility)):
            if value is None:
                continue
            if not RATING_MIN <= value <= RATING_MAX:
                raise RatingError(
                    f"{name} rating {value} for speaker {self.speaker_id!r} outside"
                    f" [{RATING_MIN:g}, {RATING_MAX:g}]"
                )
        if not self.speaker_id:
            raise RatingError("rating with empty speaker_id")


@dataclass(frozen=True)
class SpeakerScore:
    speaker_id: str
    severity: float | None
    intelligibility: float | None
    n_raters: int
    below_full_panel: bool


def average_ratings(ratings, full_panel: int = FULL_PANEL) -> dict[str, SpeakerScore]:
    by_speaker: dict[str, list[ExpertRating]] = {}
    for rating in ratings:
        by_speaker.setdefault(rating.speaker_id, []).append(rating)
    scores = {}
    for speaker_id in sorted(by_speaker):
        rows = by_speaker[speaker_id]
        raters = {r.rater_id for r in rows}
        if len(raters) != len(rows):
            raise RatingError(f"speaker {speaker_id!r} rated twice by the same rater")
        severities = [r.severity for r in rows if r.severity is not None]
        intells = [r.intelligibility for r in rows if r.intelligibility is not None]
        scores[speaker_id] = SpeakerScore(
            speaker_id=speaker_id,
            severity=float(np.mean(severities)) if severities else None,
            intelligibility=float(np.mean(intells)) if intells else None,
            n_raters=len(rows),
            below_full_panel=len(rows) < full_panel,
        )
    return scores


def read_ratings_csv(path: str | Path) -> list[ExpertRating]:
    path = Path(path)
    ratings = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        missing = [c for c in RATING_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ParseError(f"ratings file {path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            def cell(column: str) -> float | None:
                text = (row[column] or "").strip()
                if not text:
                    return None
                try:
                    return float(text)
                except ValueError as exc:
                    raise ParseError(f"ratings file {path} line {lineno}: bad {column} {text!r}") from exc

            ratings.append(
                ExpertRating(
                    speaker_id=row["speaker_id"],
                    rater_id=row["rater_id"],
                    severity=cell("severity"),
                    intelligibility=cell("intelligibility"),
                )
            )
    return ratings


def write_ratings_csv(path: str | Path, ratings) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(RATING_COLUMNS)
        for r in ratings:
            writer.writerow(
                [
                    r.speaker_id,
                    r.rater_id,
                    "" if r.severity is None else f"{r.severity:g}",
                    "" if r.intelligibility is None else f"{r.intelligibility:g}",
                ]
            )
