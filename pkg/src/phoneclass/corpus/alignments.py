"""Alignment manifest and segment parsing.

Input formats:
  * manifest: CSV with header ``utterance_id,audio_path,speaker_id,gender,
    corpus_tag,alignment_path`` (paths resolved relative to the manifest).
  * alignment file: headerless UTF-8 CSV rows ``start_s,end_s,phone``.

Raw phone symbols are resolved through the inventory's archi map at parse
time, so stored segments always carry inventory symbols.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from phoneclass.corpus.inventory import PhoneInventory
from phoneclass.errors import AlignmentError, MappingError, ParseError

MANIFEST_COLUMNS = ("utterance_id", "audio_path", "speaker_id", "gender", "corpus_tag", "alignment_path")

GENDERS = ("F", "M", "unknown")


@dataclass(frozen=True)
class AlignmentSegment:
    """One phone segment; ``phone`` is the inventory symbol after merging."""

    start_s: float
    end_s: float
    phone: str


@dataclass(frozen=True)
class UtteranceRecord:
    utterance_id: str
    audio_path: Path
    speaker_id: str
    gender: str
    corpus_tag: str
    segments: tuple[AlignmentSegment, ...]


def _normalize_gender(value: str, where: str) -> str:
    v = value.strip()
    if v.upper() in ("F", "M"):
        return v.upper()
    if v == "" or v.lower() in ("u", "unknown"):
        return "unknown"
    raise ParseError(f"{where}: unrecognized gender {value!r} (expected F, M or unknown)")


def read_alignment_file(path: Path, inventory: PhoneInventory, utterance_id: str) -> tuple[AlignmentSegment, ...]:
    """Parse one alignment CSV and validate segment geometry.

    Segments must be time-ordered and non-overlapping; raw phones must be
    resolvable through the inventory.
    """
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read alignment file {path}: {exc}") from exc

    segments: list[AlignmentSegment] = []
    for lineno, row in enumerate(csv.reader(lines), start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise ParseError(f"{path} line {lineno}: expected start_s,end_s,phone")
        if lineno == 1 and row[0].strip().lower() in ("start_s", "start"):
            continue  # tolerate an optional header row
        try:
            start_s, end_s = float(row[0]), float(row[1])
        except ValueError as exc:
            raise ParseError(f"{path} line {lineno}: non-numeric time field") from exc
        if not 0.0 <= start_s < end_s:
            raise AlignmentError(
                f"utterance {utterance_id}: segment [{start_s}, {end_s}] violates 0 <= start < end"
            )
        try:
            phone = inventory.lookup(row[2].strip())
        except MappingError as exc:
            raise MappingError(f"{path} line {lineno}: {exc}") from None
        segments.append(AlignmentSegment(start_s=start_s, end_s=end_s, phone=phone))

    for prev, cur in zip(segments, segments[1:]):
        if cur.start_s < prev.end_s:
            raise AlignmentError(
                f"utterance {utterance_id}: segments overlap at {cur.start_s:.3f}s"
            )
    return tuple(segments)


def parse_alignments(manifest_path: str | Path, inventory: PhoneInventory) -> list[UtteranceRecord]:
    """Parse a corpus manifest into utterance records with validated segments."""
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    try:
        handle = manifest_path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read manifest {manifest_path}: {exc}") from exc

    records: list[UtteranceRecord] = []
    with handle:
        reader = csv.DictReader(handle)
        missing = [c for c in MANIFEST_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ParseError(f"manifest {manifest_path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            utterance_id = row["utterance_id"].strip()
            speaker_id = row["speaker_id"].strip()
            if not utterance_id or not speaker_id:
                raise ParseError(f"manifest {manifest_path} line {lineno}: empty utterance_id or speaker_id")
            gender = _normalize_gender(row["gender"], f"manifest {manifest_path} line {lineno}")
            alignment_path = base / row["alignment_path"]
            segments = read_alignment_file(alignment_path, inventory, utterance_id)
            records.append(
                UtteranceRecord(
                    utterance_id=utterance_id,
                    audio_path=(base / row["audio_path"]).resolve(),
                    speaker_id=speaker_id,
                    gender=gender,
                    corpus_tag=row["corpus_tag"].strip(),
                    segments=segments,
                )
            )
    return records
