"""Row-normalized confusion matrices and phonetic-class views of them."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from phoneclass.errors import GroupError, ParseError
from phoneclass.evaluation.predictions import PredictionSet

_DEFAULT_GROUPS = Path(__file__).resolve().parent.parent / "corpus" / "data" / "phone_groups.json"


@dataclass(frozen=True)
class ConfusionMatrix:
    """Percentages per row: values[i, j] = % of true row_labels[i] predicted as col_labels[j].

    Rows with no frames are all zero and report row_counts == 0 rather than
    raising, so sparse test sets still render.
    """

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray
    row_counts: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        counts = np.asarray(self.row_counts, dtype=np.int64)
        if values.shape != (len(self.row_labels), len(self.col_labels)):
            raise GroupError("confusion values shape does not match labels")
        if counts.shape != (len(self.row_labels),):
            raise GroupError("row_counts shape does not match row labels")
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_counts", counts)

    def cell(self, true_symbol: str, predicted_symbol: str) -> float:
        try:
            i = self.row_labels.index(true_symbol)
            j = self.col_labels.index(predicted_symbol)
        except ValueError as exc:
            raise GroupError(f"symbol not in confusion matrix: {exc}") from exc
        return float(self.values[i, j])

    def to_dict(self) -> dict:
        return {
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "values_percent": [[round(float(v), 6) for v in row] for row in self.values],
            "row_counts": [int(c) for c in self.row_counts],
        }


def confusion_matrix(preds: PredictionSet, class_symbols) -> ConfusionMatrix:
    symbols = tuple(class_symbols)
    n = len(symbols)
    counts = np.zeros((n, n), dtype=np.int64)
    np.add.at(counts, (preds.true_labels, preds.predicted_labels), 1)
    row_totals = counts.sum(axis=1)
    values = np.zeros((n, n), dtype=np.float64)
    nonzero = row_totals > 0
    values[nonzero] = 100.0 * counts[nonzero] / row_totals[nonzero, None]
    return ConfusionMatrix(row_labels=symbols, col_labels=symbols, values=values, row_counts=row_totals)


def submatrix(matrix: ConfusionMatrix, row_symbols, col_symbols=None) -> ConfusionMatrix:
    """Restrict rows to a phone class; columns stay full unless narrowed too.

    Keeping all columns preserves where the restricted phones leak to, which
    is the point of the class view. Percentages are carried over unchanged,
    so rows of a column-restricted view no longer sum to 100.
    """
    rows = list(row_symbols)
    cols = list(col_symbols) if col_symbols is not None else list(matrix.col_labels)
    missing = [s for s in rows if s not in matrix.row_labels] + [s for s in cols if s not in matrix.col_labels]
    if missing:
        raise GroupError(f"symbols not in confusion matrix: {missing}")
    ri = [matrix.row_labels.index(s) for s in rows]
    ci = [matrix.col_labels.index(s) for s in cols]
    return ConfusionMatrix(
        row_labels=tuple(rows),
        col_labels=tuple(cols),
        values=matrix.values[np.ix_(ri, ci)],
        row_counts=matrix.row_counts[ri],
    )


@dataclass(frozen=True)
class PhoneClassGroup:
    name: str
    symbols: tuple[str, ...]

    def __post_init__(self):
        if not self.symbols:
            raise GroupError(f"phone class {self.name!r} is empty")
        if len(set(self.symbols)) != len(self.symbols):
            raise GroupError(f"phone class {self.name!r} lists a symbol twice")
        object.__setattr__(self, "symbols", tuple(self.symbols))


def load_phone_groups(path: str | Path | None = None) -> dict[str, PhoneClassGroup]:
    """Named phone classes from JSON: either a flat name->symbols map or one
    nested under a "groups" key (which allows a descriptive "comment")."""
    path = Path(path) if path is not None else _DEFAULT_GROUPS
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"phone groups {path}: invalid JSON at line {exc.lineno}") from exc
    mapping = raw.get("groups", raw) if isinstance(raw, dict) else None
    if not isinstance(mapping, dict) or not mapping:
        raise ParseError(f"phone groups {path}: expected a mapping of group name to symbols")
    groups = {}
    for name, symbols in mapping.items():
        groups[name] = PhoneClassGroup(name=name, symbols=tuple(symbols))
    return groups


def group_submatrix(matrix: ConfusionMatrix, group: PhoneClassGroup) -> ConfusionMatrix:
    return submatrix(matrix, group.symbols)


@dataclass(frozen=True)
class ConfusionDelta:
    true_symbol: str
    predicted_symbol: str
    value_a: float
    value_b: float
    delta: float


def compare_matrices(a: ConfusionMatrix, b: ConfusionMatrix) -> list[ConfusionDelta]:
    """Cell-wise change from a to b, off-diagonal cells ranked by |delta|.

    Ties broken by (true, predicted) symbol order so the ranking is stable.
    """
    if a.row_labels != b.row_labels or a.col_labels != b.col_labels:
        raise GroupError("confusion matrices have different labels; cannot compare")
    deltas = []
    for i, t in enumerate(a.row_labels):
        for j, p in enumerate(a.col_labels):
            if t == p:
                continue
            deltas.append(
                ConfusionDelta(
                    true_symbol=t,
                    predicted_symbol=p,
                    value_a=float(a.values[i, j]),
                    value_b=float(b.values[i, j]),
                    delta=float(b.values[i, j] - a.values[i, j]),
                )
            )
    deltas.sort(key=lambda d: (-abs(d.delta), d.true_symbol, d.predicted_symbol))
    return deltas


def write_confusion_csv(path: str | Path, matrix: ConfusionMatrix) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["true\\predicted", *matrix.col_labels, "n_frames"])
        for i, label in enumerate(matrix.row_labels):
            writer.writerow([label, *[f"{v:.4f}" for v in matrix.values[i]], int(matrix.row_counts[i])])


def write_heatmap_json(path: str | Path, matrix: ConfusionMatrix) -> None:
    Path(path).write_text(json.dumps(matrix.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
