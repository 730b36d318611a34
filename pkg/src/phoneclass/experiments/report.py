"""Final report assembly, schema validation, and cross-run comparison."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import jsonschema

from phoneclass.errors import ContractError, DataError, TabulationError
from phoneclass.experiments.config import ExperimentConfig

if TYPE_CHECKING:
    from phoneclass.experiments.runner import RunPaths

REPORT_SCHEMA_VERSION = 1
_SCHEMA_PATH = Path(__file__).resolve().parent / "report_schema.json"


def _load_artifact(path: Path, stage: str) -> dict:
    if not path.exists():
        raise DataError(f"missing artifact {path.name}; run the {stage} stage first")
    return json.loads(path.read_text(encoding="utf-8"))


def build_report(config: ExperimentConfig, paths: "RunPaths") -> dict:
    ingest = _load_artifact(paths.ingest_summary, "ingest")
    balance = _load_artifact(paths.balance_summary, "balance")
    training = _load_artifact(paths.train_summary, "train")
    evaluation = _load_artifact(paths.metrics, "evaluate")
    correlation = _load_artifact(paths.correlations, "correlate")
    confusion = {"full": _load_artifact(paths.confusion_json("full"), "evaluate")}
    for name in evaluation.get("confusion_groups", []):
        confusion[name] = _load_artifact(paths.confusion_json(name), "evaluate")
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "run_id": config.run_id,
        "config": config.to_dict(),
        "dataset": {
            "ingest": ingest,
            "balanced": balance["balanced"],
            "train": balance["train"],
            "validation": balance["validation"],
            "split_ratio": balance["split_ratio"],
        },
        "training": training,
        "evaluation": evaluation,
        "confusion": confusion,
        "correlation": correlation,
    }


def validate_report(report: dict) -> None:
    schema = json.loads(_SCHEMA_PATH.read_text(encoding="utf-8"))
    try:
        jsonschema.validate(report, schema)
    except jsonschema.ValidationError as exc:
        raise ContractError(f"report does not match schema: {exc.message}") from exc


def load_report(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataError(f"report not found: {path}")
    report = json.loads(path.read_text(encoding="utf-8"))
    validate_report(report)
    return report


def _encoder_line(config: dict) -> str:
    enc = config["encoder"]
    if enc["kind"] == "cnn":
        return "encoder: cnn over mel context windows"
    mode = "fine-tuned" if enc["trainable"] else "frozen"
    return f"encoder: ssl {enc['backend_id']} ({enc['hidden_layers']} layers, {mode})"


def render_text(report: dict) -> str:
    ev = report["evaluation"]
    ci = ev["balanced_accuracy"]
    best = report["training"]["best"]
    lines = [
        f"run: {report['run_id']}",
        _encoder_line(report["config"]),
        f"train frames: {report['dataset']['train']['frame_count']}"
        f"  validation frames: {report['dataset']['validation']['frame_count']}",
        f"best epoch: {best['best_epoch']} (validation error {best['best_validation_error_rate']:.4f})",
        f"evaluated frames: {ev['n_frames']}",
        f"micro accuracy: {ev['micro_accuracy']:.4f}",
        f"balanced accuracy: {ci['point']:.4f}"
        f"  [{ci['low']:.4f}, {ci['high']:.4f}]"
        f" ({100 * (1 - ci['alpha']):.0f}% CI, {ci['n_resamples']} resamples, unit={ci['unit']})",
    ]
    corr = report["correlation"]
    if corr.get("skipped"):
        lines.append("correlation: skipped (" + corr.get("reason", "no ratings") + ")")
    else:
        for dimension in ("severity", "intelligibility"):
            if dimension in corr:
                fit = corr[dimension]["fit"]
                lines.append(f"correlation with {dimension}: r={fit['r']:.3f} (n={fit['n']})")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TableRow:
    run_id: str
    point: float
    low: float
    high: float
    significantly_best: bool


def tabulate_reports(reports: list[dict]) -> list[TableRow]:
    """Rank runs by balanced accuracy, flagging a clear winner.

    The top run is flagged only when its confidence interval is disjoint from
    every other run's interval; overlapping intervals leave all flags False.
    """
    if len(reports) < 2:
        raise TabulationError("need at least two reports to tabulate")
    run_ids = [r["run_id"] for r in reports]
    if len(set(run_ids)) != len(run_ids):
        raise TabulationError("duplicate run_id among reports")
    rows = []
    for report in reports:
        try:
            ci = report["evaluation"]["balanced_accuracy"]
            rows.append((report["run_id"], ci["point"], ci["low"], ci["high"]))
        except KeyError as exc:
            raise TabulationError(f"report {report.get('run_id')!r} lacks {exc}") from exc
    rows.sort(key=lambda r: (-r[1], r[0]))
    top = rows[0]
    separated = all(top[2] > other[3] for other in rows[1:])
    return [
        TableRow(run_id=r[0], point=r[1], low=r[2], high=r[3], significantly_best=(i == 0 and separated))
        for i, r in enumerate(rows)
    ]


def render_table(rows: list[TableRow]) -> str:
    width = max(len(r.run_id) for r in rows)
    lines = [f"{'run':<{width}}  balanced_acc  ci_low  ci_high  best"]
    for r in rows:
        flag = "*" if r.significantly_best else ""
        lines.append(f"{r.run_id:<{width}}  {r.point:12.4f}  {r.low:.4f}  {r.high:.4f}  {flag}")
    return "\n".join(lines) + "\n"


def write_table_csv(path: str | Path, rows: list[TableRow]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["run_id", "balanced_accuracy", "ci_low", "ci_high", "significantly_best"])
        for r in rows:
            writer.writerow([r.run_id, f"{r.point:.6f}", f"{r.low:.6f}", f"{r.high:.6f}", str(r.significantly_best).lower()])
