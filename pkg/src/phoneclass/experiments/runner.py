"""Stage-by-stage experiment runner with resumable run directories.

A run directory belongs to exactly one config (hashed into state.json).
Completed stages are recorded there, so a re-run picks up where the last one
stopped. Changing the config behind an existing run directory is refused
unless force is set, which wipes the directory and starts over.
"""

from __future__ import annotations

import json
import os
import shutil
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from phoneclass.corpus.alignments import UtteranceRecord, parse_alignments
from phoneclass.corpus.frames import (
    CorpusManifest,
    balance,
    class_histogram,
    extract_frames,
    read_frames_csv,
    split_train_validation,
    write_frames_csv,
)
from phoneclass.corpus.inventory import PhoneInventory, load_inventory
from phoneclass.errors import ConfigError, DataError, PipelineError
from phoneclass.evaluation.bootstrap import bootstrap_ci
from phoneclass.evaluation.confusion import (
    confusion_matrix,
    group_submatrix,
    load_phone_groups,
    write_confusion_csv,
    write_heatmap_json,
)
from phoneclass.evaluation.metrics import balanced_accuracy, micro_accuracy, per_phone_accuracy
from phoneclass.evaluation.predictions import read_predictions_csv, write_predictions_csv
from phoneclass.experiments.config import ExperimentConfig
from phoneclass.experiments.report import build_report, render_text, validate_report
from phoneclass.features.audio import waveform_window_length
from phoneclass.features.pipeline import extract_feature_windows, extract_waveform_windows
from phoneclass.models.checkpoint import build_model, load_checkpoint, save_checkpoint
from phoneclass.models.cnn import CnnEncoderConfig
from phoneclass.perceptual.correlation import (
    DIMENSIONS,
    correlate_with_ratings,
    speaker_balanced_accuracy,
    write_scatter_csv,
)
from phoneclass.perceptual.ratings import average_ratings, read_ratings_csv
from phoneclass.training.loop import ArrayDataset, predict, train

STAGES = ("ingest", "balance", "train", "evaluate", "correlate", "report")
STATE_VERSION = 1


@dataclass(frozen=True)
class RunPaths:
    run_dir: Path

    @property
    def state(self) -> Path:
        return self.run_dir / "state.json"

    @property
    def lock(self) -> Path:
        return self.run_dir / "lock"

    @property
    def config_snapshot(self) -> Path:
        return self.run_dir / "config.json"

    @property
    def frames_all(self) -> Path:
        return self.run_dir / "frames_all.csv"

    @property
    def ingest_summary(self) -> Path:
        return self.run_dir / "ingest_summary.json"

    @property
    def train_frames(self) -> Path:
        return self.run_dir / "train_frames.csv"

    @property
    def validation_frames(self) -> Path:
        return self.run_dir / "validation_frames.csv"

    @property
    def test_frames(self) -> Path:
        return self.run_dir / "test_frames.csv"

    @property
    def balance_summary(self) -> Path:
        return self.run_dir / "balance_summary.json"

    @property
    def cache_dir(self) -> Path:
        return self.run_dir / "feature_cache"

    @property
    def checkpoints(self) -> Path:
        return self.run_dir / "checkpoints"

    @property
    def best_checkpoint(self) -> Path:
        return self.run_dir / "best.pt"

    @property
    def train_summary(self) -> Path:
        return self.run_dir / "train_summary.json"

    @property
    def predictions(self) -> Path:
        return self.run_dir / "predictions.csv"

    @property
    def metrics(self) -> Path:
        return self.run_dir / "metrics.json"

    @property
    def correlations(self) -> Path:
        return self.run_dir / "correlations.json"

    @property
    def report_json(self) -> Path:
        return self.run_dir / "report.json"

    @property
    def report_text(self) -> Path:
        return self.run_dir / "report.txt"

    def confusion_csv(self, name: str) -> Path:
        return self.run_dir / f"confusion_{name}.csv"

    def confusion_json(self, name: str) -> Path:
        return self.run_dir / f"confusion_{name}.json"

    def scatter_csv(self, dimension: str) -> Path:
        return self.run_dir / f"scatter_{dimension}.csv"


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _corpus_tag(utterances: list[UtteranceRecord]) -> str:
    return "+".join(sorted({u.corpus_tag for u in utterances})) or "empty"


def _summary(tag: str, usage: str, frames, seed, inventory: PhoneInventory) -> dict:
    manifest = CorpusManifest(
        corpus_tag=tag,
        usage=usage,
        frame_count=len(frames),
        seed=seed,
        per_class_counts=class_histogram(frames, inventory),
    )
    return manifest.to_dict()


def stage_ingest(config: ExperimentConfig, paths: RunPaths) -> None:
    inventory = load_inventory()
    utterances = parse_alignments(config.manifest_path, inventory)
    frames = [f for utt in utterances for f in extract_frames(utt, inventory)]
    if not frames:
        raise DataError(f"manifest {config.manifest_path} yielded no frames")
    write_frames_csv(paths.frames_all, frames)
    _write_json(paths.ingest_summary, _summary(_corpus_tag(utterances), "ingest", frames, None, inventory))


def stage_balance(config: ExperimentConfig, paths: RunPaths) -> None:
    inventory = load_inventory()
    frames = read_frames_csv(paths.frames_all)
    balanced = balance(frames, config.balancing, inventory)
    train_frames, val_frames = split_train_validation(balanced, config.split_ratio, config.seed)
    write_frames_csv(paths.train_frames, train_frames)
    write_frames_csv(paths.validation_frames, val_frames)
    _write_json(
        paths.balance_summary,
        {
            "balanced": _summary("balanced", "train+validation", balanced, config.balancing.seed, inventory),
            "train": _summary("balanced", "train", train_frames, config.seed, inventory),
            "validation": _summary("balanced", "validation", val_frames, config.seed, inventory),
            "split_ratio": config.split_ratio,
        },
    )


def _windows_for(config: ExperimentConfig, frames, utterances, paths: RunPaths) -> np.ndarray:
    if isinstance(config.encoder, CnnEncoderConfig):
        return extract_feature_windows(frames, utterances, config.mel, cache_dir=paths.cache_dir)
    return extract_waveform_windows(frames, utterances, config.mel.sample_rate_hz, cache_dir=paths.cache_dir)


def _dataset(frames, windows) -> ArrayDataset:
    return ArrayDataset(
        features=windows.astype(np.float32),
        labels=np.array([f.label for f in frames], dtype=np.int64),
        speaker_ids=np.array([f.speaker_id for f in frames], dtype=object),
        utterance_ids=np.array([f.utterance_id for f in frames], dtype=object),
    )


def stage_train(config: ExperimentConfig, paths: RunPaths) -> None:
    inventory = load_inventory()
    utterances = parse_alignments(config.manifest_path, inventory)
    train_frames = read_frames_csv(paths.train_frames)
    val_frames = read_frames_csv(paths.validation_frames)
    train_set = _dataset(train_frames, _windows_for(config, train_frames, utterances, paths))
    val_set = _dataset(val_frames, _windows_for(config, val_frames, utterances, paths))
    window_samples = waveform_window_length(config.mel.sample_rate_hz)
    model = build_model(config.encoder, window_samples=window_samples, seed=config.seed)
    meta, history = train(model, train_set, val_set, config.training, paths.checkpoints)
    save_checkpoint(
        paths.best_checkpoint,
        model,
        config.encoder,
        inventory.sha256(),
        extra=meta.to_dict(),
    )
    _write_json(
        paths.train_summary,
        {"best": meta.to_dict(), "history": [m.to_dict() for m in history]},
    )


def _evaluation_frames(config: ExperimentConfig, paths: RunPaths, inventory: PhoneInventory):
    """Held-out material: a separate test manifest when given, else the validation split."""
    if config.test_manifest_path:
        utterances = parse_alignments(config.test_manifest_path, inventory)
        frames = [f for utt in utterances for f in extract_frames(utt, inventory)]
        if not frames:
            raise DataError(f"test manifest {config.test_manifest_path} yielded no frames")
        write_frames_csv(paths.test_frames, frames)
        return frames, utterances
    utterances = parse_alignments(config.manifest_path, inventory)
    return read_frames_csv(paths.validation_frames), utterances


def stage_evaluate(config: ExperimentConfig, paths: RunPaths) -> None:
    inventory = load_inventory()
    window_samples = waveform_window_length(config.mel.sample_rate_hz)
    model, _ = load_checkpoint(paths.best_checkpoint, window_samples)
    frames, utterances = _evaluation_frames(config, paths, inventory)
    dataset = _dataset(frames, _windows_for(config, frames, utterances, paths))
    preds = predict(model, dataset)
    write_predictions_csv(paths.predictions, preds)

    ci = bootstrap_ci(
        preds,
        n_resamples=config.n_resamples,
        alpha=config.alpha,
        seed=config.seed,
        unit=config.bootstrap_unit,
    )
    balanced = balanced_accuracy(preds)
    per_phone = {inventory.symbol_of(label): acc for label, acc in per_phone_accuracy(preds).items()}

    matrix = confusion_matrix(preds, inventory.class_symbols)
    write_confusion_csv(paths.confusion_csv("full"), matrix)
    write_heatmap_json(paths.confusion_json("full"), matrix)
    groups = load_phone_groups()
    for name, group in sorted(groups.items()):
        sub = group_submatrix(matrix, group)
        write_confusion_csv(paths.confusion_csv(name), sub)
        write_heatmap_json(paths.confusion_json(name), sub)

    _write_json(
        paths.metrics,
        {
            "n_frames": len(preds),
            "micro_accuracy": micro_accuracy(preds),
            "balanced_accuracy": ci.to_dict(),
            "balanced_accuracy_point": balanced.value,
            "per_phone_accuracy": per_phone,
            "confusion_groups": sorted(groups),
        },
    )


def stage_correlate(config: ExperimentConfig, paths: RunPaths) -> None:
    if config.ratings_path is None:
        _write_json(paths.correlations, {"skipped": True, "reason": "no ratings_path in config"})
        return
    preds = read_predictions_csv(paths.predictions)
    accuracies = speaker_balanced_accuracy(preds)
    scores = average_ratings(read_ratings_csv(config.ratings_path))
    payload = {"skipped": False}
    for dimension in DIMENSIONS:
        outcome = correlate_with_ratings(accuracies, scores, dimension)
        write_scatter_csv(paths.scatter_csv(dimension), outcome)
        payload[dimension] = outcome.to_dict()
    _write_json(paths.correlations, payload)


def stage_report(config: ExperimentConfig, paths: RunPaths) -> None:
    report = build_report(config, paths)
    validate_report(report)
    _write_json(paths.report_json, report)
    paths.report_text.write_text(render_text(report), encoding="utf-8")


_STAGE_FUNCTIONS = {
    "ingest": stage_ingest,
    "balance": stage_balance,
    "train": stage_train,
    "evaluate": stage_evaluate,
    "correlate": stage_correlate,
    "report": stage_report,
}


def _read_state(paths: RunPaths) -> dict | None:
    if not paths.state.exists():
        return None
    return json.loads(paths.state.read_text(encoding="utf-8"))


def _write_state(paths: RunPaths, config: ExperimentConfig, completed: list[str]) -> None:
    _write_json(
        paths.state,
        {
            "version": STATE_VERSION,
            "run_id": config.run_id,
            "config_sha256": config.sha256(),
            "completed": completed,
        },
    )


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    force: bool = False,
    through_stage: str = "report",
) -> Path:
    """Run stages in order up to through_stage; return the run directory.

    Stages already completed for the same config are skipped. force wipes an
    existing run directory (only one recognizably ours) and starts fresh.
    """
    if through_stage not in STAGES:
        raise ConfigError(f"unknown stage {through_stage!r}; expected one of {STAGES}")
    run_dir = Path(out_dir if out_dir is not None else config.out_dir) / config.run_id
    paths = RunPaths(run_dir=run_dir)

    if run_dir.exists():
        state = _read_state(paths)
        if force:
            if state is None and any(run_dir.iterdir()):
                raise ConfigError(
                    f"{run_dir} exists but is not a run directory; refusing to delete it"
                )
            shutil.rmtree(run_dir)
        elif state is None:
            if any(run_dir.iterdir()):
                raise ConfigError(f"{run_dir} exists and is not a run directory; use --force or --out")
        elif state.get("config_sha256") != config.sha256():
            raise ConfigError(
                f"run {config.run_id!r} already exists with a different config; use --force to redo it"
            )
    run_dir.mkdir(parents=True, exist_ok=True)

    try:
        fd = os.open(paths.lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise PipelineError(
            f"run directory {run_dir} is locked (another process?); remove {paths.lock} if stale"
        ) from None
    with os.fdopen(fd, "w") as handle:
        handle.write(str(os.getpid()))

    try:
        _write_json(paths.config_snapshot, config.to_dict())
        state = _read_state(paths) or {}
        completed = [s for s in state.get("completed", []) if s in STAGES]
        for stage in STAGES:
            if stage not in completed:
                _STAGE_FUNCTIONS[stage](config, paths)
                completed.append(stage)
                _write_state(paths, config, completed)
            if stage == through_stage:
                break
    finally:
        paths.lock.unlink(missing_ok=True)
    return run_dir
