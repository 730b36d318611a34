"""Mini-batch training with per-epoch checkpoints and best-epoch selection.

The classifier head and the encoder get separate optimizers: the head always
trains (Adadelta, lr 0.9); the encoder trains only where its parameters
require grad, under Adam at lr 1e-4. The model returned to the caller is the
one from the epoch with the lowest validation phone error rate, not the last
one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from phoneclass.errors import ConfigError, DataError, TrainingDivergedError
from phoneclass.evaluation.metrics import SILENCE_LABEL, balanced_accuracy, micro_accuracy
from phoneclass.evaluation.predictions import PredictionSet
from phoneclass.models.head import PhoneClassifier

OPTIMIZER_KINDS = ("adadelta", "adam")


@dataclass(frozen=True)
class OptimizerSpec:
    kind: str
    lr: float

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ConfigError(f"unknown optimizer kind {self.kind!r}; expected one of {OPTIMIZER_KINDS}")
        # lr == 0 is allowed: it makes an optimizer a no-op, which is how the
        # frozen-everything diagnostic below is expressed.
        if not self.lr >= 0.0:
            raise ConfigError(f"learning rate must be >= 0, got {self.lr}")

    def build(self, params) -> torch.optim.Optimizer:
        if self.kind == "adadelta":
            return torch.optim.Adadelta(params, lr=self.lr)
        return torch.optim.Adam(params, lr=self.lr)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lr": self.lr}

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerSpec":
        return cls(kind=data["kind"], lr=float(data["lr"]))


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 15
    batch_size: int = 256
    seed: int = 0
    head_optimizer: OptimizerSpec = field(default_factory=lambda: OptimizerSpec("adadelta", 0.9))
    encoder_optimizer: OptimizerSpec = field(default_factory=lambda: OptimizerSpec("adam", 1e-4))

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "head_optimizer": self.head_optimizer.to_dict(),
            "encoder_optimizer": self.encoder_optimizer.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainingConfig":
        kwargs = dict(data)
        if "head_optimizer" in kwargs:
            kwargs["head_optimizer"] = OptimizerSpec.from_dict(kwargs["head_optimizer"])
        if "encoder_optimizer" in kwargs:
            kwargs["encoder_optimizer"] = OptimizerSpec.from_dict(kwargs["encoder_optimizer"])
        return cls(**kwargs)


@dataclass(frozen=True)
class ArrayDataset:
    """In-memory feature/label arrays, one row per frame."""

    features: np.ndarray
    labels: np.ndarray
    speaker_ids: np.ndarray = None
    utterance_ids: np.ndarray = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float32)
        labels = np.asarray(self.labels, dtype=np.int64)
        if len(feats) == 0:
            raise DataError("dataset is empty")
        if len(feats) != len(labels):
            raise DataError("features and labels differ in length")
        speakers = self.speaker_ids if self.speaker_ids is not None else np.full(len(labels), "", dtype=object)
        utts = self.utterance_ids if self.utterance_ids is not None else np.full(len(labels), "", dtype=object)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "speaker_ids", np.asarray(speakers, dtype=object))
        object.__setattr__(self, "utterance_ids", np.asarray(utts, dtype=object))

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    validation_error_rate: float
    validation_balanced_accuracy: float

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "validation_error_rate": self.validation_error_rate,
            "validation_balanced_accuracy": self.validation_balanced_accuracy,
        }


@dataclass(frozen=True)
class CheckpointMeta:
    best_epoch: int
    best_validation_error_rate: float
    checkpoint_path: str
    epochs_run: int

    def to_dict(self) -> dict:
        return {
            "best_epoch": self.best_epoch,
            "best_validation_error_rate": self.best_validation_error_rate,
            "checkpoint_path": self.checkpoint_path,
            "epochs_run": self.epochs_run,
        }


@dataclass(frozen=True)
class ValidationResult:
    error_rate: float
    balanced_accuracy: float
    predictions: PredictionSet


def predict(model: PhoneClassifier, dataset: ArrayDataset, batch_size: int = 512) -> PredictionSet:
    model.eval()
    preds = np.empty(len(dataset), dtype=np.int64)
    with torch.no_grad():
        for start in range(0, len(dataset), batch_size):
            batch = torch.from_numpy(dataset.features[start : start + batch_size])
            logits = model(batch)
            preds[start : start + len(batch)] = logits.argmax(dim=1).numpy()
    return PredictionSet(
        true_labels=dataset.labels,
        predicted_labels=preds,
        speaker_ids=dataset.speaker_ids,
        utterance_ids=dataset.utterance_ids,
    )


def validate(
    model: PhoneClassifier, dataset: ArrayDataset, silence_label: int = SILENCE_LABEL
) -> ValidationResult:
    """Phone error rate (1 - pooled accuracy) plus balanced accuracy.

    The error rate drives checkpoint selection; the balanced accuracy is
    logged alongside. Balanced accuracy is nan when no non-silence label is
    present, rather than an error, so validation never aborts a run.
    """
    preds = predict(model, dataset)
    error_rate = 1.0 - micro_accuracy(preds)
    try:
        bal = balanced_accuracy(preds, silence_label=silence_label).value
    except Exception:
        bal = math.nan
    return ValidationResult(error_rate=error_rate, balanced_accuracy=bal, predictions=preds)


def build_optimizers(model: PhoneClassifier, config: TrainingConfig) -> list[torch.optim.Optimizer]:
    optimizers = [config.head_optimizer.build(model.head.parameters())]
    encoder_params = [p for p in model.encoder.parameters() if p.requires_grad]
    if encoder_params:
        optimizers.append(config.encoder_optimizer.build(encoder_params))
    return optimizers


def train(
    model: PhoneClassifier,
    train_set: ArrayDataset,
    validation_set: ArrayDataset,
    config: TrainingConfig,
    checkpoint_dir: str | Path,
) -> tuple[CheckpointMeta, list[EpochMetrics]]:
    """Train, checkpoint every epoch, and reload the best epoch into the model.

    Batch order for epoch k comes from a generator seeded with
    (config.seed, k), so runs with equal inputs and config are bit-identical.
    A non-finite loss aborts with TrainingDivergedError carrying the epoch
    and batch index. Ties on validation error go to the earliest epoch.
    """
    checkpoint_dir = Path(checkpoint_dir)
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    optimizers = build_optimizers(model, config)
    history: list[EpochMetrics] = []
    best_epoch = -1
    best_error = math.inf
    log_path = checkpoint_dir / "train_log.jsonl"
    with log_path.open("w", encoding="utf-8") as log:
        for epoch in range(config.epochs):
            model.train()
            rng = np.random.default_rng([config.seed, epoch])
            order = rng.permutation(len(train_set))
            losses = []
            for batch_index, start in enumerate(range(0, len(order), config.batch_size)):
                idx = order[start : start + config.batch_size]
                x = torch.from_numpy(train_set.features[idx])
                y = torch.from_numpy(train_set.labels[idx])
                for opt in optimizers:
                    opt.zero_grad()
                loss = torch.nn.functional.cross_entropy(model(x), y)
                if not torch.isfinite(loss):
                    raise TrainingDivergedError(
                        f"non-finite loss at epoch {epoch}, batch {batch_index}",
                        epoch=epoch,
                        batch_index=batch_index,
                    )
                loss.backward()
                for opt in optimizers:
                    opt.step()
                losses.append(float(loss.detach()))
            result = validate(model, validation_set)
            metrics = EpochMetrics(
                epoch=epoch,
                train_loss=float(np.mean(losses)),
                validation_error_rate=result.error_rate,
                validation_balanced_accuracy=result.balanced_accuracy,
            )
            history.append(metrics)
            log.write(json.dumps(metrics.to_dict(), sort_keys=True) + "\n")
            torch.save({"epoch": epoch, "state_dict": model.state_dict()}, checkpoint_dir / f"epoch_{epoch}.pt")
            if result.error_rate < best_error:
                best_error = result.error_rate
                best_epoch = epoch

    best_path = checkpoint_dir / f"epoch_{best_epoch}.pt"
    payload = torch.load(best_path, map_location="cpu", weights_only=True)
    model.load_state_dict(payload["state_dict"])
    meta = CheckpointMeta(
        best_epoch=best_epoch,
        best_validation_error_rate=best_error,
        checkpoint_path=str(best_path),
        epochs_run=config.epochs,
    )
    (checkpoint_dir / "best.json").write_text(
        json.dumps(meta.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return meta, history
