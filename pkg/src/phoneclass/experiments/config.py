"""Experiment configuration: one JSON file describes one full run."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from phoneclass.corpus.frames import BalancingPolicy
from phoneclass.errors import ConfigError
from phoneclass.evaluation.bootstrap import RESAMPLE_UNITS
from phoneclass.features.melspec import MelConfig
from phoneclass.models.checkpoint import EncoderSpec, encoder_spec_from_dict, encoder_spec_to_dict
from phoneclass.models.cnn import CnnEncoderConfig
from phoneclass.training.loop import TrainingConfig

RUN_ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")

_TOP_LEVEL_KEYS = {
    "run_id",
    "manifest_path",
    "ratings_path",
    "test_manifest_path",
    "encoder",
    "training",
    "balancing",
    "mel",
    "split_ratio",
    "seed",
    "n_resamples",
    "alpha",
    "bootstrap_unit",
    "out_dir",
}


@dataclass(frozen=True)
class ExperimentConfig:
    run_id: str
    manifest_path: str
    ratings_path: str | None = None
    test_manifest_path: str | None = None
    encoder: EncoderSpec = field(default_factory=CnnEncoderConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    balancing: BalancingPolicy = field(default_factory=BalancingPolicy)
    mel: MelConfig = field(default_factory=MelConfig)
    split_ratio: float = 0.9
    seed: int = 0
    n_resamples: int = 1000
    alpha: float = 0.05
    bootstrap_unit: str = "frame"
    out_dir: str = "runs"

    def __post_init__(self):
        if not RUN_ID_PATTERN.match(self.run_id):
            raise ConfigError(f"run_id {self.run_id!r} is not a safe directory name")
        if not self.manifest_path:
            raise ConfigError("manifest_path is required")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError(f"split_ratio must lie in (0, 1), got {self.split_ratio}")
        if self.n_resamples < 1:
            raise ConfigError("n_resamples must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.bootstrap_unit not in RESAMPLE_UNITS:
            raise ConfigError(f"bootstrap_unit must be one of {RESAMPLE_UNITS}, got {self.bootstrap_unit!r}")

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "manifest_path": self.manifest_path,
            "ratings_path": self.ratings_path,
            "test_manifest_path": self.test_manifest_path,
            "encoder": encoder_spec_to_dict(self.encoder),
            "training": self.training.to_dict(),
            "balancing": {
                "balance_phones": self.balancing.balance_phones,
                "balance_gender": self.balancing.balance_gender,
                "seed": self.balancing.seed,
                "target_count": self.balancing.target_count,
                "exclude_silence_from_minimum": self.balancing.exclude_silence_from_minimum,
            },
            "mel": {
                "sample_rate_hz": self.mel.sample_rate_hz,
                "frame_length_s": self.mel.frame_length_s,
                "frame_hop_s": self.mel.frame_hop_s,
                "n_mels": self.mel.n_mels,
                "context_frames": self.mel.context_frames,
                "fmin_hz": self.mel.fmin_hz,
                "fmax_hz": self.mel.fmax_hz,
                "per_utterance_cmvn": self.mel.per_utterance_cmvn,
            },
            "split_ratio": self.split_ratio,
            "seed": self.seed,
            "n_resamples": self.n_resamples,
            "alpha": self.alpha,
            "bootstrap_unit": self.bootstrap_unit,
            "out_dir": self.out_dir,
        }

    def sha256(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")).hexdigest()


def config_from_dict(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    """Parse a config mapping; unknown keys are an error so typos surface loudly.

    Relative paths are resolved against base_dir (the config file's directory)
    when given. Sub-config seeds default to the run-level seed unless set
    explicitly.
    """
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
    unknown = sorted(set(data) - _TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {unknown}")
    missing = [k for k in ("run_id", "manifest_path") if k not in data]
    if missing:
        raise ConfigError(f"missing required config key(s): {missing}")

    seed = int(data.get("seed", 0))

    def resolve(value):
        if value is None:
            return None
        path = Path(value)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return str(path)

    try:
        encoder = encoder_spec_from_dict(data["encoder"]) if "encoder" in data else CnnEncoderConfig()
        training_raw = dict(data.get("training", {}))
        training_raw.setdefault("seed", seed)
        training = TrainingConfig.from_dict(training_raw)
        balancing_raw = dict(data.get("balancing", {}))
        balancing_raw.setdefault("seed", seed)
        balancing = BalancingPolicy(**balancing_raw)
        mel = MelConfig(**data.get("mel", {}))
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad sub-config: {exc}") from exc

    return ExperimentConfig(
        run_id=str(data["run_id"]),
        manifest_path=resolve(data["manifest_path"]),
        ratings_path=resolve(data.get("ratings_path")),
        test_manifest_path=resolve(data.get("test_manifest_path")),
        encoder=encoder,
        training=training,
        balancing=balancing,
        mel=mel,
        split_ratio=float(data.get("split_ratio", 0.9)),
        seed=seed,
        n_resamples=int(data.get("n_resamples", 1000)),
        alpha=float(data.get("alpha", 0.05)),
        bootstrap_unit=str(data.get("bootstrap_unit", "frame")),
        out_dir=str(data.get("out_dir", "runs")),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON at line {exc.lineno}") from exc
    return config_from_dict(data, base_dir=path.resolve().parent)


def override_seed(config: ExperimentConfig, seed: int) -> ExperimentConfig:
    """Reseed the whole run with one knob: run, training and balancing seeds."""
    return replace(
        config,
        seed=seed,
        training=replace(config.training, seed=seed),
        balancing=replace(config.balancing, seed=seed),
    )
