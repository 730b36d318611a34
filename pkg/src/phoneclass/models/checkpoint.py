"""Model construction from config and checkpoint (de)serialization.

A checkpoint is self-contained: parameters, the full model config and the
inventory digest, so inference needs no access to the training corpora.
"""

from __future__ import annotations

from pathlib import Path

import torch

from phoneclass.errors import ConfigError
from phoneclass.models.cnn import CnnEncoder, CnnEncoderConfig
from phoneclass.models.head import ClassifierHead, ClassifierHeadConfig, PhoneClassifier
from phoneclass.models.ssl_backend import SslBackendHandle, SslEncoder, resolve_backend

CHECKPOINT_FORMAT = 1

EncoderSpec = CnnEncoderConfig | SslBackendHandle


def encoder_spec_to_dict(spec: EncoderSpec) -> dict:
    if isinstance(spec, CnnEncoderConfig):
        return {"kind": "cnn", **spec.to_dict()}
    return {"kind": "ssl", **spec.to_dict()}


def encoder_spec_from_dict(data: dict) -> EncoderSpec:
    kind = data.get("kind")
    payload = {k: v for k, v in data.items() if k != "kind"}
    if kind == "cnn":
        return CnnEncoderConfig.from_dict(payload)
    if kind == "ssl":
        return SslBackendHandle.from_dict(payload)
    raise ConfigError(f"unknown encoder kind {kind!r}")


def build_encoder(spec: EncoderSpec, window_samples: int = 2032):
    if isinstance(spec, CnnEncoderConfig):
        return CnnEncoder(spec)
    return resolve_backend(spec, window_samples)


def build_model(
    spec: EncoderSpec,
    head_config: ClassifierHeadConfig | None = None,
    window_samples: int = 2032,
    seed: int | None = None,
) -> PhoneClassifier:
    """Assemble encoder + head; ``seed`` makes the trainable init reproducible."""
    with torch.random.fork_rng():
        if seed is not None:
            torch.manual_seed(seed)
        encoder = build_encoder(spec, window_samples)
        head = ClassifierHead(encoder.output_dim, head_config)
    return PhoneClassifier(encoder, head)


def save_checkpoint(
    path: str | Path,
    model: PhoneClassifier,
    encoder_spec: EncoderSpec,
    inventory_sha256: str,
    extra: dict | None = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "encoder": encoder_spec_to_dict(encoder_spec),
        "head": model.head.config.to_dict(),
        "inventory_sha256": inventory_sha256,
        "state_dict": model.state_dict(),
        "extra": extra or {},
    }
    torch.save(payload, path)
    return path


def load_checkpoint(path: str | Path, window_samples: int = 2032) -> tuple[PhoneClassifier, dict]:
    """Rebuild the model from a checkpoint; returns (model, metadata)."""
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ConfigError(f"unsupported checkpoint format {payload.get('format')!r}")
    spec = encoder_spec_from_dict(payload["encoder"])
    head_config = ClassifierHeadConfig.from_dict(payload["head"])
    model = build_model(spec, head_config, window_samples)
    model.load_state_dict(payload["state_dict"])
    meta = {k: payload[k] for k in ("encoder", "head", "inventory_sha256", "extra")}
    if isinstance(model.encoder, SslEncoder) and not model.encoder.handle.trainable:
        for p in model.encoder.parameters():
            p.requires_grad_(False)
    return model, meta
