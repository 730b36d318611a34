"""Pluggable raw-audio encoder backends behind a single frame-embedding contract.

A backend consumes a fixed-length waveform window and emits a short sequence
of frame embeddings (about six frames for a 2032-sample window at 16 kHz:
25 ms receptive windows with a 20 ms stride). Which concrete backend runs is
pure configuration: backends register under a family name and are resolved
from ``SslBackendHandle.backend_id`` (``family:variant``). Pretraining
internals stay behind this contract.

The built-in ``toy`` family is a small deterministic convolutional stack used
for tests and desk-scale experiments; its weights derive from the backend id,
so the same id always yields the same "checkpoint".
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable

import torch
from torch import nn

from phoneclass.errors import BackendError, ContractError

RECEPTIVE_SAMPLES = 400  # 25 ms at 16 kHz
STRIDE_SAMPLES = 320  # ~20 ms at 16 kHz

SIZE_NAMES = {6: "light", 12: "base", 24: "large"}


@dataclass(frozen=True)
class SslBackendHandle:
    """Configuration pointing at one pretrained (or toy) backend."""

    backend_id: str
    hidden_layers: int
    trainable: bool
    embedding_dim: int
    layer_index: int = -1  # final hidden layer by default

    def __post_init__(self):
        if self.hidden_layers not in SIZE_NAMES:
            raise ValueError(f"hidden_layers must be one of {sorted(SIZE_NAMES)}, got {self.hidden_layers}")
        if self.embedding_dim <= 0:
            raise ValueError("embedding_dim must be positive")

    @property
    def size_name(self) -> str:
        return SIZE_NAMES[self.hidden_layers]

    def to_dict(self) -> dict:
        return {
            "backend_id": self.backend_id,
            "hidden_layers": self.hidden_layers,
            "trainable": self.trainable,
            "embedding_dim": self.embedding_dim,
            "layer_index": self.layer_index,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SslBackendHandle":
        return cls(
            backend_id=str(data["backend_id"]),
            hidden_layers=int(data["hidden_layers"]),
            trainable=bool(data["trainable"]),
            embedding_dim=int(data["embedding_dim"]),
            layer_index=int(data.get("layer_index", -1)),
        )


def frame_count(n_samples: int) -> int:
    """Frames emitted for a window of ``n_samples`` samples."""
    if n_samples < RECEPTIVE_SAMPLES:
        raise ContractError(f"window of {n_samples} samples shorter than one receptive window")
    return (n_samples - RECEPTIVE_SAMPLES) // STRIDE_SAMPLES + 1


class ToyWaveEncoder(nn.Module):
    """Deterministic conv stack standing in for a pretrained waveform encoder.

    A strided stem produces one frame per 20 ms, followed by
    ``hidden_layers`` residual pointwise blocks. Hidden states are kept per
    layer so a configurable layer can feed the classifier.
    """

    def __init__(self, hidden_layers: int, embedding_dim: int, init_seed: int):
        super().__init__()
        self.stem = nn.Conv1d(1, embedding_dim, kernel_size=RECEPTIVE_SAMPLES, stride=STRIDE_SAMPLES)
        self.blocks = nn.ModuleList(
            [nn.Conv1d(embedding_dim, embedding_dim, kernel_size=1) for _ in range(hidden_layers)]
        )
        gen = torch.Generator().manual_seed(init_seed)
        with torch.no_grad():
            for p in self.parameters():
                p.copy_(torch.empty_like(p).normal_(0.0, 0.05, generator=gen))

    def forward(self, wave: torch.Tensor) -> list[torch.Tensor]:
        """Hidden states per layer, each (batch, frames, dim)."""
        x = torch.tanh(self.stem(wave.unsqueeze(1)))
        states = [x.transpose(1, 2)]
        for block in self.blocks:
            x = x + 0.5 * torch.tanh(block(x))
            states.append(x.transpose(1, 2))
        return states


def _toy_factory(handle: SslBackendHandle) -> nn.Module:
    digest = hashlib.sha256(
        f"{handle.backend_id}|{handle.hidden_layers}|{handle.embedding_dim}".encode()
    ).digest()
    seed = int.from_bytes(digest[:8], "big") % (2**63)
    return ToyWaveEncoder(handle.hidden_layers, handle.embedding_dim, seed)


_REGISTRY: dict[str, Callable[[SslBackendHandle], nn.Module]] = {"toy": _toy_factory}


def register_backend(family: str, factory: Callable[[SslBackendHandle], nn.Module]) -> None:
    """Register a backend family; the factory gets the handle and returns a
    module whose forward yields per-layer hidden states (batch, frames, dim)."""
    _REGISTRY[family] = factory


class SslEncoder(nn.Module):
    """Adapter exposing a backend as window -> flattened frame embeddings."""

    def __init__(self, backbone: nn.Module, handle: SslBackendHandle, window_samples: int = 2032):
        super().__init__()
        self.backbone = backbone
        self.handle = handle
        self.window_samples = window_samples
        self.n_frames = frame_count(window_samples)
        if not handle.trainable:
            for p in self.backbone.parameters():
                p.requires_grad_(False)

    @property
    def output_dim(self) -> int:
        return self.n_frames * self.handle.embedding_dim

    def frame_embeddings(self, wave: torch.Tensor) -> torch.Tensor:
        if wave.dim() == 1:
            wave = wave.unsqueeze(0)
        if wave.dim() != 2 or wave.shape[1] != self.window_samples:
            raise ContractError(
                f"expected windows of {self.window_samples} samples, got {tuple(wave.shape)}"
            )
        states = self.backbone(wave)
        return states[self.handle.layer_index]

    def forward(self, wave: torch.Tensor) -> torch.Tensor:
        return self.frame_embeddings(wave).flatten(start_dim=1)


def resolve_backend(handle: SslBackendHandle, window_samples: int = 2032) -> SslEncoder:
    """Build the encoder for a handle; unknown family -> BackendError.

    Always constructs a fresh module: factories are deterministic per
    backend id, so repeated resolution reproduces the same weights without
    sharing mutable state between training runs.
    """
    family = handle.backend_id.split(":", 1)[0]
    factory = _REGISTRY.get(family)
    if factory is None:
        raise BackendError(
            f"no backend registered for family {family!r} (known: {sorted(_REGISTRY)})"
        )
    return SslEncoder(factory(handle), handle, window_samples)


def ssl_forward(window, handle_or_encoder):
    """Inference-mode flattened embedding of one WaveformWindow (numpy out)."""
    encoder = (
        handle_or_encoder
        if isinstance(handle_or_encoder, SslEncoder)
        else resolve_backend(handle_or_encoder, len(window.samples))
    )
    x = torch.as_tensor(window.samples, dtype=next(encoder.parameters()).dtype)
    encoder.eval()
    with torch.no_grad():
        return encoder(x.unsqueeze(0))[0].numpy()
