"""Convolutional encoder over mel context windows.

Two convolution stages, each followed by max pooling, then flattening.
Channel counts, kernels and pool sizes live in the config so every
experiment is self-describing; defaults are 64 then 128 channels with
3x3 kernels and 2x2 pools.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn

from phoneclass.errors import ContractError


@dataclass(frozen=True)
class ConvStage:
    out_channels: int
    kernel: tuple[int, int] = (3, 3)
    pool: tuple[int, int] = (2, 2)

    def __post_init__(self):
        if self.out_channels <= 0:
            raise ValueError("out_channels must be positive")
        if any(k % 2 == 0 for k in self.kernel):
            raise ValueError("kernel sizes must be odd (same-padding convolutions)")
        if any(p <= 0 for p in self.pool):
            raise ValueError("pool sizes must be positive")


@dataclass(frozen=True)
class CnnEncoderConfig:
    conv_layers: tuple[ConvStage, ConvStage] = (ConvStage(64), ConvStage(128))
    input_shape: tuple[int, int] = (11, 120)

    def __post_init__(self):
        if len(self.conv_layers) != 2:
            raise ValueError("exactly two convolution stages are required")

    def output_shape(self) -> tuple[int, int, int]:
        """(channels, height, width) after both conv+pool stages."""
        h, w = self.input_shape
        channels = 1
        for stage in self.conv_layers:
            channels = stage.out_channels
            h //= stage.pool[0]  # same-padded conv keeps size; pooling floors
            w //= stage.pool[1]
        return channels, h, w

    @property
    def output_dim(self) -> int:
        c, h, w = self.output_shape()
        return c * h * w

    def to_dict(self) -> dict:
        return {
            "conv_layers": [
                {"out_channels": s.out_channels, "kernel": list(s.kernel), "pool": list(s.pool)}
                for s in self.conv_layers
            ],
            "input_shape": list(self.input_shape),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CnnEncoderConfig":
        if "conv_layers" in data:
            stages = tuple(
                ConvStage(
                    out_channels=int(s["out_channels"]),
                    kernel=tuple(s.get("kernel", (3, 3))),
                    pool=tuple(s.get("pool", (2, 2))),
                )
                for s in data["conv_layers"]
            )
        else:
            stages = (ConvStage(64), ConvStage(128))
        return cls(conv_layers=stages, input_shape=tuple(data.get("input_shape", (11, 120))))


class CnnEncoder(nn.Module):
    """Maps a (batch, H, W) feature window to a flattened embedding."""

    def __init__(self, config: CnnEncoderConfig):
        super().__init__()
        self.config = config
        layers: list[nn.Module] = []
        in_channels = 1
        for stage in config.conv_layers:
            layers.append(
                nn.Conv2d(
                    in_channels,
                    stage.out_channels,
                    kernel_size=stage.kernel,
                    padding=tuple(k // 2 for k in stage.kernel),
                )
            )
            layers.append(nn.ReLU())
            layers.append(nn.MaxPool2d(stage.pool))
            in_channels = stage.out_channels
        self.stack = nn.Sequential(*layers)

    @property
    def output_dim(self) -> int:
        return self.config.output_dim

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() == 2:
            x = x.unsqueeze(0)
        if x.dim() != 3 or tuple(x.shape[1:]) != self.config.input_shape:
            raise ContractError(
                f"expected windows of shape {self.config.input_shape}, got {tuple(x.shape)}"
            )
        out = self.stack(x.unsqueeze(1))
        return out.flatten(start_dim=1)


def cnn_forward(window, encoder: CnnEncoder):
    """Inference-mode embedding of a single FeatureWindow (numpy out)."""
    x = torch.as_tensor(window.values, dtype=next(encoder.parameters()).dtype)
    encoder.eval()
    with torch.no_grad():
        return encoder(x.unsqueeze(0))[0].numpy()
