"""Classifier head and the combined encoder+head phone classifier.

The head is fixed by contract: three 1024-wide fully connected layers with
ReLU, then a linear projection onto the 32 class logits. The predicted phone
is the argmax (equivalently the softmax argmax); ties break to the lowest
class index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from phoneclass.errors import ContractError, PredictionError

N_CLASSES = 32


@dataclass(frozen=True)
class ClassifierHeadConfig:
    hidden_dims: tuple[int, int, int] = (1024, 1024, 1024)
    n_classes: int = N_CLASSES

    def __post_init__(self):
        if len(self.hidden_dims) != 3 or any(d != 1024 for d in self.hidden_dims):
            raise ValueError("head contract requires exactly three 1024-wide hidden layers")
        if self.n_classes != N_CLASSES:
            raise ValueError(f"head contract requires {N_CLASSES} output classes")

    def to_dict(self) -> dict:
        return {"hidden_dims": list(self.hidden_dims), "n_classes": self.n_classes}

    @classmethod
    def from_dict(cls, data: dict) -> "ClassifierHeadConfig":
        return cls(hidden_dims=tuple(data["hidden_dims"]), n_classes=int(data["n_classes"]))


class ClassifierHead(nn.Module):
    def __init__(self, in_dim: int, config: ClassifierHeadConfig | None = None):
        super().__init__()
        self.config = config or ClassifierHeadConfig()
        self.in_dim = in_dim
        dims = [in_dim, *self.config.hidden_dims]
        layers: list[nn.Module] = []
        for a, b in zip(dims, dims[1:]):
            layers.append(nn.Linear(a, b))
            layers.append(nn.ReLU())
        layers.append(nn.Linear(dims[-1], self.config.n_classes))
        self.stack = nn.Sequential(*layers)

    def forward(self, embedding: torch.Tensor) -> torch.Tensor:
        if embedding.dim() == 1:
            embedding = embedding.unsqueeze(0)
        if embedding.dim() != 2 or embedding.shape[1] != self.in_dim:
            raise ContractError(
                f"expected embeddings of width {self.in_dim}, got {tuple(embedding.shape)}"
            )
        return self.stack(embedding)


class PhoneClassifier(nn.Module):
    """Window in, 32 logits out, for either encoder family."""

    def __init__(self, encoder: nn.Module, head: ClassifierHead):
        super().__init__()
        if encoder.output_dim != head.in_dim:
            raise ContractError(
                f"encoder emits {encoder.output_dim}-dim embeddings but head expects {head.in_dim}"
            )
        self.encoder = encoder
        self.head = head

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.encoder(x))


def classifier_forward(embedding: np.ndarray, head: ClassifierHead) -> np.ndarray:
    """Inference-mode logits for one embedding vector (numpy out)."""
    x = torch.as_tensor(np.asarray(embedding), dtype=next(head.parameters()).dtype)
    head.eval()
    with torch.no_grad():
        return head(x.unsqueeze(0) if x.dim() == 1 else x).squeeze(0).numpy()


def predict_phone(logits) -> int:
    """Argmax class index; NaN logits are refused, ties go to the lowest index."""
    values = np.asarray(logits, dtype=np.float64)
    if values.ndim != 1 or len(values) != N_CLASSES:
        raise ContractError(f"expected {N_CLASSES} logits, got shape {values.shape}")
    if np.isnan(values).any():
        raise PredictionError("logits contain NaN")
    return int(np.argmax(values))
