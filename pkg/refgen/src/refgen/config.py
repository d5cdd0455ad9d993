"""Training configuration and the published per-dataset defaults."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

MODELS = ("ntg", "ar_rnn", "start_rnn")
DATASETS = ("mnist_seq", "fs", "geolife")
LOSSES = ("wgan_lp", "mse")

# feature dimensionality seen by the AR-style models: 28 pixel columns per
# row for MNIST sequences, (lat, lon) for trajectories
FEATURE_DIM = {"mnist_seq": 28, "fs": 2, "geolife": 2}


@dataclass(frozen=True)
class DPConfig:
    """DP-SGD knobs: per-sample clip to ``clip_norm``, then Gaussian noise
    with standard deviation ``noise_multiplier * clip_norm`` on the summed
    gradient. The budget itself is delegated to an external accountant;
    ``target`` only records what that accountant should be asked for.
    """

    clip_norm: float = math.inf
    noise_multiplier: float = 0.0
    target: Optional[Tuple[float, float]] = None

    def __post_init__(self) -> None:
        if not (self.clip_norm > 0):
            raise ValueError(f"clip_norm must be positive, got {self.clip_norm}")
        if self.noise_multiplier < 0:
            raise ValueError(
                f"noise_multiplier must be non-negative, got {self.noise_multiplier}"
            )
        if self.noise_multiplier > 0 and math.isinf(self.clip_norm):
            raise ValueError("noise_multiplier > 0 requires a finite clip_norm")

    @property
    def is_identity(self) -> bool:
        return math.isinf(self.clip_norm) and self.noise_multiplier == 0.0


@dataclass(frozen=True)
class GeneratorConfig:
    model: str
    epochs: int
    batch_size: int
    lr_gen: float
    lr_dis: Optional[float]
    beta1: float
    beta2: float
    n_critic: int
    noise_dim: int
    hidden_size: int
    loss: str
    penalty_weight: float = 10.0
    seed: int = 0
    dp: Optional[DPConfig] = field(default=None)

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}, expected one of {MODELS}")
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}, expected one of {LOSSES}")
        for name in ("epochs", "batch_size", "n_critic", "noise_dim", "hidden_size"):
            v = getattr(self, name)
            if not (isinstance(v, int) and v > 0):
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if not (self.lr_gen > 0):
            raise ValueError(f"lr_gen must be positive, got {self.lr_gen}")
        if self.lr_dis is not None and not (self.lr_dis > 0):
            raise ValueError(f"lr_dis must be positive or None, got {self.lr_dis}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError(f"betas must lie in [0, 1), got {self.beta1}, {self.beta2}")
        if self.penalty_weight < 0:
            raise ValueError(f"penalty_weight must be non-negative, got {self.penalty_weight}")


def default_config(model: str, dataset: str, **overrides) -> GeneratorConfig:
    """The published evaluation hyperparameters, keyed by model and dataset."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}, expected one of {MODELS}")
    if dataset not in DATASETS:
        raise ValueError(f"unknown dataset {dataset!r}, expected one of {DATASETS}")

    if model == "ntg":
        cfg = GeneratorConfig(
            model="ntg",
            epochs=300 if dataset == "fs" else 100,
            batch_size=10,
            lr_gen=1e-4,
            lr_dis=1e-4 if dataset == "mnist_seq" else 3e-4,
            beta1=0.5,
            beta2=0.999,
            n_critic=5,
            noise_dim=100,
            hidden_size=100,
            loss="wgan_lp",
        )
    else:
        cfg = GeneratorConfig(
            model=model,
            epochs={"mnist_seq": 30, "fs": 300, "geolife": 100}[dataset],
            batch_size=512,
            lr_gen=1e-3,
            lr_dis=None,
            beta1=0.9,
            beta2=0.999,
            n_critic=1,
            noise_dim=FEATURE_DIM[dataset],
            hidden_size=100,
            loss="mse",
        )
    return replace(cfg, **overrides) if overrides else cfg


def embedding_dim(channel_dim: int, kind: str) -> int:
    """Critic embedding width: 28 for pixel rows, 64 for the combined spatial
    features, and the input size for categorical features."""
    if kind == "categorical":
        return channel_dim
    return 28 if channel_dim == 28 else 64
