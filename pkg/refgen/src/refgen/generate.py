"""Sampling from trained checkpoints into canonical CSV + sidecar files."""

from __future__ import annotations

from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import torch

from refgen.data import (
    ChannelSpec,
    SeqDataset,
    SeqTrajectory,
    dataset_from_trajectories,
    write_canonical,
)
from refgen.models import ARRNN, NTGGenerator

KINDS = ("ntg", "ar_rnn", "start_rnn")
_CKPT_KEYS = (
    "kind",
    "state_dict",
    "cfg",
    "channels",
    "norm",
    "normalized",
    "lengths",
    "start_points",
    "mnist",
)


def load_checkpoint(path: Union[str, Path]) -> dict:
    ckpt = torch.load(path, weights_only=True)
    missing = [k for k in _CKPT_KEYS if k not in ckpt]
    if missing:
        raise ValueError(f"checkpoint {path} is missing keys {missing}")
    if ckpt["kind"] not in KINDS:
        raise ValueError(f"unknown checkpoint kind {ckpt['kind']!r}")
    return ckpt


def _channels(ckpt: dict) -> Tuple[ChannelSpec, ...]:
    return tuple(ChannelSpec(name, int(dim), kind) for name, dim, kind in ckpt["channels"])


def _build_model(ckpt: dict) -> torch.nn.Module:
    cfg = ckpt["cfg"]
    channels = _channels(ckpt)
    if ckpt["kind"] == "ntg":
        model: torch.nn.Module = NTGGenerator(
            channels, int(cfg["noise_dim"]), int(cfg["hidden_size"])
        )
    else:
        model = ARRNN(sum(ch.dim for ch in channels), int(cfg["hidden_size"]))
    model.load_state_dict(ckpt["state_dict"])
    model.eval()
    return model


def _to_trajectories(
    flat: np.ndarray,
    lengths: np.ndarray,
    channels: Tuple[ChannelSpec, ...],
    mnist: bool,
) -> List[SeqTrajectory]:
    trajs = []
    for i in range(len(flat)):
        sample = flat[i, : int(lengths[i])]
        attrs = {}
        if mnist:
            # pixel-row sequences have no geography; project two columns so
            # the file still carries one point per step
            coords = sample[:, :2].astype(float)
        else:
            coords = None
            offset = 0
            for ch in channels:
                block = sample[:, offset : offset + ch.dim]
                offset += ch.dim
                if ch.name == "spatial":
                    coords = block.astype(float)
                elif ch.kind == "categorical":
                    attrs[ch.name] = block.argmax(axis=1)
            if coords is None:
                raise ValueError("checkpoint channels lack a spatial channel")
        tid = f"g{i:06d}"
        trajs.append(SeqTrajectory(tid, tid, coords, None, attrs))
    return trajs


def generate(
    checkpoint: Union[str, Path],
    n: int,
    seed: int,
    output: Union[str, Path],
    seq_len: Optional[int] = None,
) -> Path:
    """Sample ``n`` sequences from a checkpoint and write them as a canonical
    file; lengths are resampled from the training corpus unless pinned."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    ckpt = load_checkpoint(checkpoint)
    if n == 0:
        empty = SeqDataset([], _zero_bbox(), ckpt["norm"], bool(ckpt["normalized"]))
        return write_canonical(empty, output)

    rng = np.random.default_rng(seed)
    torch_gen = torch.Generator().manual_seed(seed)
    if seq_len is not None:
        if seq_len < 1:
            raise ValueError(f"seq_len must be positive, got {seq_len}")
        lengths = np.full(n, seq_len, dtype=np.int64)
    else:
        lengths = rng.choice(np.asarray(ckpt["lengths"], dtype=np.int64), size=n)
    t_max = int(lengths.max())

    model = _build_model(ckpt)
    cfg = ckpt["cfg"]
    if ckpt["kind"] == "ntg":
        z = torch.randn(n, int(cfg["noise_dim"]), generator=torch_gen)
        with torch.no_grad():
            flat = model.flat(z, t_max)
    else:
        start = None
        if ckpt["kind"] == "start_rnn":
            pool = np.asarray(ckpt["start_points"], dtype=np.float32)
            start = torch.from_numpy(pool[rng.integers(0, len(pool), size=n)])
        flat = model.generate(n, t_max, torch_gen, start=start)

    trajs = _to_trajectories(
        flat.numpy(), lengths, _channels(ckpt), bool(ckpt["mnist"])
    )
    ds = dataset_from_trajectories(trajs, ckpt["norm"], bool(ckpt["normalized"]))
    return write_canonical(ds, output)


def _zero_bbox() -> dict:
    return {"min_lat": 0.0, "max_lat": 0.0, "min_lon": 0.0, "max_lon": 0.0}
