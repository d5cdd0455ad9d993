"""Row-sequence view of MNIST-style idx image files.

A 28x28 image becomes a length-28 sequence whose step t is row t, a 28-vector
scaled to [0, 1]. Sequences flow through ``SequenceDataset``, a fixed-shape
container kept deliberately separate from the geographic types.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

IDX_IMAGES_MAGIC = 2051
IDX_LABELS_MAGIC = 2049


@dataclass(frozen=True)
class SequenceDataset:
    """(n, steps, features) float sequences in [0, 1], optionally labelled."""

    data: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim != 3:
            raise ValueError(f"expected (n, steps, features), got shape {data.shape}")
        if data.size and (not np.isfinite(data).all() or data.min() < 0 or data.max() > 1):
            raise ValueError("sequence values must be finite and within [0, 1]")
        object.__setattr__(self, "data", data)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (data.shape[0],):
                raise ValueError(
                    f"labels shape {labels.shape} does not match n={data.shape[0]}"
                )
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.data.shape[0])

    @property
    def shape(self) -> Tuple[int, int, int]:
        return tuple(self.data.shape)  # type: ignore[return-value]


def _read_idx(path: Path, magic_expected: int, ndim: int) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < 4 * (1 + ndim):
        raise ValueError(f"{path}: truncated idx header")
    magic = struct.unpack(">i", raw[:4])[0]
    if magic != magic_expected:
        raise ValueError(f"{path}: bad idx magic {magic}, expected {magic_expected}")
    dims = struct.unpack(f">{ndim}i", raw[4 : 4 + 4 * ndim])
    data = np.frombuffer(raw, dtype=np.uint8, offset=4 + 4 * ndim)
    expected = int(np.prod(dims))
    if data.size != expected:
        raise ValueError(f"{path}: payload size {data.size} != header size {expected}")
    return data.reshape(dims)


def load_mnist_idx(
    images_path: Union[str, Path], labels_path: Optional[Union[str, Path]] = None
) -> SequenceDataset:
    """Load idx-format images (and labels) as row sequences scaled to [0, 1]."""
    images = _read_idx(Path(images_path), IDX_IMAGES_MAGIC, ndim=3)
    data = images.astype(np.float32) / 255.0
    labels = None
    if labels_path is not None:
        labels = _read_idx(Path(labels_path), IDX_LABELS_MAGIC, ndim=1)
        if labels.shape[0] != data.shape[0]:
            raise ValueError(
                f"label count {labels.shape[0]} != image count {data.shape[0]}"
            )
    return SequenceDataset(data=data, labels=labels)


def write_idx_images(path: Union[str, Path], images: np.ndarray) -> Path:
    """Write uint8 images (n, rows, cols) in idx format. Fixture utility."""
    images = np.ascontiguousarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError(f"expected (n, rows, cols), got {images.shape}")
    path = Path(path)
    with path.open("wb") as f:
        f.write(struct.pack(">i", IDX_IMAGES_MAGIC))
        f.write(struct.pack(">3i", *images.shape))
        f.write(images.tobytes())
    return path


def write_idx_labels(path: Union[str, Path], labels: np.ndarray) -> Path:
    """Write uint8 labels (n,) in idx format. Fixture utility."""
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise ValueError(f"expected (n,), got {labels.shape}")
    path = Path(path)
    with path.open("wb") as f:
        f.write(struct.pack(">i", IDX_LABELS_MAGIC))
        f.write(struct.pack(">i", labels.shape[0]))
        f.write(labels.tobytes())
    return path
