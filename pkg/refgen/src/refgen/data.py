"""Canonical-format I/O and tensor encodings.

The interchange format is one CSV with the exact header

    traj_id,user_id,seq,lat,lon,t,hour,day,category

plus a JSON sidecar at ``<path>.meta.json`` holding bbox, norm and the
normalized flag. This module implements the format independently so the
package has no import-time coupling to the harness that consumes its output.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

CANONICAL_HEADER = [
    "traj_id",
    "user_id",
    "seq",
    "lat",
    "lon",
    "t",
    "hour",
    "day",
    "category",
]

ATTR_NAMES = ("hour", "day", "category")
ATTR_CARDINALITY = {"hour": 24, "day": 7}


@dataclass
class SeqTrajectory:
    """One trajectory as arrays: coords (n, 2) as (lat, lon) plus optional
    per-point timestamps and integer attribute columns."""

    traj_id: str
    user_id: str
    coords: np.ndarray
    t: Optional[np.ndarray] = None
    attrs: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.coords = np.asarray(self.coords, dtype=float)
        if self.coords.ndim != 2 or self.coords.shape[1] != 2 or len(self.coords) == 0:
            raise ValueError(f"coords must be a non-empty (n, 2) array, got {self.coords.shape}")
        if self.t is not None:
            self.t = np.asarray(self.t, dtype=float)
            if self.t.shape != (len(self.coords),):
                raise ValueError("t must align with coords")
        for name, col in self.attrs.items():
            self.attrs[name] = np.asarray(col, dtype=int)
            if self.attrs[name].shape != (len(self.coords),):
                raise ValueError(f"attr {name!r} must align with coords")

    def __len__(self) -> int:
        return len(self.coords)


@dataclass
class SeqDataset:
    trajectories: List[SeqTrajectory]
    bbox: Dict[str, float]
    norm: Optional[Dict[str, Union[str, float]]] = None
    normalized: bool = False

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def n_points(self) -> int:
        return sum(len(t) for t in self.trajectories)

    def all_coords(self) -> np.ndarray:
        if not self.trajectories:
            return np.zeros((0, 2))
        return np.concatenate([t.coords for t in self.trajectories])

    def attr_names(self) -> Tuple[str, ...]:
        if not self.trajectories:
            return ()
        return tuple(
            name for name in ATTR_NAMES if all(name in t.attrs for t in self.trajectories)
        )


def sidecar_path(path: Union[str, Path]) -> Path:
    return Path(str(path) + ".meta.json")


def _fmt_coord(x: float, min_frac: int = 7) -> str:
    # shortest lossless decimal, padded to the format's minimum precision
    s = repr(float(x))
    if "e" in s or "E" in s:
        s = format(Decimal(s), "f")
    if "." not in s:
        s += "."
    head, frac = s.split(".", 1)
    if len(frac) < min_frac:
        frac += "0" * (min_frac - len(frac))
    return f"{head}.{frac}"


def _bbox_of(trajectories: Sequence[SeqTrajectory]) -> Dict[str, float]:
    if not trajectories:
        return {"min_lat": 0.0, "max_lat": 0.0, "min_lon": 0.0, "max_lon": 0.0}
    coords = np.concatenate([t.coords for t in trajectories])
    return {
        "min_lat": float(coords[:, 0].min()),
        "max_lat": float(coords[:, 0].max()),
        "min_lon": float(coords[:, 1].min()),
        "max_lon": float(coords[:, 1].max()),
    }


def write_canonical(ds: SeqDataset, path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CANONICAL_HEADER)
        for traj in ds.trajectories:
            for seq in range(len(traj)):
                t = ""
                if traj.t is not None:
                    tv = float(traj.t[seq])
                    t = str(int(tv)) if tv.is_integer() else repr(tv)
                row = [
                    traj.traj_id,
                    traj.user_id,
                    seq,
                    _fmt_coord(traj.coords[seq, 0]),
                    _fmt_coord(traj.coords[seq, 1]),
                    t,
                ]
                for name in ATTR_NAMES:
                    row.append(int(traj.attrs[name][seq]) if name in traj.attrs else "")
                w.writerow(row)
    meta = {"bbox": ds.bbox, "norm": ds.norm, "normalized": ds.normalized}
    with sidecar_path(path).open("w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def read_canonical(path: Union[str, Path]) -> SeqDataset:
    path = Path(path)
    sp = sidecar_path(path)
    if not sp.exists():
        raise FileNotFoundError(f"sidecar {sp} not found; refusing to guess metadata")
    with sp.open() as f:
        meta = json.load(f)
    for key in ("bbox", "norm", "normalized"):
        if key not in meta:
            raise ValueError(f"sidecar {sp} missing key {key!r}")

    order: List[str] = []
    rows: Dict[str, list] = {}
    with path.open(newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CANONICAL_HEADER:
            raise ValueError(f"{path}: bad canonical header {header!r}")
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(CANONICAL_HEADER):
                raise ValueError(f"{path} row {row_no}: expected {len(CANONICAL_HEADER)} fields")
            tid = row[0]
            if tid not in rows:
                rows[tid] = []
                order.append(tid)
            rows[tid].append((row_no, row))

    trajectories = []
    for tid in order:
        recs = rows[tid]
        users = {r[1] for _, r in recs}
        if len(users) != 1:
            raise ValueError(f"trajectory {tid!r} spans users {sorted(users)}")
        seqs = [int(r[2]) for _, r in recs]
        if seqs != list(range(len(recs))):
            raise ValueError(f"trajectory {tid!r} seq column is not contiguous from 0")
        coords = np.array([[float(r[3]), float(r[4])] for _, r in recs])
        t_raw = [r[5] for _, r in recs]
        has_t = [s != "" for s in t_raw]
        if any(has_t) and not all(has_t):
            raise ValueError(f"trajectory {tid!r} has timestamps on some points only")
        t = np.array([float(s) for s in t_raw]) if all(has_t) else None
        attrs: Dict[str, np.ndarray] = {}
        for j, name in enumerate(ATTR_NAMES, start=6):
            col = [r[j] for _, r in recs]
            present = [s != "" for s in col]
            if any(present) and not all(present):
                raise ValueError(f"trajectory {tid!r} attr {name!r} is partially present")
            if all(present):
                vals = np.array([int(s) for s in col])
                k = ATTR_CARDINALITY.get(name)
                if k is not None and ((vals < 0) | (vals >= k)).any():
                    raise ValueError(f"trajectory {tid!r}: {name} outside [0, {k})")
                if name == "category" and (vals < 0).any():
                    raise ValueError(f"trajectory {tid!r}: category must be non-negative")
                attrs[name] = vals
        trajectories.append(SeqTrajectory(tid, recs[0][1][1], coords, t, attrs))

    bbox = meta["bbox"]
    for traj in trajectories:
        lat, lon = traj.coords[:, 0], traj.coords[:, 1]
        if (
            (lat < bbox["min_lat"]).any()
            or (lat > bbox["max_lat"]).any()
            or (lon < bbox["min_lon"]).any()
            or (lon > bbox["max_lon"]).any()
        ):
            raise ValueError(f"trajectory {traj.traj_id!r} lies outside the sidecar bbox")

    return SeqDataset(trajectories, bbox, meta["norm"], bool(meta["normalized"]))


def dataset_from_trajectories(
    trajectories: Sequence[SeqTrajectory],
    norm: Optional[dict] = None,
    normalized: bool = False,
) -> SeqDataset:
    return SeqDataset(list(trajectories), _bbox_of(trajectories), norm, normalized)


# ---------------------------------------------------------------------------
# tensor encodings


@dataclass(frozen=True)
class ChannelSpec:
    name: str
    dim: int
    kind: str  # "continuous" | "categorical"

    def __post_init__(self) -> None:
        if self.kind not in ("continuous", "categorical"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError(f"channel dim must be positive, got {self.dim}")


def channels_for(
    attr_names: Sequence[str], category_k: int, mnist: bool = False
) -> Tuple[ChannelSpec, ...]:
    """Channel layout for a corpus: pixel rows for MNIST sequences, otherwise
    spatial plus whichever categorical attributes the data carries."""
    if mnist:
        return (ChannelSpec("pixels", 28, "continuous"),)
    chans = [ChannelSpec("spatial", 2, "continuous")]
    sizes = {"hour": 24, "day": 7, "category": category_k}
    for name in ("hour", "day", "category"):
        if name in attr_names:
            if sizes[name] < 1:
                raise ValueError(f"cannot size channel {name!r} from the data")
            chans.append(ChannelSpec(name, sizes[name], "categorical"))
    return tuple(chans)


def one_hot(values: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((len(values), k), dtype=np.float32)
    out[np.arange(len(values)), values] = 1.0
    return out


def category_cardinality(ds: SeqDataset) -> int:
    mx = 0
    for traj in ds.trajectories:
        if "category" in traj.attrs:
            mx = max(mx, int(traj.attrs["category"].max()) + 1)
    return mx


def encode_trajectory(traj: SeqTrajectory, channels: Sequence[ChannelSpec]) -> np.ndarray:
    """Concatenate the channels into one (len, D) float32 array.

    "spatial" contributes the raw (lat, lon) pair; categorical channels
    contribute one-hot blocks of their cardinality.
    """
    parts = []
    for ch in channels:
        if ch.name == "spatial":
            parts.append(traj.coords.astype(np.float32))
        else:
            if ch.name not in traj.attrs:
                raise ValueError(f"trajectory {traj.traj_id!r} lacks attr {ch.name!r}")
            parts.append(one_hot(traj.attrs[ch.name], ch.dim))
    return np.concatenate(parts, axis=1)


@dataclass
class Corpus:
    """Model-facing view of a dataset: encoded sequences plus the metadata a
    checkpoint must carry to export generations back to canonical form."""

    sequences: List[np.ndarray]
    channels: Tuple[ChannelSpec, ...]
    norm: Optional[dict]
    normalized: bool
    mnist: bool = False

    def __post_init__(self) -> None:
        if not self.sequences:
            raise ValueError("corpus must contain at least one sequence")
        dim = sum(ch.dim for ch in self.channels)
        for s in self.sequences:
            if s.ndim != 2 or s.shape[1] != dim:
                raise ValueError(f"sequence shape {s.shape} does not match channel width {dim}")

    @property
    def feature_dim(self) -> int:
        return sum(ch.dim for ch in self.channels)

    @property
    def lengths(self) -> List[int]:
        return [len(s) for s in self.sequences]

    @property
    def start_points(self) -> np.ndarray:
        return np.stack([s[0] for s in self.sequences])


def corpus_from_dataset(ds: SeqDataset, spatial_only: bool = False) -> Corpus:
    """Encode a canonical dataset. spatial_only drops categorical channels,
    which is the feature space the regression baselines work in."""
    if spatial_only:
        channels = (ChannelSpec("spatial", 2, "continuous"),)
    else:
        channels = channels_for(ds.attr_names(), category_cardinality(ds))
    seqs = [encode_trajectory(t, channels) for t in ds.trajectories]
    return Corpus(seqs, channels, ds.norm, ds.normalized)


def corpus_from_mnist(images: np.ndarray) -> Corpus:
    """Rows become time steps; the corpus is marked so exports project the
    first two columns as coordinates in an identity frame."""
    images = np.asarray(images, dtype=np.float32)
    if images.ndim != 3 or images.shape[1:] != (28, 28):
        raise ValueError(f"expected (n, 28, 28) images, got {images.shape}")
    identity = {"ref_lat": 0.0, "ref_lon": 0.0, "sf_lat": 1.0, "sf_lon": 1.0, "variant": "minmax"}
    return Corpus(
        [img for img in images],
        channels_for((), 0, mnist=True),
        identity,
        True,
        mnist=True,
    )


def pad_batch(arrays: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Stack variable-length (len_i, D) arrays into (B, T, D) zero-padded
    plus the vector of true lengths."""
    lengths = np.array([len(a) for a in arrays], dtype=np.int64)
    t_max = int(lengths.max())
    dim = arrays[0].shape[1]
    out = np.zeros((len(arrays), t_max, dim), dtype=np.float32)
    for i, a in enumerate(arrays):
        out[i, : len(a)] = a
    return out, lengths


def batches(n: int, batch_size: int, rng: np.random.Generator):
    """Shuffled index batches covering range(n) once."""
    idx = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield idx[start : start + batch_size]


# ---------------------------------------------------------------------------
# MNIST-style sequence corpora


def read_idx_images(path: Union[str, Path]) -> np.ndarray:
    """Parse an idx3 image file into (n, rows, cols) floats in [0, 1]."""
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise ValueError(f"{path}: truncated idx header")
    magic, n, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != 2051:
        raise ValueError(f"{path}: bad idx image magic {magic}")
    payload = raw[16:]
    if len(payload) != n * rows * cols:
        raise ValueError(f"{path}: payload size mismatch")
    data = np.frombuffer(payload, dtype=np.uint8).reshape(n, rows, cols)
    return data.astype(np.float32) / 255.0


def mnist_to_sequences(images: np.ndarray) -> List[np.ndarray]:
    """Rows become time steps: one (28, 28) float32 sequence per image."""
    return [img.astype(np.float32) for img in images]


def synthetic_mnist_seq(n: int, seed: int = 0) -> np.ndarray:
    """Deterministic digit-like (n, 28, 28) corpus in [0, 1].

    Each sample is a smooth blob-and-stroke composition; the top row is all
    zeros, matching the real corpus's shared black border row.
    """
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:28, 0:28]
    out = np.zeros((n, 28, 28), dtype=np.float32)
    for i in range(n):
        cx, cy = rng.uniform(9, 19, size=2)
        r = rng.uniform(4, 8)
        ring = np.exp(-((np.hypot(xs - cx, ys - cy) - r) ** 2) / 4.0)
        sx = rng.uniform(8, 20)
        stroke = np.exp(-((xs - sx) ** 2) / 3.0) * (ys > 6) * (ys < 24)
        img = np.clip(ring + 0.8 * stroke, 0.0, 1.0)
        img[0, :] = 0.0
        img[:, 0] = 0.0
        out[i] = img
    return out
