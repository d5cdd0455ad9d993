"""Loaders for raw corpora and the canonical interchange format."""

from trajbench.ingest.canonical import (
    CANONICAL_HEADER,
    read_canonical,
    sidecar_path,
    write_canonical,
)
from trajbench.ingest.fs import load_fs
from trajbench.ingest.geolife import load_geolife
from trajbench.ingest.mnist_seq import (
    SequenceDataset,
    load_mnist_idx,
    write_idx_images,
    write_idx_labels,
)

__all__ = [
    "CANONICAL_HEADER",
    "SequenceDataset",
    "load_fs",
    "load_geolife",
    "load_mnist_idx",
    "read_canonical",
    "sidecar_path",
    "write_canonical",
    "write_idx_images",
    "write_idx_labels",
]
