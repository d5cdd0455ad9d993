"""Spatial grid discretization and 2-D histograms.

Cells are indexed (ix, iy) with ix binning longitude and iy latitude; the
flat cell index is ``ix * ny + iy`` (C order), which is also the tie-break
order used by the hotspot metrics. Points outside the grid's bounding box are
dropped from histograms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from trajbench.core.types import BoundingBox, TrajectoryDataset

DEFAULT_CELL_CAP = 1_000_000


@dataclass(frozen=True)
class GridSpec:
    """A uniform nx-by-ny partition of a bounding box."""

    bbox: BoundingBox
    nx: int
    ny: int
    cell_cap: int = DEFAULT_CELL_CAP

    def __post_init__(self) -> None:
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"grid must have at least one cell per axis, got {self.nx}x{self.ny}")
        if self.nx * self.ny > self.cell_cap:
            raise ValueError(
                f"grid {self.nx}x{self.ny} exceeds the cell cap {self.cell_cap}"
            )

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    def cell_of(self, lat: float, lon: float) -> Optional[Tuple[int, int]]:
        """(ix, iy) of the containing cell, None when outside; max edges inclusive."""
        b = self.bbox
        if not b.contains(lat, lon):
            return None
        ix = int((lon - b.min_lon) / b.lon_span * self.nx)
        iy = int((lat - b.min_lat) / b.lat_span * self.ny)
        return min(ix, self.nx - 1), min(iy, self.ny - 1)

    def flat_index(self, ix: int, iy: int) -> int:
        return ix * self.ny + iy


@dataclass(frozen=True)
class Histogram2D:
    """Non-negative integer counts per grid cell, shape (nx, ny)."""

    grid: GridSpec
    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts)
        if counts.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"counts shape {counts.shape} != grid shape "
                f"({self.grid.nx}, {self.grid.ny})"
            )
        if not np.issubdtype(counts.dtype, np.integer):
            raise ValueError("histogram counts must be integers")
        if (counts < 0).any():
            raise ValueError("histogram counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def probabilities(self) -> np.ndarray:
        if self.total == 0:
            raise ValueError("cannot normalize an empty histogram")
        return self.counts / self.total


def histogram_from_points(coords: np.ndarray, grid: GridSpec) -> Histogram2D:
    """Bin (lat, lon) rows into the grid; out-of-bbox rows are dropped."""
    coords = np.asarray(coords, dtype=float)
    counts = np.zeros((grid.nx, grid.ny), dtype=np.int64)
    if coords.size:
        b = grid.bbox
        lat, lon = coords[:, 0], coords[:, 1]
        inside = (
            (lat >= b.min_lat) & (lat <= b.max_lat)
            & (lon >= b.min_lon) & (lon <= b.max_lon)
        )
        lat, lon = lat[inside], lon[inside]
        ix = np.minimum(
            ((lon - b.min_lon) / b.lon_span * grid.nx).astype(np.int64), grid.nx - 1
        )
        iy = np.minimum(
            ((lat - b.min_lat) / b.lat_span * grid.ny).astype(np.int64), grid.ny - 1
        )
        np.add.at(counts, (ix, iy), 1)
    return Histogram2D(grid=grid, counts=counts)


def histogram_from_dataset(ds: TrajectoryDataset, grid: GridSpec) -> Histogram2D:
    return histogram_from_points(ds.all_coords(), grid)
