"""Spatial grid and 2-D histogram: binning, edges, flat order, caps."""

import numpy as np
import pytest

from trajbench.core.types import BoundingBox
from trajbench.metrics.grid import (
    GridSpec,
    Histogram2D,
    histogram_from_dataset,
    histogram_from_points,
)

from conftest import random_dataset

BOX = BoundingBox(min_lat=0.0, max_lat=4.0, min_lon=0.0, max_lon=8.0)


def test_cell_of_interior():
    g = GridSpec(BOX, nx=8, ny=4)  # 1 degree cells both axes
    assert g.cell_of(lat=0.5, lon=0.5) == (0, 0)
    assert g.cell_of(lat=3.5, lon=7.5) == (7, 3)
    assert g.cell_of(lat=1.5, lon=6.5) == (6, 1)


def test_max_edges_inclusive_min_edges_start_bin_zero():
    g = GridSpec(BOX, nx=8, ny=4)
    assert g.cell_of(lat=0.0, lon=0.0) == (0, 0)
    # points on the max edge belong to the last bin, not a phantom one
    assert g.cell_of(lat=4.0, lon=8.0) == (7, 3)
    assert g.cell_of(lat=4.0, lon=0.0) == (0, 3)


def test_outside_is_none():
    g = GridSpec(BOX, nx=8, ny=4)
    assert g.cell_of(lat=-0.1, lon=1.0) is None
    assert g.cell_of(lat=1.0, lon=8.1) is None


def test_flat_index_is_row_major_in_ix():
    g = GridSpec(BOX, nx=8, ny=4)
    assert g.flat_index(0, 0) == 0
    assert g.flat_index(0, 3) == 3
    assert g.flat_index(1, 0) == 4
    assert g.flat_index(7, 3) == 31


def test_cell_cap_enforced():
    with pytest.raises(ValueError, match="cell cap"):
        GridSpec(BOX, nx=2000, ny=2000, cell_cap=1_000_000)
    GridSpec(BOX, nx=1000, ny=1000, cell_cap=1_000_000)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(BOX, nx=0, ny=4)
    with pytest.raises(ValueError):
        GridSpec(BOX, nx=4, ny=-1)


def test_histogram_matches_per_point_binning():
    rng = np.random.default_rng(3)
    pts = np.column_stack(
        [rng.uniform(-1.0, 5.0, 500), rng.uniform(-1.0, 9.0, 500)]
    )  # lat, lon with some outside
    g = GridSpec(BOX, nx=8, ny=4)
    h = histogram_from_points(pts, g)

    expect = np.zeros((8, 4), dtype=np.int64)
    dropped = 0
    for lat, lon in pts:
        cell = g.cell_of(lat=lat, lon=lon)
        if cell is None:
            dropped += 1
        else:
            expect[cell] += 1
    np.testing.assert_array_equal(h.counts, expect)
    assert h.total == 500 - dropped
    assert dropped > 0  # the fixture must actually exercise the drop path


def test_probabilities_sum_to_one():
    g = GridSpec(BOX, nx=2, ny=2)
    h = Histogram2D(g, np.array([[3, 1], [0, 4]]))
    p = h.probabilities()
    assert p.shape == (2, 2)
    assert p.sum() == pytest.approx(1.0)
    assert p[0, 0] == pytest.approx(3 / 8)


def test_empty_histogram_probabilities_rejected():
    g = GridSpec(BOX, nx=2, ny=2)
    h = Histogram2D(g, np.zeros((2, 2), dtype=np.int64))
    assert h.total == 0
    with pytest.raises(ValueError, match="empty"):
        h.probabilities()


def test_negative_counts_rejected():
    g = GridSpec(BOX, nx=2, ny=2)
    with pytest.raises(ValueError):
        Histogram2D(g, np.array([[1, -1], [0, 0]]))


def test_histogram_from_dataset_counts_all_points():
    ds = random_dataset(11)
    g = GridSpec(ds.bbox, nx=16, ny=16)
    h = histogram_from_dataset(ds, g)
    assert h.total == ds.n_points
