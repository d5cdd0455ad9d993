import numpy as np
import pytest

from trajbench.core.types import (
    BoundingBox,
    GeoPoint,
    NormalizationParams,
    Trajectory,
    TrajectoryDataset,
    dataset_from_trajectories,
)

from conftest import make_traj


def test_geopoint_rejects_non_finite():
    with pytest.raises(ValueError):
        GeoPoint(lat=float("nan"), lon=0.0)
    with pytest.raises(ValueError):
        GeoPoint(lat=0.0, lon=float("inf"))


def test_geopoint_geographic_bounds():
    GeoPoint(lat=90.0, lon=-180.0).validate_geographic()
    with pytest.raises(ValueError):
        GeoPoint(lat=90.5, lon=0.0).validate_geographic()
    with pytest.raises(ValueError):
        GeoPoint(lat=0.0, lon=181.0).validate_geographic()


def test_geopoint_attrs_frozen_and_validated():
    p = GeoPoint(lat=1.0, lon=2.0, attrs={"hour": 3})
    with pytest.raises(TypeError):
        p.attrs["hour"] = 4
    with pytest.raises(ValueError):
        GeoPoint(lat=1.0, lon=2.0, attrs={"bogus": 1})


def test_trajectory_needs_points():
    with pytest.raises(ValueError):
        Trajectory("t", "u", ())


def test_trajectory_timestamps_all_or_none():
    good = Trajectory("t", "u", (GeoPoint(0, 0, t=0.0), GeoPoint(0, 1, t=5.0)))
    assert good.has_timestamps
    with pytest.raises(ValueError):
        Trajectory("t", "u", (GeoPoint(0, 0, t=0.0), GeoPoint(0, 1)))


def test_trajectory_timestamps_must_not_decrease():
    with pytest.raises(ValueError):
        Trajectory("t", "u", (GeoPoint(0, 0, t=5.0), GeoPoint(0, 1, t=0.0)))
    # equal stamps are tolerated at the type level; resampling dedups them
    Trajectory("t", "u", (GeoPoint(0, 0, t=5.0), GeoPoint(0, 1, t=5.0)))


def test_trajectory_coords_shape_and_order():
    t = make_traj([(1.0, 2.0), (3.0, 4.0)])
    np.testing.assert_array_equal(t.coords(), [[1.0, 2.0], [3.0, 4.0]])


def test_bbox_rejects_degenerate():
    with pytest.raises(ValueError):
        BoundingBox(1.0, 1.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        BoundingBox(0.0, 1.0, 2.0, 2.0)
    b = BoundingBox(0.0, 1.0, 0.0, 2.0)
    assert b.contains(0.0, 0.0) and b.contains(1.0, 2.0)
    assert not b.contains(1.0001, 0.0)


def test_normalization_params_validate():
    with pytest.raises(ValueError):
        NormalizationParams(0, 0, 1.0, 0.0, "minmax")
    with pytest.raises(ValueError):
        NormalizationParams(0, 0, -1.0, 1.0, "minmax")
    with pytest.raises(ValueError):
        NormalizationParams(0, 0, 1.0, 1.0, "bogus")


def test_normalized_dataset_needs_params():
    t = make_traj([(0.5, 0.5)])
    with pytest.raises(ValueError):
        TrajectoryDataset((t,), BoundingBox(0, 1, 0, 1), norm=None, normalized=True)


def test_dataset_helpers():
    ds = dataset_from_trajectories(
        [make_traj([(0.0, 0.0), (1.0, 1.0)], "a", "u1"), make_traj([(0.5, 0.5)], "b", "u2")]
    )
    assert len(ds) == 2
    assert ds.n_points == 3
    assert ds.users() == ("u1", "u2")
    assert ds.all_coords().shape == (3, 2)
    # inferred bbox is tight
    assert ds.bbox.min_lat == 0.0 and ds.bbox.max_lat == 1.0


def test_inferred_bbox_pads_single_point():
    ds = dataset_from_trajectories([make_traj([(0.5, 0.5)])])
    assert ds.bbox.contains(0.5, 0.5)
