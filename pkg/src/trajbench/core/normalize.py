"""Coordinate normalization for model-facing pipelines.

Two conventions are supported:

``minmax``
    ref = extent midpoint, sf = half range. Maps the data extent onto
    [-1, 1] on each axis. The default.

``paper_verbatim``
    ref = (max - min) / 2 and sf = max - ref, per the formula that circulates
    in the generative-trajectory literature. It coincides with ``minmax``
    only when the minimum coordinate is 0 and produces a non-positive scale
    factor on, e.g., west-longitude data; such inputs are rejected rather
    than silently mis-scaled.
"""

from __future__ import annotations

from typing import Optional

from trajbench.core.types import (
    BoundingBox,
    GeoPoint,
    NormalizationParams,
    Trajectory,
    TrajectoryDataset,
)


def _extent(ds: TrajectoryDataset) -> tuple[float, float, float, float]:
    coords = ds.all_coords()
    if coords.size == 0:
        raise ValueError("cannot normalize an empty dataset")
    lat_min, lon_min = coords.min(axis=0)
    lat_max, lon_max = coords.max(axis=0)
    return float(lat_min), float(lat_max), float(lon_min), float(lon_max)


def compute_normalization(
    ds: TrajectoryDataset, variant: str = "minmax"
) -> NormalizationParams:
    """Derive normalization parameters from the dataset's coordinate extent."""
    lat_min, lat_max, lon_min, lon_max = _extent(ds)
    if lat_min == lat_max or lon_min == lon_max:
        raise ValueError(
            "degenerate extent: normalization needs spread on both axes "
            f"(lat [{lat_min}, {lat_max}], lon [{lon_min}, {lon_max}])"
        )
    if variant == "minmax":
        ref_lon = (lon_max + lon_min) / 2.0
        ref_lat = (lat_max + lat_min) / 2.0
        sf_lon = (lon_max - lon_min) / 2.0
        sf_lat = (lat_max - lat_min) / 2.0
    elif variant == "paper_verbatim":
        ref_lon = (lon_max - lon_min) / 2.0
        ref_lat = (lat_max - lat_min) / 2.0
        sf_lon = lon_max - ref_lon
        sf_lat = lat_max - ref_lat
        if sf_lon <= 0 or sf_lat <= 0:
            raise ValueError(
                "paper_verbatim normalization yields a non-positive scale factor "
                f"on this extent (sf_lon={sf_lon}, sf_lat={sf_lat}); "
                "use variant='minmax'"
            )
    else:
        raise ValueError(f"unknown normalization variant {variant!r}")
    return NormalizationParams(
        ref_lon=ref_lon, ref_lat=ref_lat, sf_lon=sf_lon, sf_lat=sf_lat, variant=variant
    )


def _map_point(p: GeoPoint, params: NormalizationParams, forward: bool) -> GeoPoint:
    if forward:
        lat = (p.lat - params.ref_lat) / params.sf_lat
        lon = (p.lon - params.ref_lon) / params.sf_lon
    else:
        lat = p.lat * params.sf_lat + params.ref_lat
        lon = p.lon * params.sf_lon + params.ref_lon
    return GeoPoint(lat=lat, lon=lon, t=p.t, attrs=p.attrs)


def _map_bbox(bbox: BoundingBox, params: NormalizationParams, forward: bool) -> BoundingBox:
    if forward:
        lats = [(v - params.ref_lat) / params.sf_lat for v in (bbox.min_lat, bbox.max_lat)]
        lons = [(v - params.ref_lon) / params.sf_lon for v in (bbox.min_lon, bbox.max_lon)]
    else:
        lats = [v * params.sf_lat + params.ref_lat for v in (bbox.min_lat, bbox.max_lat)]
        lons = [v * params.sf_lon + params.ref_lon for v in (bbox.min_lon, bbox.max_lon)]
    return BoundingBox(min(lats), max(lats), min(lons), max(lons))


def _map_dataset(ds: TrajectoryDataset, params: NormalizationParams, forward: bool):
    trajs = tuple(
        Trajectory(
            traj_id=t.traj_id,
            user_id=t.user_id,
            points=tuple(_map_point(p, params, forward) for p in t.points),
        )
        for t in ds.trajectories
    )
    return trajs, _map_bbox(ds.bbox, params, forward)


def normalize(ds: TrajectoryDataset, params: NormalizationParams) -> TrajectoryDataset:
    """Apply (x - ref) / sf per axis; timestamps and attrs pass through."""
    if ds.normalized:
        raise ValueError("dataset is already normalized")
    trajs, bbox = _map_dataset(ds, params, forward=True)
    return TrajectoryDataset(trajs, bbox, norm=params, normalized=True)


def denormalize(
    ds: TrajectoryDataset, params: Optional[NormalizationParams] = None
) -> TrajectoryDataset:
    """Invert ``normalize``; params default to the ones stored on the dataset."""
    if not ds.normalized:
        raise ValueError("dataset is not normalized")
    if params is None:
        params = ds.norm
    if params is None:
        raise ValueError("no normalization params available to invert")
    trajs, bbox = _map_dataset(ds, params, forward=False)
    return TrajectoryDataset(trajs, bbox, norm=params, normalized=False)
