"""Core datatypes shared by every module.

All containers are immutable dataclasses. Coordinates are WGS84 decimal
degrees unless a dataset is flagged ``normalized``, in which case they live in
the affine space defined by its ``NormalizationParams``.

Attributes on points (``attrs``) carry optional categorical side channels
(``hour``, ``day``, ``category``); geometry code ignores them.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Optional, Tuple

import numpy as np

ATTR_KEYS = ("hour", "day", "category")

VALID_NORM_VARIANTS = ("minmax", "paper_verbatim")


def _frozen_attrs(attrs: Optional[Mapping[str, int]]) -> Optional[Mapping[str, int]]:
    if attrs is None:
        return None
    unknown = set(attrs) - set(ATTR_KEYS)
    if unknown:
        raise ValueError(f"unknown attr keys {sorted(unknown)}; allowed: {ATTR_KEYS}")
    return MappingProxyType(dict(attrs))


@dataclass(frozen=True)
class GeoPoint:
    """One location fix.

    Attributes:
        lat: latitude, decimal degrees in [-90, 90] (or normalized units).
        lon: longitude, decimal degrees in [-180, 180] (or normalized units).
        t: epoch seconds (UTC), optional.
        attrs: optional categorical side channels (hour/day/category).
    """

    lat: float
    lon: float
    t: Optional[float] = None
    attrs: Optional[Mapping[str, int]] = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.lat) or not np.isfinite(self.lon):
            raise ValueError("GeoPoint coordinates must be finite")
        object.__setattr__(self, "attrs", _frozen_attrs(self.attrs))

    def validate_geographic(self) -> None:
        """Check decimal-degree bounds; only meaningful on unnormalized data."""
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class Trajectory:
    """An ordered sequence of fixes for one moving object.

    Invariants: at least one point; timestamps are either present on every
    point or on none, and non-decreasing when present.
    """

    traj_id: str
    user_id: str
    points: Tuple[GeoPoint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) == 0:
            raise ValueError(f"trajectory {self.traj_id!r} has no points")
        stamped = [p.t is not None for p in self.points]
        if any(stamped) and not all(stamped):
            raise ValueError(
                f"trajectory {self.traj_id!r} mixes timestamped and unstamped points"
            )
        if all(stamped):
            ts = [p.t for p in self.points]
            if any(b < a for a, b in zip(ts, ts[1:])):
                raise ValueError(f"trajectory {self.traj_id!r} timestamps decrease")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def has_timestamps(self) -> bool:
        return self.points[0].t is not None

    def coords(self) -> np.ndarray:
        """(n, 2) float array of (lat, lon) rows."""
        return np.array([(p.lat, p.lon) for p in self.points], dtype=float)

    def times(self) -> np.ndarray:
        if not self.has_timestamps:
            raise ValueError(f"trajectory {self.traj_id!r} has no timestamps")
        return np.array([p.t for p in self.points], dtype=float)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned geographic extent, min strictly below max on both axes."""

    min_lat: float
    max_lat: float
    min_lon: float
    max_lon: float

    def __post_init__(self) -> None:
        if not (self.min_lat < self.max_lat and self.min_lon < self.max_lon):
            raise ValueError(
                f"degenerate bounding box: lat [{self.min_lat}, {self.max_lat}], "
                f"lon [{self.min_lon}, {self.max_lon}]"
            )

    def contains(self, lat: float, lon: float) -> bool:
        return (
            self.min_lat <= lat <= self.max_lat
            and self.min_lon <= lon <= self.max_lon
        )

    @property
    def lat_span(self) -> float:
        return self.max_lat - self.min_lat

    @property
    def lon_span(self) -> float:
        return self.max_lon - self.min_lon


# Beijing fifth-ring study area, the usual Geolife crop.
BEIJING_5TH_RING = BoundingBox(39.76, 40.03, 116.20, 116.55)


@dataclass(frozen=True)
class NormalizationParams:
    """Affine map (x - ref) / sf applied per coordinate axis.

    ``variant`` records which convention produced the parameters:
    ``minmax`` (ref = extent midpoint, sf = half range, image is [-1, 1]) or
    ``paper_verbatim`` (ref = half the extent width, sf = max - ref).
    """

    ref_lon: float
    ref_lat: float
    sf_lon: float
    sf_lat: float
    variant: str

    def __post_init__(self) -> None:
        if self.variant not in VALID_NORM_VARIANTS:
            raise ValueError(
                f"unknown normalization variant {self.variant!r}; "
                f"expected one of {VALID_NORM_VARIANTS}"
            )
        if not (self.sf_lon > 0 and self.sf_lat > 0):
            raise ValueError(
                f"scale factors must be strictly positive, got "
                f"sf_lon={self.sf_lon}, sf_lat={self.sf_lat}"
            )


@dataclass(frozen=True)
class TrajectoryDataset:
    """A trajectory corpus plus its spatial extent and normalization state."""

    trajectories: Tuple[Trajectory, ...]
    bbox: BoundingBox
    norm: Optional[NormalizationParams] = None
    normalized: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        if self.normalized and self.norm is None:
            raise ValueError("normalized dataset must carry its NormalizationParams")

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def n_points(self) -> int:
        return sum(len(t) for t in self.trajectories)

    def users(self) -> Tuple[str, ...]:
        seen = dict.fromkeys(t.user_id for t in self.trajectories)
        return tuple(seen)

    def all_coords(self) -> np.ndarray:
        """(N, 2) stacked (lat, lon) rows over every trajectory, input order."""
        if not self.trajectories:
            return np.empty((0, 2), dtype=float)
        return np.concatenate([t.coords() for t in self.trajectories], axis=0)


def dataset_from_trajectories(
    trajectories,
    bbox: Optional[BoundingBox] = None,
    norm: Optional[NormalizationParams] = None,
    normalized: bool = False,
) -> TrajectoryDataset:
    """Build a dataset, computing a tight bbox from the data when none given."""
    trajectories = tuple(trajectories)
    if bbox is None:
        if not trajectories:
            raise ValueError("cannot infer a bounding box from an empty dataset")
        coords = np.concatenate([t.coords() for t in trajectories], axis=0)
        lat_min, lon_min = coords.min(axis=0)
        lat_max, lon_max = coords.max(axis=0)
        # Pad degenerate extents so BoundingBox stays valid for single points.
        if lat_min == lat_max:
            lat_min, lat_max = lat_min - 1e-9, lat_max + 1e-9
        if lon_min == lon_max:
            lon_min, lon_max = lon_min - 1e-9, lon_max + 1e-9
        bbox = BoundingBox(float(lat_min), float(lat_max), float(lon_min), float(lon_max))
    return TrajectoryDataset(trajectories, bbox, norm=norm, normalized=normalized)
