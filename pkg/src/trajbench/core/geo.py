"""Geodesy primitives: haversine distance and small-area planar projections.

The Earth is treated as a sphere of mean radius 6 371 000 m throughout the
toolkit; every distance in meters derives from that single constant.
"""

from __future__ import annotations

import numpy as np

from trajbench.core.types import GeoPoint

EARTH_RADIUS_M = 6_371_000.0

_DEG = np.pi / 180.0


def haversine_m(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters; accepts scalars or broadcastable arrays."""
    phi1 = np.multiply(lat1, _DEG)
    phi2 = np.multiply(lat2, _DEG)
    dphi = np.multiply(np.subtract(lat2, lat1), _DEG)
    dlam = np.multiply(np.subtract(lon2, lon1), _DEG)
    a = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2.0) ** 2
    # clip guards the sqrt against eps-above-1 rounding on antipodal inputs
    c = 2.0 * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))
    return EARTH_RADIUS_M * c


def haversine(p1: GeoPoint, p2: GeoPoint) -> float:
    """Great-circle distance between two fixes, meters."""
    return float(haversine_m(p1.lat, p1.lon, p2.lat, p2.lon))


def euclidean_m(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Plain Euclidean distance between (…, 2) coordinate rows."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return np.sqrt((d * d).sum(axis=-1))


def pairwise_distances(A: np.ndarray, B: np.ndarray, metric: str) -> np.ndarray:
    """(|A|, |B|) distance matrix between (lat, lon) row sets.

    metric: "haversine" (meters) or "euclidean" (raw coordinate units).
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if metric == "haversine":
        return haversine_m(
            A[:, 0:1], A[:, 1:2], B[np.newaxis, :, 0], B[np.newaxis, :, 1]
        ).reshape(len(A), len(B))
    if metric == "euclidean":
        return euclidean_m(A[:, np.newaxis, :], B[np.newaxis, :, :])
    raise ValueError(f"unknown metric {metric!r}; expected 'haversine' or 'euclidean'")


def meters_per_degree(lat_deg: float) -> tuple[float, float]:
    """(meters per degree latitude, meters per degree longitude) at a latitude.

    Local equirectangular approximation; adequate for city-scale extents away
    from the poles.
    """
    if not -90.0 < lat_deg < 90.0:
        raise ValueError(f"longitude scale degenerate at latitude {lat_deg}")
    m_lat = EARTH_RADIUS_M * _DEG
    m_lon = EARTH_RADIUS_M * _DEG * np.cos(lat_deg * _DEG)
    return float(m_lat), float(m_lon)


def project_equirectangular(coords: np.ndarray, lat0: float | None = None) -> np.ndarray:
    """Map (lat, lon) rows to planar (x, y) meters around a reference latitude.

    x grows eastward, y northward. lat0 defaults to the mean latitude of the
    input, which keeps distances locally consistent with haversine.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.size == 0:
        return coords.reshape(0, 2)
    if lat0 is None:
        lat0 = float(coords[:, 0].mean())
    m_lat, m_lon = meters_per_degree(lat0)
    out = np.empty_like(coords)
    out[:, 0] = coords[:, 1] * m_lon  # x from lon
    out[:, 1] = coords[:, 0] * m_lat  # y from lat
    return out
