"""Point-set utility metrics.

The suite deliberately spans both sensitivity quadrants: Hausdorff reacts to
single outliers, Wasserstein to distributional mass, the gridded metrics
(JSD, range queries, hotspots) to aggregate structure. ``hd_wd_pathology_demo``
reproduces the standard illustration of why no single metric suffices.

Point sets are (n, 2) arrays of (lat, lon) rows; metric is "haversine"
(meters) or "euclidean" (raw coordinate units).
"""

from __future__ import annotations

import math
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from trajbench.core.geo import pairwise_distances, project_equirectangular
from trajbench.core.types import BoundingBox
from trajbench.metrics.grid import GridSpec, Histogram2D, histogram_from_points

EXACT_WASSERSTEIN_MAX_POINTS = 2000

_CHUNK = 4096


def _as_points(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) point array, got shape {A.shape}")
    if A.shape[0] == 0:
        raise ValueError("point set is empty")
    return A


def subsample_equal(
    A: np.ndarray, B: np.ndarray, seed: int = 0
) -> Tuple[np.ndarray, np.ndarray]:
    """Subsample the larger set (without replacement, seeded) to the smaller size."""
    A, B = _as_points(A), _as_points(B)
    n = min(len(A), len(B))
    rng = np.random.default_rng(seed)
    if len(A) > n:
        A = A[np.sort(rng.choice(len(A), size=n, replace=False))]
    if len(B) > n:
        B = B[np.sort(rng.choice(len(B), size=n, replace=False))]
    return A, B


def _directed_hausdorff(A: np.ndarray, B: np.ndarray, metric: str) -> float:
    """max over a of min over b d(a, b), exact.

    Early break: once a partial min falls to the running max or below, that
    source point cannot raise the max and the rest of B is skipped. The
    returned value is identical to the full scan's.
    """
    cmax = 0.0
    for i in range(len(A)):
        dmin = math.inf
        for j0 in range(0, len(B), _CHUNK):
            d = float(pairwise_distances(A[i : i + 1], B[j0 : j0 + _CHUNK], metric).min())
            if d < dmin:
                dmin = d
            if dmin <= cmax:
                break
        else:
            if dmin > cmax:
                cmax = dmin
    return cmax


def hausdorff_points(A, B, metric: str = "euclidean") -> float:
    """Symmetric Hausdorff distance between two point sets."""
    A, B = _as_points(A), _as_points(B)
    return max(_directed_hausdorff(A, B, metric), _directed_hausdorff(B, A, metric))


def _planar(A: np.ndarray, B: np.ndarray, units: str) -> Tuple[np.ndarray, np.ndarray]:
    if units == "euclidean":
        return A, B
    if units == "meters":
        lat0 = float(np.concatenate([A[:, 0], B[:, 0]]).mean())
        return project_equirectangular(A, lat0), project_equirectangular(B, lat0)
    raise ValueError(f"unknown units {units!r}; expected 'euclidean' or 'meters'")


def wasserstein(
    A,
    B,
    method: str = "sliced",
    n_proj: int = 100,
    seed: int = 0,
    units: str = "euclidean",
) -> float:
    """Wasserstein-1 distance between equal-size point sets.

    method "sliced": mean over ``n_proj`` seeded random directions of the 1-D
    distance between the projections (sort-based, exact per slice).
    method "exact_small": optimal assignment on the full cost matrix, mean
    matched distance; limited to ``EXACT_WASSERSTEIN_MAX_POINTS`` points.

    Unequal sizes are rejected; use ``subsample_equal`` first.
    """
    A, B = _as_points(A), _as_points(B)
    if len(A) != len(B):
        raise ValueError(
            f"point sets must have equal size, got {len(A)} and {len(B)}; "
            "subsample_equal() first"
        )
    A, B = _planar(A, B, units)

    if method == "sliced":
        if n_proj < 1:
            raise ValueError("n_proj must be at least 1")
        rng = np.random.default_rng(seed)
        thetas = rng.uniform(0.0, np.pi, size=n_proj)
        total = 0.0
        for th in thetas:
            d = np.array([np.cos(th), np.sin(th)])
            pa = np.sort(A @ d)
            pb = np.sort(B @ d)
            total += float(np.abs(pa - pb).mean())
        return total / n_proj

    if method == "exact_small":
        if len(A) > EXACT_WASSERSTEIN_MAX_POINTS:
            raise ValueError(
                f"exact_small is limited to {EXACT_WASSERSTEIN_MAX_POINTS} points, "
                f"got {len(A)}"
            )
        cost = pairwise_distances(A, B, "euclidean")
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].mean())

    raise ValueError(f"unknown method {method!r}; expected 'sliced' or 'exact_small'")


def jsd_from_counts(c1: np.ndarray, c2: np.ndarray) -> float:
    """Jensen-Shannon divergence (base 2, in [0, 1]) between two count vectors."""
    c1 = np.asarray(c1, dtype=float).ravel()
    c2 = np.asarray(c2, dtype=float).ravel()
    t1, t2 = c1.sum(), c2.sum()
    if t1 <= 0 or t2 <= 0:
        raise ValueError("JSD needs non-empty histograms on both sides")
    p, q = c1 / t1, c2 / t2
    m = 0.5 * (p + q)

    def _kl(a: np.ndarray) -> float:
        mask = a > 0
        return float((a[mask] * np.log2(a[mask] / m[mask])).sum())

    return 0.5 * _kl(p) + 0.5 * _kl(q)


def jsd_histogram(A, B, grid: GridSpec) -> float:
    """JSD between the gridded occupancy distributions of two point sets."""
    ha = histogram_from_points(_as_points(A), grid)
    hb = histogram_from_points(_as_points(B), grid)
    return jsd_from_counts(ha.counts, hb.counts)


def range_query_error(
    real,
    gen,
    n_queries: int = 100,
    radius_frac: float = 0.05,
    seed: int = 0,
    smoothing: float = 1.0,
    bbox: Optional[BoundingBox] = None,
    metric: str = "euclidean",
) -> float:
    """Mean relative count error over random circular range queries.

    Query centers are uniform in the bbox (default: tight bbox of the real
    set); the radius is ``radius_frac`` times the bbox diagonal. Each query
    contributes |c_real - c_gen| / max(c_real, smoothing).
    """
    real = _as_points(real)
    gen = np.asarray(gen, dtype=float).reshape(-1, 2)
    if n_queries < 1:
        raise ValueError("n_queries must be at least 1")
    if radius_frac <= 0:
        raise ValueError("radius_frac must be positive")
    if bbox is None:
        lat_min, lon_min = real.min(axis=0)
        lat_max, lon_max = real.max(axis=0)
        if lat_min == lat_max:
            lat_min, lat_max = lat_min - 1e-9, lat_max + 1e-9
        if lon_min == lon_max:
            lon_min, lon_max = lon_min - 1e-9, lon_max + 1e-9
        bbox = BoundingBox(lat_min, lat_max, lon_min, lon_max)

    corner_a = np.array([[bbox.min_lat, bbox.min_lon]])
    corner_b = np.array([[bbox.max_lat, bbox.max_lon]])
    diagonal = float(pairwise_distances(corner_a, corner_b, metric)[0, 0])
    radius = radius_frac * diagonal

    rng = np.random.default_rng(seed)
    lats = rng.uniform(bbox.min_lat, bbox.max_lat, size=n_queries)
    lons = rng.uniform(bbox.min_lon, bbox.max_lon, size=n_queries)
    centers = np.stack([lats, lons], axis=1)

    err = 0.0
    for c in centers:
        c_row = c[np.newaxis, :]
        c_real = int((pairwise_distances(c_row, real, metric)[0] <= radius).sum())
        c_gen = 0
        if len(gen):
            c_gen = int((pairwise_distances(c_row, gen, metric)[0] <= radius).sum())
        err += abs(c_real - c_gen) / max(c_real, smoothing)
    return err / n_queries


def _top_k_cells(hist: Histogram2D, k: int) -> set:
    flat = hist.counts.ravel()  # C order = ix * ny + iy, the tie-break order
    order = np.lexsort((np.arange(flat.size), -flat))
    return set(int(i) for i in order[:k])


def hotspot_preservation(real, gen, grid: GridSpec, k: int) -> Dict[str, float]:
    """Top-k hot-cell agreement: recall@k and Jaccard of the two top-k sets.

    Ties in the counts are broken toward the lower flat cell index.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > grid.n_cells:
        raise ValueError(f"k={k} exceeds the grid's {grid.n_cells} cells")
    h_real = histogram_from_points(_as_points(real), grid)
    h_gen = histogram_from_points(_as_points(gen), grid)
    if h_real.total == 0:
        raise ValueError("real set populates no grid cell")
    top_real = _top_k_cells(h_real, k)
    top_gen = _top_k_cells(h_gen, k)
    inter = len(top_real & top_gen)
    union = len(top_real | top_gen)
    return {"recall_at_k": inter / k, "jaccard": inter / union, "k": float(k)}


def hd_wd_pathology_demo(
    seed: int = 0,
    n_per_cluster: int = 200,
    separation: float = 8.0,
    std: float = 0.5,
    n_outliers: int = 1,
    n_proj: int = 100,
) -> Dict[str, float]:
    """Two clusters, with and without cross-planted outliers.

    Separated clusters score a large Hausdorff distance; planting a single
    point of each set at the other's center collapses Hausdorff while barely
    moving Wasserstein. Returns both metrics for both configurations.
    """
    rng = np.random.default_rng(seed)
    center_a = np.zeros(2)
    center_b = np.array([separation, 0.0])
    A = rng.normal(0.0, std, size=(n_per_cluster, 2)) + center_a
    B = rng.normal(0.0, std, size=(n_per_cluster, 2)) + center_b

    hd_sep = hausdorff_points(A, B, metric="euclidean")
    wd_sep = wasserstein(A, B, method="sliced", n_proj=n_proj, seed=seed)

    A_out = np.concatenate([A, np.tile(center_b, (n_outliers, 1))], axis=0)
    B_out = np.concatenate([B, np.tile(center_a, (n_outliers, 1))], axis=0)

    hd_out = hausdorff_points(A_out, B_out, metric="euclidean")
    wd_out = wasserstein(A_out, B_out, method="sliced", n_proj=n_proj, seed=seed)

    return {
        "hd_separated": hd_sep,
        "wd_separated": wd_sep,
        "hd_outlier": hd_out,
        "wd_outlier": wd_out,
        "hd_ratio": hd_sep / hd_out if hd_out > 0 else math.inf,
        "wd_rel_change": abs(wd_out - wd_sep) / wd_sep if wd_sep > 0 else math.inf,
    }
