"""Trajectory-level metrics: alignment distances, matching, and mobility
statistics compared as distributions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.stats import wasserstein_distance as _wd1_exact

from trajbench.core.geo import euclidean_m, haversine_m, pairwise_distances
from trajbench.core.types import Trajectory, TrajectoryDataset
from trajbench.metrics.point import hausdorff_points, jsd_from_counts


def dtw(t1: Trajectory, t2: Trajectory, ground: str = "haversine") -> float:
    """Dynamic time warping distance, boundary-aligned, additive ground costs.

    Full O(n*m) table; the ground metric is haversine meters or euclidean
    coordinate units.
    """
    c1, c2 = t1.coords(), t2.coords()
    cost = pairwise_distances(c1, c2, ground)
    n, m = cost.shape
    dp = np.full((n + 1, m + 1), np.inf)
    dp[0, 0] = 0.0
    for i in range(1, n + 1):
        row = dp[i]
        prev = dp[i - 1]
        ci = cost[i - 1]
        for j in range(1, m + 1):
            row[j] = ci[j - 1] + min(prev[j], row[j - 1], prev[j - 1])
    return float(dp[n, m])


def hausdorff_traj(t1: Trajectory, t2: Trajectory, ground: str = "haversine") -> float:
    """Symmetric Hausdorff distance between the two point sequences as sets."""
    return hausdorff_points(t1.coords(), t2.coords(), metric=ground)


@dataclass(frozen=True)
class Matching:
    """Many-to-one closest-original matching from generated onto real.

    pairs[i] = (gen_traj_id, real_traj_id); distances[i] is the matched
    distance. Real trajectories never chosen appear in unmatched_real.
    """

    pairs: Tuple[Tuple[str, str], ...]
    distances: Tuple[float, ...]
    unmatched_real: Tuple[str, ...]
    ground: str

    @property
    def mean_distance(self) -> float:
        if not self.distances:
            raise ValueError("empty matching has no mean distance")
        return float(np.mean(self.distances))


def match_closest(
    gen: TrajectoryDataset, real: TrajectoryDataset, ground: str = "dtw"
) -> Matching:
    """Match each generated trajectory to its closest real one.

    ground: "dtw" or "hausdorff". Ties resolve to the lower real index
    (dataset order). The matching is many-to-one; unmatched real trajectories
    are reported, not penalized.
    """
    if ground == "dtw":
        dist = dtw
    elif ground == "hausdorff":
        dist = hausdorff_traj
    else:
        raise ValueError(f"unknown ground {ground!r}; expected 'dtw' or 'hausdorff'")
    if not len(gen) or not len(real):
        raise ValueError("matching needs non-empty datasets on both sides")

    metric = "euclidean" if (gen.normalized or real.normalized) else "haversine"
    pairs: List[Tuple[str, str]] = []
    dists: List[float] = []
    chosen = set()
    for g in gen.trajectories:
        best_j, best_d = 0, np.inf
        for j, r in enumerate(real.trajectories):
            d = dist(g, r, ground=metric)
            if d < best_d:  # strict: ties keep the lower index
                best_j, best_d = j, d
        pairs.append((g.traj_id, real.trajectories[best_j].traj_id))
        dists.append(float(best_d))
        chosen.add(best_j)
    unmatched = tuple(
        r.traj_id for j, r in enumerate(real.trajectories) if j not in chosen
    )
    return Matching(
        pairs=tuple(pairs),
        distances=tuple(dists),
        unmatched_real=unmatched,
        ground=ground,
    )


def _segment_lengths(traj: Trajectory, metric: str) -> np.ndarray:
    coords = traj.coords()
    if len(coords) < 2:
        return np.empty(0)
    a, b = coords[:-1], coords[1:]
    if metric == "haversine":
        return np.asarray(haversine_m(a[:, 0], a[:, 1], b[:, 0], b[:, 1]))
    if metric == "euclidean":
        return euclidean_m(a, b)
    raise ValueError(f"unknown metric {metric!r}")


def travelled_distance_distribution(
    ds: TrajectoryDataset, metric: str = "haversine"
) -> np.ndarray:
    """Per-trajectory total travelled distance; single-fix trajectories give 0."""
    if ds.normalized and metric == "haversine":
        raise ValueError("haversine on a normalized dataset; denormalize first")
    return np.array(
        [float(_segment_lengths(t, metric).sum()) for t in ds.trajectories]
    )


def segment_length_distribution(
    ds: TrajectoryDataset, metric: str = "haversine"
) -> np.ndarray:
    """Pooled consecutive-fix distances over the whole dataset."""
    if ds.normalized and metric == "haversine":
        raise ValueError("haversine on a normalized dataset; denormalize first")
    parts = [_segment_lengths(t, metric) for t in ds.trajectories]
    parts = [p for p in parts if p.size]
    if not parts:
        return np.empty(0)
    return np.concatenate(parts)


def distribution_distance(
    d1, d2, method: str = "wd1", bins: int = 50
) -> float:
    """Distance between two 1-D sample distributions.

    "wd1" is the exact first Wasserstein distance between the empirical
    distributions; "jsd" bins both samples with ``bins`` equal-width bins over
    their union range and compares base-2 JSD.
    """
    d1 = np.asarray(d1, dtype=float).ravel()
    d2 = np.asarray(d2, dtype=float).ravel()
    if d1.size == 0 or d2.size == 0:
        raise ValueError("distribution distance needs non-empty samples")
    if method == "wd1":
        return float(_wd1_exact(d1, d2))
    if method == "jsd":
        if bins < 1:
            raise ValueError("bins must be at least 1")
        lo = min(d1.min(), d2.min())
        hi = max(d1.max(), d2.max())
        if lo == hi:
            return 0.0
        c1, _ = np.histogram(d1, bins=bins, range=(lo, hi))
        c2, _ = np.histogram(d2, bins=bins, range=(lo, hi))
        return jsd_from_counts(c1, c2)
    raise ValueError(f"unknown method {method!r}; expected 'wd1' or 'jsd'")
