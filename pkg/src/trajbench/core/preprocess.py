"""Raw GPS cleanup pipeline.

Order is fixed: (1) crop to the bounding box, (2) resample onto a uniform
time grid by linear interpolation, (3) split where consecutive fixes are at
least ``gap_s`` apart, (4) truncate to ``max_len`` fixes, (5) drop pieces
shorter than ``min_len``. The resampler never interpolates across a gap of
``gap_s`` or more, so gaps survive to the split step; within one output
trajectory every inter-fix delta equals ``interval_s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence

from trajbench.core.types import (
    BoundingBox,
    GeoPoint,
    Trajectory,
    TrajectoryDataset,
)


@dataclass(frozen=True)
class PreprocessConfig:
    """Pipeline knobs; defaults match the usual Geolife city-scale setup."""

    bbox: BoundingBox
    interval_s: float = 5.0
    gap_s: float = 60.0
    max_len: int = 200
    min_len: int = 10

    def __post_init__(self) -> None:
        if self.interval_s <= 0:
            raise ValueError("interval_s must be positive")
        if self.gap_s <= self.interval_s:
            raise ValueError("gap_s must exceed interval_s")
        if self.min_len < 1:
            raise ValueError("min_len must be at least 1")
        if self.max_len < self.min_len:
            raise ValueError("max_len must be at least min_len")


def filter_bbox(points: Sequence[GeoPoint], bbox: BoundingBox) -> List[GeoPoint]:
    return [p for p in points if bbox.contains(p.lat, p.lon)]


def _lerp(a: GeoPoint, b: GeoPoint, t: float) -> GeoPoint:
    w = (t - a.t) / (b.t - a.t)
    return GeoPoint(
        lat=a.lat + w * (b.lat - a.lat),
        lon=a.lon + w * (b.lon - a.lon),
        t=t,
        attrs=a.attrs,  # side channels carried from the left neighbour
    )


def resample_uniform(
    points: Sequence[GeoPoint], interval_s: float, gap_s: float
) -> List[GeoPoint]:
    """Resample onto grids of ``interval_s``, one grid per gap-free run.

    Fixes with duplicated timestamps keep only the first occurrence. A pair of
    consecutive fixes ``gap_s`` or more apart bounds a run; interpolation never
    crosses it, and the gap (which can only widen) is left for the split step.
    Within a run the grid is anchored at the run's first fix and never
    extrapolates past its last.
    """
    pts: List[GeoPoint] = []
    for p in points:
        if p.t is None:
            raise ValueError("resampling requires timestamps on every fix")
        if pts and p.t == pts[-1].t:
            continue
        pts.append(p)
    if not pts:
        return []

    runs: List[List[GeoPoint]] = [[pts[0]]]
    for prev, cur in zip(pts, pts[1:]):
        if cur.t - prev.t >= gap_s:
            runs.append([cur])
        else:
            runs[-1].append(cur)

    out: List[GeoPoint] = []
    for run in runs:
        t0, t_end = run[0].t, run[-1].t
        k = 0
        i = 0  # index of the segment [run[i], run[i+1]] bracketing the grid time
        while True:
            t = t0 + k * interval_s
            if t > t_end:
                break
            while i + 1 < len(run) and run[i + 1].t <= t:
                i += 1
            if run[i].t == t:
                out.append(run[i])  # grid hits an original fix: keep it bit-exact
            else:
                out.append(_lerp(run[i], run[i + 1], t))
            k += 1
    return out


def split_gaps(points: Sequence[GeoPoint], gap_s: float) -> List[List[GeoPoint]]:
    """Cut the sequence wherever the inter-fix delta reaches ``gap_s``."""
    pieces: List[List[GeoPoint]] = []
    cur: List[GeoPoint] = []
    for p in points:
        if cur and p.t - cur[-1].t >= gap_s:
            pieces.append(cur)
            cur = []
        cur.append(p)
    if cur:
        pieces.append(cur)
    return pieces


def preprocess_geolife(
    ds: TrajectoryDataset, cfg: PreprocessConfig
) -> tuple[TrajectoryDataset, Dict[str, int]]:
    """Run the five-step pipeline; returns the cleaned dataset and a report.

    Report keys: n_in, n_out, n_dropped (pieces discarded for falling below
    min_len, plus input trajectories emptied by the bbox crop), points_in,
    points_out. Idempotent on already-compliant data.
    """
    out_trajs: List[Trajectory] = []
    n_dropped = 0
    points_in = 0

    for traj in ds.trajectories:
        points_in += len(traj)
        if not traj.has_timestamps:
            raise ValueError(
                f"trajectory {traj.traj_id!r} lacks timestamps; "
                "preprocessing needs them"
            )
        inside = filter_bbox(traj.points, cfg.bbox)
        if not inside:
            n_dropped += 1
            continue
        resampled = resample_uniform(inside, cfg.interval_s, cfg.gap_s)
        pieces = split_gaps(resampled, cfg.gap_s)
        for idx, piece in enumerate(pieces):
            piece = piece[: cfg.max_len]
            if len(piece) < cfg.min_len:
                n_dropped += 1
                continue
            suffix = f"#{idx}" if len(pieces) > 1 else ""
            out_trajs.append(
                Trajectory(
                    traj_id=f"{traj.traj_id}{suffix}",
                    user_id=traj.user_id,
                    points=tuple(piece),
                )
            )

    cleaned = TrajectoryDataset(tuple(out_trajs), cfg.bbox)
    report = {
        "n_in": len(ds.trajectories),
        "n_out": len(out_trajs),
        "n_dropped": n_dropped,
        "points_in": points_in,
        "points_out": cleaned.n_points,
    }
    return cleaned, report
