"""Shared fixture builders for the test suite."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pytest

from trajbench.core.types import (
    BoundingBox,
    GeoPoint,
    Trajectory,
    TrajectoryDataset,
    dataset_from_trajectories,
)


def make_traj(
    coords: Sequence[tuple],
    traj_id: str = "t0",
    user_id: str = "u0",
    t0: Optional[float] = 0.0,
    dt: float = 5.0,
    attrs: Optional[Sequence[dict]] = None,
) -> Trajectory:
    """Trajectory from (lat, lon) pairs with an arithmetic time grid."""
    pts = []
    for i, (lat, lon) in enumerate(coords):
        a = None if attrs is None else attrs[i]
        t = None if t0 is None else t0 + i * dt
        pts.append(GeoPoint(lat=lat, lon=lon, t=t, attrs=a))
    return Trajectory(traj_id=traj_id, user_id=user_id, points=tuple(pts))


def make_dataset(trajs: Sequence[Trajectory], bbox: Optional[BoundingBox] = None) -> TrajectoryDataset:
    return dataset_from_trajectories(trajs, bbox=bbox)


def random_dataset(
    seed: int,
    n_traj: int = 5,
    n_pts: int = 20,
    bbox: BoundingBox = BoundingBox(39.8, 40.0, 116.2, 116.5),
    with_attrs: bool = False,
    with_time: bool = True,
) -> TrajectoryDataset:
    rng = np.random.default_rng(seed)
    trajs = []
    for i in range(n_traj):
        lats = rng.uniform(bbox.min_lat, bbox.max_lat, n_pts)
        lons = rng.uniform(bbox.min_lon, bbox.max_lon, n_pts)
        attrs = None
        if with_attrs:
            attrs = [
                {
                    "hour": int(rng.integers(24)),
                    "day": int(rng.integers(7)),
                    "category": int(rng.integers(10)),
                }
                for _ in range(n_pts)
            ]
        trajs.append(
            make_traj(
                list(zip(lats, lons)),
                traj_id=f"t{i}",
                user_id=f"u{i % 3}",
                t0=0.0 if with_time else None,
                attrs=attrs,
            )
        )
    return dataset_from_trajectories(trajs, bbox=bbox)


def write_fs_csv(path: Path, n_users: int, n_points: int, seed: int = 7) -> Path:
    """Schema-exact check-in CSV with the requested exact dimensions."""
    rng = np.random.default_rng(seed)
    rows = []
    # spread points over users and trajectories; every user gets at least one
    base = n_points // n_users
    extra = n_points - base * n_users
    tid = 0
    for u in range(n_users):
        quota = base + (1 if u < extra else 0)
        while quota > 0:
            take = int(min(quota, rng.integers(1, 30)))
            tid += 1
            for _ in range(take):
                rows.append(
                    {
                        "tid": f"traj_{tid}",
                        "label": f"user_{u}",
                        "lat": f"{40.55 + rng.uniform(0, 0.35):.6f}",
                        "lon": f"{-74.25 + rng.uniform(0, 0.5):.6f}",
                        "day": int(rng.integers(7)),
                        "hour": int(rng.integers(24)),
                        "category": int(rng.integers(10)),
                    }
                )
            quota -= take
    assert len(rows) == n_points
    with path.open("w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["tid", "label", "lat", "lon", "day", "hour", "category"])
        w.writeheader()
        w.writerows(rows)
    return path


@pytest.fixture
def beijing_bbox() -> BoundingBox:
    return BoundingBox(39.76, 40.03, 116.20, 116.55)


# one status line per acceptance criterion, surfaced after the run so the
# PASS/FAIL verdicts stay visible even with captured stdout
ACCEPTANCE_LINES: list = []


def record_criterion(number: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    ACCEPTANCE_LINES.append(f"criterion {number} {name}: {status}{suffix}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
