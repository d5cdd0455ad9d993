"""Check-in CSV loader for Foursquare-style corpora.

The file must name at least the columns tid, label, lat, lon, day, hour,
category (extras are ignored). Rows are grouped into trajectories by tid in
file order; the user is the label column and must be constant per tid. Rows
carry no wall-clock timestamps, only the categorical day/hour channels.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, List, Tuple, Union

from trajbench.core.types import GeoPoint, Trajectory, TrajectoryDataset, dataset_from_trajectories

REQUIRED_COLUMNS = ("tid", "label", "lat", "lon", "day", "hour", "category")


def load_fs(csv_path: Union[str, Path]) -> Tuple[TrajectoryDataset, Dict[str, int]]:
    """Load a check-in CSV; returns the dataset and {n_users, n_trajectories, n_points}."""
    path = Path(csv_path)
    with path.open(newline="") as f:
        r = csv.DictReader(f)
        if r.fieldnames is None:
            raise ValueError(f"{path}: empty file")
        missing = [c for c in REQUIRED_COLUMNS if c not in r.fieldnames]
        if missing:
            raise ValueError(f"{path}: missing required columns {missing}")

        order: List[str] = []
        groups: Dict[str, dict] = {}
        for row_no, row in enumerate(r, start=2):
            tid = row["tid"]
            label = row["label"]
            try:
                lat = float(row["lat"])
                lon = float(row["lon"])
                attrs = {
                    "hour": int(row["hour"]),
                    "day": int(row["day"]),
                    "category": int(row["category"]),
                }
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path} row {row_no}: malformed field") from exc
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                raise ValueError(f"{path} row {row_no}: coordinates out of range")
            if not 0 <= attrs["hour"] <= 23:
                raise ValueError(f"{path} row {row_no}: hour {attrs['hour']} outside [0, 23]")
            if not 0 <= attrs["day"] <= 6:
                raise ValueError(f"{path} row {row_no}: day {attrs['day']} outside [0, 6]")
            g = groups.get(tid)
            if g is None:
                g = groups[tid] = {"user": label, "points": []}
                order.append(tid)
            elif g["user"] != label:
                raise ValueError(
                    f"{path} row {row_no}: tid {tid!r} spans labels "
                    f"{g['user']!r} and {label!r}"
                )
            g["points"].append(GeoPoint(lat=lat, lon=lon, attrs=attrs))

    if not order:
        raise ValueError(f"{path}: no rows")

    trajectories = tuple(
        Trajectory(traj_id=tid, user_id=groups[tid]["user"], points=tuple(groups[tid]["points"]))
        for tid in order
    )
    ds = dataset_from_trajectories(trajectories)
    report = {
        "n_users": len(ds.users()),
        "n_trajectories": len(trajectories),
        "n_points": ds.n_points,
    }
    return ds, report
