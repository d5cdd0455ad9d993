"""Geolife PLT corpus loader.

Expects the published layout ``<root>/<user>/Trajectory/<name>.plt``. Each
PLT file carries 6 header lines, then records of

    lat,lon,0,altitude,days,date,time

with ``date`` as YYYY-MM-DD and ``time`` as HH:MM:SS; timestamps are parsed
as UTC epoch seconds. Malformed lines are skipped and counted, not fatal.
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Tuple, Union

from trajbench.core.types import GeoPoint, Trajectory, TrajectoryDataset, dataset_from_trajectories

PLT_HEADER_LINES = 6


def _parse_plt_line(line: str) -> GeoPoint:
    fields = line.strip().split(",")
    if len(fields) < 7:
        raise ValueError("short line")
    lat = float(fields[0])
    lon = float(fields[1])
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        raise ValueError("coordinates out of range")
    dt = datetime.strptime(f"{fields[5]} {fields[6]}", "%Y-%m-%d %H:%M:%S")
    t = dt.replace(tzinfo=timezone.utc).timestamp()
    return GeoPoint(lat=lat, lon=lon, t=t)


def _user_of(plt_file: Path) -> str:
    if plt_file.parent.name == "Trajectory":
        return plt_file.parent.parent.name
    return plt_file.parent.name


def load_geolife(
    root_dir: Union[str, Path]
) -> Tuple[TrajectoryDataset, Dict[str, object]]:
    """Load every ``*.plt`` under root_dir.

    Returns the dataset (tight bbox from the data; cropping belongs to
    preprocessing) and a report with n_files, n_points, n_skipped_lines and
    the collected per-file error notes.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise ValueError(f"{root} is not a directory")
    files = sorted(root.rglob("*.plt"))
    if not files:
        raise ValueError(f"no .plt files under {root}")

    trajectories: List[Trajectory] = []
    n_skipped = 0
    errors: List[str] = []
    for f in files:
        points: List[GeoPoint] = []
        with f.open() as fh:
            for i, line in enumerate(fh):
                if i < PLT_HEADER_LINES:
                    continue
                if not line.strip():
                    continue
                try:
                    points.append(_parse_plt_line(line))
                except (ValueError, IndexError):
                    n_skipped += 1
        if not points:
            errors.append(f"{f}: no valid records")
            continue
        points.sort(key=lambda p: p.t)  # raw corpora occasionally jitter
        user = _user_of(f)
        trajectories.append(
            Trajectory(traj_id=f"{user}/{f.stem}", user_id=user, points=tuple(points))
        )

    if not trajectories:
        raise ValueError(f"no usable trajectories under {root}")
    ds = dataset_from_trajectories(trajectories)
    report = {
        "n_files": len(files),
        "n_trajectories": len(trajectories),
        "n_points": ds.n_points,
        "n_skipped_lines": n_skipped,
        "errors": errors,
    }
    return ds, report
