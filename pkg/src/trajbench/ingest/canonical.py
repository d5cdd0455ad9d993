"""Canonical on-disk interchange format.

A dataset is one CSV file with the exact header

    traj_id,user_id,seq,lat,lon,t,hour,day,category

plus a JSON sidecar at ``<path>.meta.json`` recording the bounding box,
normalization parameters (or null) and the normalized flag. Coordinates are
written with at least 7 fractional digits and round-trip losslessly.
"""

from __future__ import annotations

import csv
import json
import warnings
from decimal import Decimal
from pathlib import Path
from typing import Dict, List, Optional, Union

from trajbench.core.types import (
    BoundingBox,
    GeoPoint,
    NormalizationParams,
    Trajectory,
    TrajectoryDataset,
    dataset_from_trajectories,
)

CANONICAL_HEADER = [
    "traj_id",
    "user_id",
    "seq",
    "lat",
    "lon",
    "t",
    "hour",
    "day",
    "category",
]

_ATTR_BOUNDS = {"hour": (0, 23), "day": (0, 6)}


def sidecar_path(path: Union[str, Path]) -> Path:
    return Path(str(path) + ".meta.json")


def _fmt_float(x: float, min_frac: int = 7) -> str:
    """Shortest lossless decimal string with at least ``min_frac`` fraction digits."""
    s = repr(float(x))
    if "e" in s or "E" in s:
        # expand scientific notation exactly; Decimal(repr) preserves the value
        s = format(Decimal(s), "f")
    if "." not in s:
        s += "."
    head, frac = s.split(".", 1)
    if len(frac) < min_frac:
        frac += "0" * (min_frac - len(frac))
    return f"{head}.{frac}"


def _fmt_time(t: Optional[float]) -> str:
    if t is None:
        return ""
    if float(t).is_integer():
        return str(int(t))
    return repr(float(t))


def write_canonical(ds: TrajectoryDataset, path: Union[str, Path]) -> Path:
    """Write the dataset as canonical CSV + sidecar; returns the CSV path."""
    path = Path(path)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CANONICAL_HEADER)
        for traj in ds.trajectories:
            for seq, p in enumerate(traj.points):
                attrs = p.attrs or {}
                w.writerow(
                    [
                        traj.traj_id,
                        traj.user_id,
                        seq,
                        _fmt_float(p.lat),
                        _fmt_float(p.lon),
                        _fmt_time(p.t),
                        "" if "hour" not in attrs else attrs["hour"],
                        "" if "day" not in attrs else attrs["day"],
                        "" if "category" not in attrs else attrs["category"],
                    ]
                )
    meta = {
        "bbox": {
            "min_lat": ds.bbox.min_lat,
            "max_lat": ds.bbox.max_lat,
            "min_lon": ds.bbox.min_lon,
            "max_lon": ds.bbox.max_lon,
        },
        "norm": None
        if ds.norm is None
        else {
            "ref_lon": ds.norm.ref_lon,
            "ref_lat": ds.norm.ref_lat,
            "sf_lon": ds.norm.sf_lon,
            "sf_lat": ds.norm.sf_lat,
            "variant": ds.norm.variant,
        },
        "normalized": ds.normalized,
    }
    with sidecar_path(path).open("w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _parse_attr(name: str, raw: str, row_no: int) -> Optional[int]:
    if raw == "":
        return None
    try:
        v = int(raw)
    except ValueError as exc:
        raise ValueError(f"row {row_no}: {name} {raw!r} is not an integer") from exc
    lo_hi = _ATTR_BOUNDS.get(name)
    if lo_hi and not (lo_hi[0] <= v <= lo_hi[1]):
        raise ValueError(f"row {row_no}: {name}={v} outside {lo_hi}")
    if name == "category" and v < 0:
        raise ValueError(f"row {row_no}: category must be non-negative, got {v}")
    return v


def _load_sidecar(path: Path) -> Optional[dict]:
    sp = sidecar_path(path)
    if not sp.exists():
        warnings.warn(
            f"sidecar {sp} missing; recomputing bbox and assuming unnormalized data",
            stacklevel=3,
        )
        return None
    with sp.open() as f:
        meta = json.load(f)
    for key in ("bbox", "norm", "normalized"):
        if key not in meta:
            raise ValueError(f"sidecar {sp} missing key {key!r}")
    return meta


def read_canonical(path: Union[str, Path]) -> TrajectoryDataset:
    """Read a canonical CSV (+ sidecar when present) back into a dataset."""
    path = Path(path)
    meta = _load_sidecar(path)

    by_traj: Dict[str, dict] = {}
    with path.open(newline="") as f:
        r = csv.reader(f)
        header = next(r, None)
        if header != CANONICAL_HEADER:
            raise ValueError(
                f"bad canonical header in {path}: {header!r}; "
                f"expected {CANONICAL_HEADER!r}"
            )
        for row_no, row in enumerate(r, start=2):
            if len(row) != len(CANONICAL_HEADER):
                raise ValueError(f"row {row_no}: expected 9 fields, got {len(row)}")
            traj_id, user_id, seq_s, lat_s, lon_s, t_s, hour_s, day_s, cat_s = row
            try:
                seq = int(seq_s)
                lat = float(lat_s)
                lon = float(lon_s)
            except ValueError as exc:
                raise ValueError(f"row {row_no}: malformed numeric field") from exc
            t = None if t_s == "" else float(t_s)
            attrs = {}
            for name, raw in (("hour", hour_s), ("day", day_s), ("category", cat_s)):
                v = _parse_attr(name, raw, row_no)
                if v is not None:
                    attrs[name] = v
            entry = by_traj.setdefault(traj_id, {"user": user_id, "rows": []})
            if entry["user"] != user_id:
                raise ValueError(
                    f"row {row_no}: trajectory {traj_id!r} spans users "
                    f"{entry['user']!r} and {user_id!r}"
                )
            entry["rows"].append((seq, GeoPoint(lat, lon, t=t, attrs=attrs or None)))

    if not by_traj:
        raise ValueError(f"{path}: no trajectories")

    trajectories: List[Trajectory] = []
    for traj_id, entry in by_traj.items():
        rows = sorted(entry["rows"], key=lambda sp_: sp_[0])
        seqs = [s for s, _ in rows]
        if seqs != list(range(len(seqs))):
            raise ValueError(
                f"trajectory {traj_id!r}: seq must be contiguous from 0, got {seqs[:5]}..."
                if len(seqs) > 5
                else f"trajectory {traj_id!r}: seq must be contiguous from 0, got {seqs}"
            )
        trajectories.append(
            Trajectory(traj_id, entry["user"], tuple(p for _, p in rows))
        )

    if meta is None:
        return dataset_from_trajectories(trajectories)

    b = meta["bbox"]
    bbox = BoundingBox(b["min_lat"], b["max_lat"], b["min_lon"], b["max_lon"])
    norm = None
    if meta["norm"] is not None:
        n = meta["norm"]
        norm = NormalizationParams(
            ref_lon=n["ref_lon"],
            ref_lat=n["ref_lat"],
            sf_lon=n["sf_lon"],
            sf_lat=n["sf_lat"],
            variant=n["variant"],
        )
    normalized = bool(meta["normalized"])

    for traj in trajectories:
        for p in traj.points:
            if not normalized:
                p.validate_geographic()
            if not bbox.contains(p.lat, p.lon):
                raise ValueError(
                    f"point ({p.lat}, {p.lon}) of {traj.traj_id!r} lies outside "
                    "the sidecar bounding box; file and sidecar disagree"
                )
    return TrajectoryDataset(tuple(trajectories), bbox, norm=norm, normalized=normalized)
