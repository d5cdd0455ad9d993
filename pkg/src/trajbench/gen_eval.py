"""Generator-facing evaluation: the composite trajectory loss and a
convergence report between matched real and generated datasets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, Optional

import numpy as np

from trajbench.core.geo import haversine_m
from trajbench.core.normalize import denormalize, normalize
from trajbench.core.types import NormalizationParams, TrajectoryDataset

TEMPORAL_CHANNELS = ("hour", "day")
CATEGORICAL_CHANNELS = ("hour", "day", "category")


@dataclass(frozen=True)
class TrajLossWeights:
    """Non-negative term weights (bce, spatial, temporal, category)."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    c: float = 1.0

    def __post_init__(self) -> None:
        vals = (self.alpha, self.beta, self.gamma, self.c)
        if any(v < 0 for v in vals):
            raise ValueError(f"weights must be non-negative, got {vals}")
        if all(v == 0 for v in vals):
            raise ValueError("at least one weight must be positive")


def _check_probs(name: str, arr: np.ndarray) -> None:
    if (arr < 0).any():
        raise ValueError(f"{name} carries negative probabilities")
    sums = arr.sum(axis=-1)
    if not np.allclose(sums, 1.0, atol=1e-5):
        raise ValueError(f"{name} rows must sum to 1 (max deviation {abs(sums - 1).max():.2e})")


def _cross_entropy(target: np.ndarray, pred: np.ndarray) -> float:
    """Mean over slots of -sum_k target_k * ln(pred_k), with 0 * ln 0 = 0."""
    with np.errstate(divide="ignore"):
        logs = np.log(np.where(target > 0, pred, 1.0))  # log(1)=0 kills the 0-mass slots
    per_slot = -(target * logs).sum(axis=-1)
    return float(per_slot.mean())


def trajloss(
    y_r,
    y_p,
    t_r: Mapping[str, np.ndarray],
    t_s: Mapping[str, np.ndarray],
    weights: TrajLossWeights = TrajLossWeights(),
) -> Dict[str, float]:
    """Composite loss: alpha*L_bce + beta*L_s + gamma*L_t + c*L_c.

    y_r are {0,1} labels, y_p discriminator scores strictly inside (0, 1).
    t_r and t_s map channel names to aligned arrays: "spatial" is (..., 2)
    coordinates (required); "hour"/"day"/"category" are probability vectors
    over their categories (optional; one-hot for real data). L_t sums the
    cross-entropies of the temporal channels present, L_c is the category
    cross-entropy; absent channels contribute zero.
    """
    y_r = np.asarray(y_r, dtype=float).ravel()
    y_p = np.asarray(y_p, dtype=float).ravel()
    if y_r.shape != y_p.shape:
        raise ValueError(f"label/score shapes differ: {y_r.shape} vs {y_p.shape}")
    if not np.isin(y_r, (0.0, 1.0)).all():
        raise ValueError("y_r must be binary labels")
    if (y_p <= 0).any() or (y_p >= 1).any():
        raise ValueError("y_p scores must lie strictly inside (0, 1)")
    l_bce = float(-(y_r * np.log(y_p) + (1 - y_r) * np.log(1 - y_p)).mean())

    if "spatial" not in t_r or "spatial" not in t_s:
        raise ValueError("both sides need a 'spatial' channel")
    extra = (set(t_r) | set(t_s)) - {"spatial", *CATEGORICAL_CHANNELS}
    if extra:
        raise ValueError(f"unknown channels {sorted(extra)}")
    if set(t_r) != set(t_s):
        raise ValueError(f"channel sets differ: {sorted(t_r)} vs {sorted(t_s)}")

    sp_r = np.asarray(t_r["spatial"], dtype=float)
    sp_s = np.asarray(t_s["spatial"], dtype=float)
    if sp_r.shape != sp_s.shape:
        raise ValueError(f"spatial shapes differ: {sp_r.shape} vs {sp_s.shape}")
    l_s = float(((sp_r - sp_s) ** 2).mean())

    l_t = 0.0
    l_c = 0.0
    for name in CATEGORICAL_CHANNELS:
        if name not in t_r:
            continue
        tr = np.asarray(t_r[name], dtype=float)
        ts = np.asarray(t_s[name], dtype=float)
        if tr.shape != ts.shape:
            raise ValueError(f"{name} shapes differ: {tr.shape} vs {ts.shape}")
        _check_probs(f"t_r[{name}]", tr)
        _check_probs(f"t_s[{name}]", ts)
        ce = _cross_entropy(tr, ts)
        if name in TEMPORAL_CHANNELS:
            l_t += ce
        else:
            l_c += ce

    total = (
        weights.alpha * l_bce + weights.beta * l_s + weights.gamma * l_t + weights.c * l_c
    )
    return {"total": total, "l_bce": l_bce, "l_s": l_s, "l_t": l_t, "l_c": l_c}


def _geographic(ds: TrajectoryDataset) -> TrajectoryDataset:
    return denormalize(ds) if ds.normalized else ds


def _fallback_frame(real: TrajectoryDataset, gen: TrajectoryDataset) -> NormalizationParams:
    coords = np.concatenate([real.all_coords(), gen.all_coords()])
    lat_min, lon_min = coords.min(axis=0)
    lat_max, lon_max = coords.max(axis=0)
    # a degenerate axis has no intrinsic scale; fall back to raw degrees there
    sf_lat = (lat_max - lat_min) / 2 or 1.0
    sf_lon = (lon_max - lon_min) / 2 or 1.0
    return NormalizationParams(
        ref_lon=(lon_min + lon_max) / 2,
        ref_lat=(lat_min + lat_max) / 2,
        sf_lon=sf_lon,
        sf_lat=sf_lat,
        variant="minmax",
    )


def convergence_report(
    real: TrajectoryDataset, gen: TrajectoryDataset
) -> Dict[str, Optional[float]]:
    """Pointwise agreement between datasets matched by traj_id.

    Every generated trajectory must exist in the real dataset with the same
    length. Reports the mean haversine displacement in meters (on geographic
    coordinates), the mean Euclidean displacement in normalized units, and
    the percentage of matched fixes whose categorical attrs differ, per
    channel present on both sides (None when a channel is absent).
    """
    real_by_id = {t.traj_id: t for t in real.trajectories}
    if not len(gen):
        raise ValueError("generated dataset is empty")
    for t in gen.trajectories:
        if t.traj_id not in real_by_id:
            raise ValueError(f"generated trajectory {t.traj_id!r} has no real twin")
        if len(t) != len(real_by_id[t.traj_id]):
            raise ValueError(
                f"length mismatch for {t.traj_id!r}: "
                f"{len(t)} generated vs {len(real_by_id[t.traj_id])} real"
            )

    # one shared normalized frame: the real dataset's params when present,
    # otherwise a minmax fit on the union of both sides
    real_geo = _geographic(real)
    gen_geo = _geographic(gen)
    params = real.norm or gen.norm
    if params is None:
        params = _fallback_frame(real_geo, gen_geo)
    real_norm = normalize(real_geo, params)
    gen_norm = normalize(gen_geo, params)

    geo_by_id = {t.traj_id: t for t in real_geo.trajectories}
    norm_by_id = {t.traj_id: t for t in real_norm.trajectories}

    hav_sum = 0.0
    euc_sum = 0.0
    n_points = 0
    diff_counts: Dict[str, list] = {k: [0, 0] for k in CATEGORICAL_CHANNELS}

    for g_geo, g_norm in zip(gen_geo.trajectories, gen_norm.trajectories):
        r_geo = geo_by_id[g_geo.traj_id]
        r_norm = norm_by_id[g_geo.traj_id]
        a, b = r_geo.coords(), g_geo.coords()
        hav_sum += float(haversine_m(a[:, 0], a[:, 1], b[:, 0], b[:, 1]).sum())
        an, bn = r_norm.coords(), g_norm.coords()
        euc_sum += float(np.sqrt(((an - bn) ** 2).sum(axis=1)).sum())
        n_points += len(g_geo)
        for rp, gp in zip(r_geo.points, g_geo.points):
            for key in CATEGORICAL_CHANNELS:
                rv = None if rp.attrs is None else rp.attrs.get(key)
                gv = None if gp.attrs is None else gp.attrs.get(key)
                if rv is None or gv is None:
                    continue
                diff_counts[key][1] += 1
                if rv != gv:
                    diff_counts[key][0] += 1

    report: Dict[str, Optional[float]] = {
        "haversine_mean_m": hav_sum / n_points,
        "euclidean_mean_norm": euc_sum / n_points,
        "n_trajectories": float(len(gen)),
        "n_points": float(n_points),
    }
    for key in CATEGORICAL_CHANNELS:
        differing, total = diff_counts[key]
        report[f"pct_{key}_differ"] = 100.0 * differing / total if total else None
    return report
