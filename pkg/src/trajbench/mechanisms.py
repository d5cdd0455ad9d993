"""Baseline location-level DP release mechanisms, one deliberately broken.

Every mechanism is deterministic given its seed, draws per-trajectory noise
streams (so parallel application is order-independent), and returns a
``MechanismOutput`` that records the budget it spent and its unit of privacy.

``noisy_count_flawed`` reproduces a classic implementation error: Laplace
noise is added only to occupied histogram cells, and empty cells are released
as exact zeros. The released support then leaks which cells were occupied,
with no bound on the privacy loss; the auditor exposes this empirically.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from scipy.special import lambertw

from trajbench.accounting import PrivacyBudget, UnitOfPrivacy
from trajbench.core.geo import meters_per_degree
from trajbench.core.types import GeoPoint, Trajectory, TrajectoryDataset, dataset_from_trajectories
from trajbench.metrics.grid import GridSpec, histogram_from_dataset

LOCATION_LEVEL = UnitOfPrivacy("location")


@dataclass(frozen=True)
class MechanismOutput:
    """A released payload plus the accounting facts about its release."""

    payload: Any
    budget_spent: PrivacyBudget
    uop: UnitOfPrivacy
    seed: int
    known_flawed: bool = False


@dataclass(frozen=True)
class NoisyCounts:
    """Real-valued released counts on a grid (noisy, possibly negative)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"values shape {values.shape} != grid ({self.grid.nx}, {self.grid.ny})"
            )
        object.__setattr__(self, "values", values)


def _traj_rng(seed: int, traj_id: str) -> np.random.Generator:
    # substream keyed by trajectory identity: the same trajectory draws the
    # same noise under the same seed no matter how the dataset is ordered
    digest = hashlib.blake2s(traj_id.encode("utf-8"), digest_size=8).digest()
    return np.random.default_rng([seed, int.from_bytes(digest, "big")])


def _displace(traj: Trajectory, dx_m: np.ndarray, dy_m: np.ndarray) -> Trajectory:
    mean_lat = float(np.mean([p.lat for p in traj.points]))
    m_lat, m_lon = meters_per_degree(mean_lat)
    pts = tuple(
        GeoPoint(
            lat=p.lat + dy / m_lat,
            lon=p.lon + dx / m_lon,
            t=p.t,
            attrs=p.attrs,
        )
        for p, dx, dy in zip(traj.points, dx_m, dy_m)
    )
    return Trajectory(traj.traj_id, traj.user_id, pts)


def _require_geographic(ds: TrajectoryDataset, who: str) -> None:
    if ds.normalized:
        raise ValueError(f"{who} operates on geographic coordinates; denormalize first")


def cnoise(
    ds: TrajectoryDataset, epsilon: float, sensitivity_m: float, seed: int = 0
) -> MechanismOutput:
    """Coordinate-wise Laplace noise of scale sensitivity_m/epsilon, in meters.

    Each coordinate of each fix independently gets Laplace noise drawn in
    meter space, converted to degrees by the local equirectangular map at the
    trajectory's mean latitude. Location-level epsilon-DP for the declared
    per-coordinate sensitivity.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if sensitivity_m <= 0:
        raise ValueError(f"sensitivity_m must be positive, got {sensitivity_m}")
    _require_geographic(ds, "cnoise")
    b = sensitivity_m / epsilon
    out = []
    for traj in ds.trajectories:
        rng = _traj_rng(seed, traj.traj_id)
        noise = rng.laplace(0.0, b, size=(len(traj), 2))
        out.append(_displace(traj, noise[:, 0], noise[:, 1]))
    payload = dataset_from_trajectories(out, norm=ds.norm, normalized=False)
    return MechanismOutput(
        payload=payload,
        budget_spent=PrivacyBudget(epsilon=epsilon, delta=0.0),
        uop=LOCATION_LEVEL,
        seed=seed,
    )


def planar_laplace_radial_cdf(r, epsilon: float):
    """CDF of the planar Laplace radius: 1 - (1 + eps*r) * exp(-eps*r)."""
    r = np.asarray(r, dtype=float)
    return 1.0 - (1.0 + epsilon * r) * np.exp(-epsilon * r)


def planar_laplace_radial_inverse_cdf(p, epsilon: float):
    """Inverse radial CDF via the k = -1 branch of the Lambert W function."""
    p = np.asarray(p, dtype=float)
    if (p < 0).any() or (p >= 1).any():
        raise ValueError("p must lie in [0, 1)")
    # p = 0 sits on the branch point W(-1/e) where lambertw returns nan;
    # the quantile there is exactly 0
    arg = np.where(p > 0, (p - 1.0) / math.e, -0.1)
    r = -(lambertw(arg, k=-1).real + 1.0) / epsilon
    return np.where(p > 0, r, 0.0)


def planar_laplace(
    ds: TrajectoryDataset, epsilon_per_meter: float, seed: int = 0
) -> MechanismOutput:
    """Geo-indistinguishable planar Laplace perturbation.

    Angle uniform on [0, 2*pi); radius drawn by inverting the Gamma(2, eps)
    radial CDF. epsilon_per_meter is the geo-indistinguishability epsilon per
    meter; the guarantee is location-level.
    """
    if epsilon_per_meter <= 0:
        raise ValueError(f"epsilon_per_meter must be positive, got {epsilon_per_meter}")
    _require_geographic(ds, "planar_laplace")
    out = []
    for traj in ds.trajectories:
        rng = _traj_rng(seed, traj.traj_id)
        theta = rng.uniform(0.0, 2.0 * math.pi, size=len(traj))
        p = rng.uniform(0.0, 1.0, size=len(traj))
        r = planar_laplace_radial_inverse_cdf(p, epsilon_per_meter)
        out.append(_displace(traj, r * np.cos(theta), r * np.sin(theta)))
    payload = dataset_from_trajectories(out, norm=ds.norm, normalized=False)
    return MechanismOutput(
        payload=payload,
        budget_spent=PrivacyBudget(epsilon=epsilon_per_meter, delta=0.0),
        uop=LOCATION_LEVEL,
        seed=seed,
    )


def noisy_count_flawed(
    ds: TrajectoryDataset, grid: GridSpec, epsilon: float, seed: int = 0
) -> MechanismOutput:
    """BROKEN on purpose: Laplace(1/epsilon) only on occupied cells.

    Empty cells are released as exact zeros, deterministically. The claimed
    budget is recorded as (epsilon, 0) but the mechanism satisfies no finite
    epsilon; ``known_flawed`` is set.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    hist = histogram_from_dataset(ds, grid)
    rng = np.random.default_rng([seed, 0])
    values = hist.counts.astype(float)
    mask = hist.counts > 0
    values[mask] += rng.laplace(0.0, 1.0 / epsilon, size=int(mask.sum()))
    return MechanismOutput(
        payload=NoisyCounts(grid=grid, values=values),
        budget_spent=PrivacyBudget(epsilon=epsilon, delta=0.0),
        uop=LOCATION_LEVEL,
        seed=seed,
        known_flawed=True,
    )


def noisy_count_correct(
    ds: TrajectoryDataset,
    grid: GridSpec,
    epsilon: float,
    seed: int = 0,
    postprocess: Optional[str] = "clamp_nonneg",
) -> MechanismOutput:
    """Laplace(1/epsilon) on EVERY cell, occupied or not.

    Neighbouring datasets differing in one fix change one cell by one, so the
    release is location-level epsilon-DP. Optional non-negativity clamping is
    pure post-processing and spends nothing extra.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if postprocess not in (None, "clamp_nonneg"):
        raise ValueError(f"unknown postprocess {postprocess!r}")
    hist = histogram_from_dataset(ds, grid)
    rng = np.random.default_rng([seed, 0])
    values = hist.counts.astype(float) + rng.laplace(
        0.0, 1.0 / epsilon, size=hist.counts.shape
    )
    if postprocess == "clamp_nonneg":
        values = np.maximum(values, 0.0)
    return MechanismOutput(
        payload=NoisyCounts(grid=grid, values=values),
        budget_spent=PrivacyBudget(epsilon=epsilon, delta=0.0),
        uop=LOCATION_LEVEL,
        seed=seed,
    )
