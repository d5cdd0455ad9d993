"""Empirical lower bounds on the privacy loss of a mechanism.

The estimator runs a mechanism many times on two neighbouring datasets,
counts how often a caller-chosen output event fires on each, and converts the
two Clopper-Pearson exact confidence intervals into a certified lower bound

    eps_lb = max(0, ln(lower_ci(p1) / upper_ci(p2))).

A mechanism that is epsilon-DP keeps eps_lb <= epsilon except with the CI
failure probability; a broken mechanism (e.g. deterministic zeros for absent
records) is driven to the +inf sentinel: the event fired on D1 with a
certified-positive rate yet never once fired on D2. The honest finite bound
is always reported alongside the sentinel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.stats import beta as _beta

from trajbench.accounting import UnitOfPrivacy
from trajbench.core.types import Trajectory, TrajectoryDataset
from trajbench.mechanisms import MechanismOutput, NoisyCounts


def clopper_pearson(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Exact two-sided binomial confidence interval."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    alpha = 1.0 - confidence
    lo = 0.0 if successes == 0 else float(_beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(_beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


@dataclass(frozen=True)
class AuditResult:
    """Outcome of one empirical epsilon audit (one direction, D1 vs D2)."""

    eps_lb: float  # +inf sentinel when the D2 event count was exactly zero
    eps_lb_cp: float  # finite Clopper-Pearson bound, always defined
    p1_hat: float
    p2_hat: float
    p1_ci: Tuple[float, float]
    p2_ci: Tuple[float, float]
    trials: int
    confidence: float
    sentinel: bool
    inconclusive: bool

    def verdict(self, claimed_epsilon: float) -> str:
        if self.inconclusive:
            return "inconclusive"
        if self.eps_lb > claimed_epsilon:
            return "violates-claim"
        return "consistent"


def estimate_epsilon_lb(
    mechanism: Callable[[object, int], object],
    d1,
    d2,
    event: Callable[[object], bool],
    trials: int,
    confidence: float = 0.95,
    seed: int = 0,
) -> AuditResult:
    """Monte Carlo lower bound on the privacy loss exposed by ``event``.

    mechanism(data, seed) is called ``trials`` times per dataset with
    independent derived seeds; event(output) -> bool. The direction is as
    given: p1 counts D1, p2 counts D2. Use ``estimate_epsilon_lb_two_sided``
    to take the max over both orderings.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    seeds1 = rng.integers(0, 2**63 - 1, size=trials)
    seeds2 = rng.integers(0, 2**63 - 1, size=trials)

    c1 = sum(1 for s in seeds1 if event(mechanism(d1, int(s))))
    c2 = sum(1 for s in seeds2 if event(mechanism(d2, int(s))))

    p1_ci = clopper_pearson(c1, trials, confidence)
    p2_ci = clopper_pearson(c2, trials, confidence)

    lo1, hi2 = p1_ci[0], p2_ci[1]
    eps_lb_cp = max(0.0, math.log(lo1 / hi2)) if lo1 > 0 else 0.0

    inconclusive = c1 == 0 and c2 == 0
    sentinel = c2 == 0 and lo1 > 0.0
    eps_lb = math.inf if sentinel else eps_lb_cp

    return AuditResult(
        eps_lb=eps_lb,
        eps_lb_cp=eps_lb_cp,
        p1_hat=c1 / trials,
        p2_hat=c2 / trials,
        p1_ci=p1_ci,
        p2_ci=p2_ci,
        trials=trials,
        confidence=confidence,
        sentinel=sentinel,
        inconclusive=inconclusive,
    )


def estimate_epsilon_lb_two_sided(
    mechanism, d1, d2, event, trials: int, confidence: float = 0.95, seed: int = 0
) -> AuditResult:
    """Max of the two single-direction audits, so callers cannot pick the blind side."""
    fwd = estimate_epsilon_lb(mechanism, d1, d2, event, trials, confidence, seed)
    rev = estimate_epsilon_lb(mechanism, d2, d1, event, trials, confidence, seed + 1)
    return fwd if fwd.eps_lb >= rev.eps_lb else rev


@dataclass(frozen=True)
class NeighbourPair:
    """D1 and D2 = D1 with one unit of privacy removed."""

    d1: TrajectoryDataset
    d2: TrajectoryDataset
    uop: UnitOfPrivacy
    target: object


def _remove_window(traj: Trajectory, start: int, w: int) -> Optional[Trajectory]:
    if start < 0 or start + w > len(traj):
        raise ValueError(
            f"window [{start}, {start + w}) outside trajectory of length {len(traj)}"
        )
    pts = traj.points[:start] + traj.points[start + w :]
    if not pts:
        return None
    return Trajectory(traj.traj_id, traj.user_id, pts)


def make_neighbours(
    ds: TrajectoryDataset,
    uop: UnitOfPrivacy,
    target: Optional[object] = None,
    seed: int = 0,
) -> NeighbourPair:
    """Build (D1, D2) differing in exactly one unit of privacy.

    target selects the removed unit: a user_id for user level, a traj_id for
    instance level, (traj_id, point_index) for location level, and
    (traj_id, start_index) for multi_event (the window length is uop.w).
    target=None picks one uniformly with the seed. Both datasets keep D1's
    bounding box so gridded releases stay comparable.
    """
    if not len(ds):
        raise ValueError("cannot build neighbours from an empty dataset")
    rng = np.random.default_rng(seed)
    trajs = ds.trajectories

    if uop.kind == "user":
        users = ds.users()
        if target is None:
            target = users[int(rng.integers(len(users)))]
        if target not in users:
            raise ValueError(f"user {target!r} not in dataset")
        kept = tuple(t for t in trajs if t.user_id != target)
    elif uop.kind == "instance":
        ids = [t.traj_id for t in trajs]
        if target is None:
            target = ids[int(rng.integers(len(ids)))]
        if target not in ids:
            raise ValueError(f"trajectory {target!r} not in dataset")
        kept = tuple(t for t in trajs if t.traj_id != target)
    elif uop.kind in ("location", "multi_event"):
        w = uop.w if uop.kind == "multi_event" else 1
        if target is None:
            ti = int(rng.integers(len(trajs)))
            max_start = len(trajs[ti]) - w
            if max_start < 0:
                raise ValueError(
                    f"trajectory {trajs[ti].traj_id!r} shorter than the window w={w}"
                )
            target = (trajs[ti].traj_id, int(rng.integers(max_start + 1)))
        traj_id, start = target
        by_id = {t.traj_id: t for t in trajs}
        if traj_id not in by_id:
            raise ValueError(f"trajectory {traj_id!r} not in dataset")
        shortened = _remove_window(by_id[traj_id], start, w)
        kept = tuple(
            t if t.traj_id != traj_id else shortened
            for t in trajs
            if t.traj_id != traj_id or shortened is not None
        )
    else:  # unreachable; UnitOfPrivacy validates kinds
        raise ValueError(f"unsupported UoP kind {uop.kind!r}")

    d2 = TrajectoryDataset(kept, ds.bbox, norm=ds.norm, normalized=ds.normalized)
    return NeighbourPair(d1=ds, d2=d2, uop=uop, target=target)


def make_cell_nonzero_event(cell: Tuple[int, int]) -> Callable[[object], bool]:
    """Event: the released value of grid cell (ix, iy) differs from zero."""
    ix, iy = cell

    def _event(output: object) -> bool:
        payload = output.payload if isinstance(output, MechanismOutput) else output
        if not isinstance(payload, NoisyCounts):
            raise ValueError("cell_nonzero event expects a NoisyCounts payload")
        return bool(payload.values[ix, iy] != 0.0)

    return _event


def randomized_response(bit: int, epsilon: float, seed: int = 0) -> int:
    """Binary randomized response: keep with probability e^eps / (1 + e^eps).

    True epsilon is exactly ln(p_keep / (1 - p_keep)); used as the auditor's
    known-truth calibration mechanism.
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    p_keep = math.exp(epsilon) / (1.0 + math.exp(epsilon))
    rng = np.random.default_rng(seed)
    return bit if rng.random() < p_keep else 1 - bit
