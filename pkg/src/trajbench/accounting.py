"""Privacy budgets, composition, unit-of-privacy conversion and calibration.

The unit of privacy (UoP) names what one "record" protects: a whole user, one
trajectory (instance), one location fix, or a window of w consecutive fixes
(multi_event; w = 1 coincides with location, w = max trajectory length with
instance). Guarantees only convert from finer to coarser units, multiplying
epsilon and delta by the maximum number m of finer records per coarser unit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

VALID_UOP_KINDS = ("user", "instance", "location", "multi_event")

_UOP_RANK = {"location": 0, "multi_event": 1, "instance": 2, "user": 3}


@dataclass(frozen=True)
class PrivacyBudget:
    """(epsilon, delta) pair; epsilon = 0 is the composition identity."""

    epsilon: float
    delta: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if not (0.0 <= self.delta < 1.0):
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")


@dataclass(frozen=True)
class UnitOfPrivacy:
    """What one protected record is; w counts fixes for multi_event windows."""

    kind: str
    w: int = 1

    def __post_init__(self) -> None:
        if self.kind not in VALID_UOP_KINDS:
            raise ValueError(f"unknown UoP kind {self.kind!r}; expected {VALID_UOP_KINDS}")
        if self.w < 1:
            raise ValueError(f"w must be at least 1, got {self.w}")
        if self.kind != "multi_event" and self.w != 1:
            raise ValueError(f"w != 1 only makes sense for multi_event, got {self.kind}")

    def rank(self) -> int:
        if self.kind == "multi_event" and self.w == 1:
            return _UOP_RANK["location"]  # w = 1 degenerates to location level
        return _UOP_RANK[self.kind]


def sequential_compose(budgets: Iterable[PrivacyBudget]) -> PrivacyBudget:
    """Basic sequential composition: epsilons and deltas add; empty -> (0, 0)."""
    budgets = list(budgets)
    # fsum: correctly rounded, so ten 0.1-budgets compose to exactly 1.0
    eps = math.fsum(b.epsilon for b in budgets)
    delta = math.fsum(b.delta for b in budgets)
    if delta >= 1.0:
        raise ValueError(f"composed delta {delta} reaches 1; the guarantee is vacuous")
    return PrivacyBudget(epsilon=eps, delta=delta)


def parallel_compose(budgets: Iterable[PrivacyBudget]) -> PrivacyBudget:
    """Parallel composition over disjoint inputs: the maxima; empty -> (0, 0)."""
    eps = 0.0
    delta = 0.0
    for b in budgets:
        eps = max(eps, b.epsilon)
        delta = max(delta, b.delta)
    return PrivacyBudget(epsilon=eps, delta=delta)


def uop_convert(
    budget: PrivacyBudget, frm: UnitOfPrivacy, to: UnitOfPrivacy, m: int
) -> PrivacyBudget:
    """Restate a guarantee at a coarser unit of privacy.

    m bounds how many source units one target unit contains (group size);
    epsilon and delta both scale by m. Converting toward a finer unit is
    rejected: it would claim protection the mechanism never provided.
    """
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    if frm.rank() > to.rank():
        raise ValueError(
            f"cannot convert from {frm.kind!r} to finer unit {to.kind!r}; "
            "guarantees only coarsen"
        )
    new_delta = budget.delta * m
    if new_delta >= 1.0:
        raise ValueError(f"converted delta {new_delta} reaches 1; guarantee vacuous")
    return PrivacyBudget(epsilon=budget.epsilon * m, delta=new_delta)


def laplace_scale(sensitivity: float, epsilon: float) -> float:
    """Laplace mechanism scale b = sensitivity / epsilon."""
    if sensitivity <= 0:
        raise ValueError(f"sensitivity must be positive, got {sensitivity}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return sensitivity / epsilon


def gaussian_sigma(sensitivity: float, epsilon: float, delta: float) -> float:
    """Classic Gaussian mechanism sigma = sensitivity * sqrt(2 ln(1.25/delta)) / epsilon.

    The bound is only proven for epsilon <= 1; larger epsilons emit a
    UserWarning rather than an error.
    """
    if sensitivity <= 0:
        raise ValueError(f"sensitivity must be positive, got {sensitivity}")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if epsilon > 1.0:
        warnings.warn(
            f"classic Gaussian bound is only valid for epsilon <= 1, got {epsilon}",
            UserWarning,
            stacklevel=2,
        )
    return sensitivity * math.sqrt(2.0 * math.log(1.25 / delta)) / epsilon


def recommend_delta(n: int) -> float:
    """The 1/n rule of thumb: delta below one over the number of records."""
    if not isinstance(n, int) or n <= 0:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n == 1:
        raise ValueError("n = 1 would give delta = 1, which is no guarantee at all")
    return 1.0 / n
