"""Inverse-normal combination of stage-wise p-values and scenario wiring.

The wiring maps a stage-2 continuation scenario to the exact pairings of
stage-1 and stage-2 cohort p-values feeding each elementary and
intersection test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

from .multiplicity import Endpoint, HypothesisId, Population, hochberg_intersection
from .numerics import norm_quantile

__all__ = [
    "StageWeights",
    "event_weights",
    "inverse_normal",
    "Scenario",
    "CohortPValues",
    "scenario_wiring",
    "P_CLAMP_EPS",
]

P_CLAMP_EPS = 1e-12


@dataclass(frozen=True)
class StageWeights:
    """Pre-specified combination weights with w1^2 + w2^2 = 1."""

    w1: float
    w2: float

    def __post_init__(self):
        if self.w1 < 0 or self.w2 < 0:
            raise ValueError(f"weights must be nonnegative: ({self.w1}, {self.w2})")
        if abs(self.w1 **2 + self.w2 **2 - 1.0) > 1e-12:
            raise ValueError(f"w1^2 + w2^2 must equal 1: ({self.w1}, {self.w2})")

    @classmethod
    def from_squares(cls, v1: float, v2: float) -> "StageWeights":
        if abs(v1 + v2 - 1.0) > 1e-9:
            raise ValueError(f"squared weights must sum to 1: ({v1}, {v2})")
        return cls(math.sqrt(v1), math.sqrt(max(1.0 - v1, 0.0)))


def event_weights(n1: int, n2: int) -> StageWeights:
    """Weights proportional to the square root of per-stage event counts.

    Reference/planning utility only: weights used for testing must be
    pre-specified.
    """
    if n1 < 0 or n2 < 0:
        raise ValueError("event counts must be nonnegative")
    total = n1 + n2
    if total == 0:
        raise ValueError("at least one stage must contribute events")
    return StageWeights(math.sqrt(n1 / total), math.sqrt(n2 / total))


def clamp_p(p: float) -> Tuple[float, bool]:
    """Clamp a degenerate p-value into (0, 1); flags when clamping fired."""
    if p <= 0.0:
        return P_CLAMP_EPS, True
    if p >= 1.0:
        return 1.0 - P_CLAMP_EPS, True
    return p, False


def inverse_normal(p1: float, p2: float, w: StageWeights) -> float:
    """Combined Z: w1 * Phi^-1(1 - p1) + w2 * Phi^-1(1 - p2)."""
    p1, _ = clamp_p(p1)
    p2, _ = clamp_p(p2)
    return w.w1 * norm_quantile(1.0 - p1) + w.w2 * norm_quantile(1.0 - p2)


class Scenario(Enum):
    S_ONLY = "s_only"
    F_ONLY = "f_only"
    BOTH = "both"


# Test targets are either an elementary hypothesis or the per-endpoint
# population intersection, tagged by its endpoint.
Intersection = Tuple[str, Endpoint]
TestTarget = Union[HypothesisId, Intersection]


def intersection_target(endpoint: Endpoint) -> Intersection:
    return ("FS", endpoint)


@dataclass(frozen=True)
class CohortPValues:
    """Stage-wise one-sided p-values for one endpoint at one analysis.

    Missing slots (population not followed, no events) stay None; the
    wiring raises if a required slot is absent.
    """

    stage1_full: Optional[float] = None
    stage1_sub: Optional[float] = None
    stage2_full: Optional[float] = None
    stage2_sub: Optional[float] = None

    def stage1_intersection(self) -> float:
        if self.stage1_full is None or self.stage1_sub is None:
            raise MissingCohortError("stage-1 F and S p-values are both required "
                                     "for the intersection slot")
        return hochberg_intersection(self.stage1_full, self.stage1_sub)

    def stage2_intersection(self) -> float:
        if self.stage2_full is None or self.stage2_sub is None:
            raise MissingCohortError("stage-2 F and S p-values are both required "
                                     "for the intersection slot")
        return hochberg_intersection(self.stage2_full, self.stage2_sub)


class MissingCohortError(ValueError):
    """A scenario requires a cohort p-value slot that was not supplied."""


def _require(value: Optional[float], slot: str) -> float:
    if value is None:
        raise MissingCohortError(f"missing cohort p-value slot: {slot}")
    return value


def scenario_wiring(
    scenario: Scenario,
    endpoint: Endpoint,
    cohorts: CohortPValues,
) -> List[Tuple[TestTarget, float, float]]:
    """(target, p1, p2) triples to combine for one endpoint at one analysis."""
    fs = intersection_target(endpoint)
    h_full = HypothesisId(Population.FULL, endpoint)
    h_sub = HypothesisId(Population.SUB, endpoint)
    if scenario is Scenario.S_ONLY:
        p2 = _require(cohorts.stage2_sub, f"stage2/sub/{endpoint.value}")
        return [
            (fs, cohorts.stage1_intersection(), p2),
            (h_sub, _require(cohorts.stage1_sub, f"stage1/sub/{endpoint.value}"), p2),
        ]
    if scenario is Scenario.F_ONLY:
        p2 = _require(cohorts.stage2_full, f"stage2/full/{endpoint.value}")
        return [
            (fs, cohorts.stage1_intersection(), p2),
            (h_full, _require(cohorts.stage1_full, f"stage1/full/{endpoint.value}"), p2),
        ]
    if scenario is Scenario.BOTH:
        return [
            (fs, cohorts.stage1_intersection(), cohorts.stage2_intersection()),
            (h_full,
             _require(cohorts.stage1_full, f"stage1/full/{endpoint.value}"),
             _require(cohorts.stage2_full, f"stage2/full/{endpoint.value}")),
            (h_sub,
             _require(cohorts.stage1_sub, f"stage1/sub/{endpoint.value}"),
             _require(cohorts.stage2_sub, f"stage2/sub/{endpoint.value}")),
        ]
    raise ValueError(f"unknown scenario {scenario}")
