"""End-of-stage-1 futility gate and population selection.

Thresholds are calibrated from the large-sample normal model for the log
hazard ratio: log(HR_hat) ~ N(log(true HR), 4 / events) under equal
randomization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .numerics import norm_quantile

__all__ = ["FutilityRule", "Selection", "SelectionDecision", "calibrate_threshold", "select_population"]


def calibrate_threshold(true_hr: float, events: int, gamma: float) -> float:
    """Hazard-ratio threshold with P(HR_hat > theta | true_hr) = gamma."""
    if true_hr <= 0:
        raise ValueError("true_hr must be positive")
    if events < 4:
        raise ValueError(f"need at least 4 events for the variance model, got {events}")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    return true_hr * math.exp(norm_quantile(1.0 - gamma) * 2.0 / math.sqrt(events))


@dataclass(frozen=True)
class FutilityRule:
    """Pre-specified decision thresholds for the end-of-stage-1 gate."""

    theta_full: float
    theta_sub: float
    gamma_full: float = 0.05
    gamma_sub: float = 0.05
    assumed_hr_full: float = 0.7
    assumed_hr_sub: float = 0.7
    events_full: int = 0  # calibration event counts; informational
    events_sub: int = 0

    def __post_init__(self):
        if self.theta_full <= 0 or self.theta_sub <= 0:
            raise ValueError("thresholds must be positive")

    @classmethod
    def calibrated(cls, assumed_hr_full, events_full, assumed_hr_sub, events_sub, gamma=0.05):
        return cls(
            theta_full=calibrate_threshold(assumed_hr_full, events_full, gamma),
            theta_sub=calibrate_threshold(assumed_hr_sub, events_sub, gamma),
            gamma_full=gamma,
            gamma_sub=gamma,
            assumed_hr_full=assumed_hr_full,
            assumed_hr_sub=assumed_hr_sub,
            events_full=events_full,
            events_sub=events_sub,
        )


class Selection(Enum):
    CONTINUE_BOTH = "continue_both"
    CONTINUE_SUB_ONLY = "continue_sub_only"
    CONTINUE_FULL_ONLY = "continue_full_only"
    STOP_FUTILITY = "stop_futility"


@dataclass(frozen=True)
class SelectionDecision:
    selection: Selection
    hr_full: float
    hr_sub: float


def select_population(hr_full: float, hr_sub: float, rule: FutilityRule) -> SelectionDecision:
    """Population-selection decision from the observed stage-1 PFS HRs.

    The passing condition is strict (< theta); an HR exactly at the
    threshold fails the gate.
    """
    if hr_full <= 0 or hr_sub <= 0:
        raise ValueError("hazard ratios must be positive")
    full_ok = hr_full < rule.theta_full
    sub_ok = hr_sub < rule.theta_sub
    if full_ok and sub_ok:
        sel = Selection.CONTINUE_BOTH
    elif sub_ok:
        sel = Selection.CONTINUE_SUB_ONLY
    elif full_ok:
        sel = Selection.CONTINUE_FULL_ONLY
    else:
        sel = Selection.STOP_FUTILITY
    return SelectionDecision(selection=sel, hr_full=hr_full, hr_sub=hr_sub)
