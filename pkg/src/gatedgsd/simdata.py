"""Trial data simulation and analysis-time summary statistics.

Patients enroll uniformly over the accrual window, are randomized 1:1, and
carry independent latent exponential event and dropout times per endpoint.
Snapshots censor at the analysis cutoff and produce cohort-wise logrank
p-values plus Cox hazard-ratio estimates for the futility gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .multiplicity import Endpoint, Population
from .numerics import norm_cdf

__all__ = [
    "ScenarioSpec",
    "AnalysisTrigger",
    "TrialData",
    "AnalysisSnapshot",
    "SchedulingError",
    "generate_trial",
    "schedule_analyses",
    "snapshot_at",
    "logrank_test",
    "cox_hazard_ratio",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class AnalysisTrigger:
    """Pooled full-population event target that opens one analysis."""

    endpoint: Endpoint
    events: int


@dataclass(frozen=True)
class ScenarioSpec:
    """Simulation truth: enrollment, event-time, and scheduling parameters."""

    name: str
    sample_size: int
    sub_prevalence: float
    enroll_duration: float  # months
    stage1_cutoff: float  # calendar months; enrollment before this is stage 1
    median_sub: Dict[Endpoint, float] = field(default_factory=dict)
    median_complement: Dict[Endpoint, float] = field(default_factory=dict)
    hr_sub: Dict[Endpoint, float] = field(default_factory=dict)
    hr_complement: Dict[Endpoint, float] = field(default_factory=dict)
    annual_dropout: Dict[Endpoint, float] = field(default_factory=dict)
    triggers: Tuple[AnalysisTrigger, ...] = ()
    # Hypotheses counted as true nulls for FWER accounting; None derives the
    # set from the configured hazard ratios.
    null_hypotheses: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if not 0.0 < self.sub_prevalence <= 1.0:
            raise ValueError("sub_prevalence must lie in (0, 1]")
        if self.sample_size <= 0 or self.enroll_duration <= 0:
            raise ValueError("sample size and enrollment duration must be positive")
        for m in (self.median_sub, self.median_complement):
            if any(v <= 0 for v in m.values()):
                raise ValueError("medians must be positive")
        if any(v <= 0 for v in list(self.hr_sub.values()) + list(self.hr_complement.values())):
            raise ValueError("hazard ratios must be positive")
        counts: Dict[Endpoint, int] = {}
        for tr in self.triggers:
            prev = counts.get(tr.endpoint, 0)
            if tr.events < prev:
                raise ValueError("analysis triggers must be nondecreasing per endpoint")
            counts[tr.endpoint] = tr.events

    def under_global_null(self) -> "ScenarioSpec":
        """Copy with every hazard ratio forced to 1 (FWER runs)."""
        ones = {ep: 1.0 for ep in Endpoint}
        return ScenarioSpec(
            name=f"{self.name}-null",
            sample_size=self.sample_size,
            sub_prevalence=self.sub_prevalence,
            enroll_duration=self.enroll_duration,
            stage1_cutoff=self.stage1_cutoff,
            median_sub=dict(self.median_sub),
            median_complement=dict(self.median_complement),
            hr_sub=ones,
            hr_complement=dict(ones),
            annual_dropout=dict(self.annual_dropout),
            triggers=self.triggers,
            null_hypotheses=("full_os", "full_pfs", "sub_os", "sub_pfs"),
        )


class TrialData:
    """Column-oriented patient records for one simulated trial."""

    def __init__(self, enroll_time, in_subgroup, experimental, event_time, dropout_time):
        self.enroll_time = enroll_time
        self.in_subgroup = in_subgroup
        self.experimental = experimental
        self.event_time = event_time  # {Endpoint: latent times from enrollment}
        self.dropout_time = dropout_time

    def __len__(self) -> int:
        return len(self.enroll_time)

    def stage(self, cutoff: float) -> np.ndarray:
        """Stage labels: 1 for enrollment strictly before the cutoff."""
        return np.where(self.enroll_time < cutoff, 1, 2)

    def to_rows(self, cutoff: float) -> List[Dict[str, float]]:
        stage = self.stage(cutoff)
        rows = []
        for i in range(len(self)):
            rows.append({
                "enroll_time": float(self.enroll_time[i]),
                "stage": int(stage[i]),
                "in_subgroup": bool(self.in_subgroup[i]),
                "arm": "experimental" if self.experimental[i] else "control",
                "pfs_time": float(self.event_time[Endpoint.PFS][i]),
                "os_time": float(self.event_time[Endpoint.OS][i]),
                "pfs_dropout": float(self.dropout_time[Endpoint.PFS][i]),
                "os_dropout": float(self.dropout_time[Endpoint.OS][i]),
            })
        return rows


def _monthly_dropout_hazard(annual_rate: float) -> float:
    if not 0.0 <= annual_rate < 1.0:
        raise ValueError(f"annual dropout rate must lie in [0, 1): {annual_rate}")
    return -math.log(1.0 - annual_rate) / 12.0 if annual_rate > 0 else 0.0


def generate_trial(spec: ScenarioSpec, seed) -> TrialData:
    """Simulate one trial; deterministic given (spec, seed)."""
    rng = np.random.default_rng(seed)
    n = spec.sample_size
    enroll = rng.uniform(0.0, spec.enroll_duration, size=n)
    in_sub = rng.random(n) < spec.sub_prevalence
    exp_arm = rng.random(n) < 0.5
    event_time: Dict[Endpoint, np.ndarray] = {}
    dropout_time: Dict[Endpoint, np.ndarray] = {}
    for ep in Endpoint:
        base = np.where(in_sub, LN2 / spec.median_sub[ep], LN2 / spec.median_complement[ep])
        hr = np.where(in_sub, spec.hr_sub[ep], spec.hr_complement[ep])
        hazard = base * np.where(exp_arm, hr, 1.0)
        event_time[ep] = rng.exponential(1.0, size=n) / hazard
        mu = _monthly_dropout_hazard(spec.annual_dropout.get(ep, 0.0))
        if mu > 0:
            dropout_time[ep] = rng.exponential(1.0 / mu, size=n)
        else:
            dropout_time[ep] = np.full(n, np.inf)
    return TrialData(enroll, in_sub, exp_arm, event_time, dropout_time)


class SchedulingError(RuntimeError):
    """An analysis trigger exceeds the achievable event count."""


def _observed_event_calendar_times(trial: TrialData, ep: Endpoint) -> np.ndarray:
    """Calendar times of events that are observable (not lost to dropout)."""
    observed = trial.event_time[ep] <= trial.dropout_time[ep]
    return np.sort(trial.enroll_time[observed] + trial.event_time[ep][observed])


def schedule_analyses(trial: TrialData, spec: ScenarioSpec) -> List[float]:
    """Calendar time of each analysis: when its pooled event target is met."""
    times: List[float] = []
    cal = {ep: _observed_event_calendar_times(trial, ep) for ep in Endpoint}
    for k, tr in enumerate(spec.triggers):
        avail = cal[tr.endpoint]
        if tr.events > len(avail):
            raise SchedulingError(
                f"analysis {k + 1} needs {tr.events} {tr.endpoint.value} events; "
                f"only {len(avail)} ever occur"
            )
        t = float(avail[tr.events - 1]) if tr.events >= 1 else 0.0
        if times and t < times[-1]:
            t = times[-1]
        times.append(t)
    return times


def _censor(trial: TrialData, ep: Endpoint, time: float, mask: np.ndarray):
    """Observed (duration, event flag) for selected patients at a cutoff."""
    enrolled = trial.enroll_time < time
    sel = mask & enrolled
    follow = time - trial.enroll_time[sel]
    latent = trial.event_time[ep][sel]
    drop = trial.dropout_time[ep][sel]
    duration = np.minimum(latent, np.minimum(drop, follow))
    status = latent <= np.minimum(drop, follow)
    return duration, status, trial.experimental[sel]


def logrank_test(duration: np.ndarray, status: np.ndarray, experimental: np.ndarray):
    """One-sided logrank test; Z > 0 favors the experimental arm.

    Returns (z, one_sided_p, events). A stratum with no events carries no
    evidence: (0, 1, 0).
    """
    total_events = int(status.sum())
    if total_events == 0 or experimental.all() or (~experimental).all():
        return 0.0, 1.0, total_events
    order = np.argsort(duration, kind="stable")
    d = duration[order]
    s = status[order].astype(np.float64)
    x = experimental[order].astype(np.float64)
    n = len(d)
    # At-risk counts immediately before each row's time.
    at_risk_total = n - np.arange(n)
    at_risk_exp = np.cumsum(x[::-1])[::-1]
    # Collapse tied event times.
    event_rows = s > 0
    t_ev = d[event_rows]
    uniq, inv = np.unique(t_ev, return_inverse=True)
    d_exp = np.bincount(inv, weights=x[event_rows], minlength=len(uniq))
    d_tot = np.bincount(inv, weights=np.ones(int(event_rows.sum())), minlength=len(uniq))
    first_idx = np.searchsorted(d, uniq, side="left")
    n_tot = at_risk_total[first_idx].astype(np.float64)
    n_exp = at_risk_exp[first_idx]
    expected = d_tot * n_exp / n_tot
    with np.errstate(invalid="ignore", divide="ignore"):
        var = d_tot * (n_exp / n_tot) * (1.0 - n_exp / n_tot) * (n_tot - d_tot) / np.maximum(n_tot - 1.0, 1.0)
    u = float(np.sum(d_exp - expected))
    v = float(np.sum(var))
    if v <= 0.0:
        return 0.0, 1.0, total_events
    z = -u / math.sqrt(v)  # fewer experimental events than expected => z > 0
    return z, 1.0 - norm_cdf(z), total_events


def cox_hazard_ratio(duration: np.ndarray, status: np.ndarray, experimental: np.ndarray,
                     tol: float = 1e-8, max_iter: int = 50) -> float:
    """Cox partial-likelihood HR for a single treatment indicator.

    Breslow tie handling; Newton iteration from log HR = 0 until the score
    drops below tol.
    """
    if status.sum() == 0:
        raise ValueError("no events: hazard ratio is not estimable")
    order = np.argsort(duration, kind="stable")
    d = duration[order]
    s = status[order]
    x = experimental[order].astype(np.float64)
    n = len(d)
    at_risk_start = np.searchsorted(d, d[s], side="left")  # first index still at risk
    x_events = x[s]
    # Risk-set sums computed from reverse cumulative sums.
    beta = 0.0
    for _ in range(max_iter):
        w = np.exp(beta * x)
        rev_w = np.cumsum(w[::-1])[::-1]
        rev_wx = np.cumsum((w * x)[::-1])[::-1]
        s0 = rev_w[at_risk_start]
        s1 = rev_wx[at_risk_start]
        mean = s1 / s0
        score = float(np.sum(x_events - mean))
        info = float(np.sum(mean * (1.0 - mean)))
        if info <= 0.0:
            break
        step = score / info
        beta += step
        if abs(score) < tol:
            break
    return math.exp(beta)


Cohort = str  # "stage1" | "stage2" | "pooled"
SlotKey = Tuple[Cohort, Population, Endpoint]


@dataclass(frozen=True)
class AnalysisSnapshot:
    """Per-analysis summary: event counts and one-sided p per slot."""

    calendar_time: float
    events: Dict[SlotKey, int]
    z: Dict[SlotKey, float]
    p: Dict[SlotKey, float]
    zero_event_slots: Tuple[SlotKey, ...] = ()
    hr_full: Optional[float] = None
    hr_sub: Optional[float] = None


def snapshot_at(trial: TrialData, time: float, spec: ScenarioSpec,
                with_hr: bool = False) -> AnalysisSnapshot:
    """Summaries of all (cohort, population, endpoint) slots at a cutoff."""
    if time < 0:
        raise ValueError("snapshot time must be nonnegative")
    stage = trial.stage(spec.stage1_cutoff)
    cohort_masks = {
        "stage1": stage == 1,
        "stage2": stage == 2,
        "pooled": np.ones(len(trial), dtype=bool),
    }
    pop_masks = {
        Population.FULL: np.ones(len(trial), dtype=bool),
        Population.SUB: trial.in_subgroup,
    }
    events: Dict[SlotKey, int] = {}
    zs: Dict[SlotKey, float] = {}
    ps: Dict[SlotKey, float] = {}
    flagged: List[SlotKey] = []
    for cohort, cmask in cohort_masks.items():
        for pop, pmask in pop_masks.items():
            for ep in Endpoint:
                dur, st, arm = _censor(trial, ep, time, cmask & pmask)
                z, p, n_ev = logrank_test(dur, st, arm)
                key = (cohort, pop, ep)
                events[key], zs[key], ps[key] = n_ev, z, p
                if n_ev == 0:
                    flagged.append(key)
    hr_full = hr_sub = None
    if with_hr:
        s1 = cohort_masks["stage1"]
        dur, st, arm = _censor(trial, Endpoint.PFS, time, s1)
        hr_full = cox_hazard_ratio(dur, st, arm) if st.sum() else None
        dur, st, arm = _censor(trial, Endpoint.PFS, time, s1 & trial.in_subgroup)
        hr_sub = cox_hazard_ratio(dur, st, arm) if st.sum() else None
    return AnalysisSnapshot(
        calendar_time=time,
        events=events,
        z=zs,
        p=ps,
        zero_event_slots=tuple(flagged),
        hr_full=hr_full,
        hr_sub=hr_sub,
    )
