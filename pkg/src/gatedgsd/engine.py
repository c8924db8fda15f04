"""Per-trial decision engines for the three designs.

GSD tests all four hypotheses on pooled data with the graphical procedure
and group-sequential boundaries. AD and gGSD apply the futility gate at the
end of stage 1, then combine stage-wise p-values per the continuation
scenario; gGSD additionally tests the populations hierarchically, each
carrying the full alpha internally.

Within one analysis, testing iterates (test, reject, reallocate, recompute
boundaries, retest) to a fixed point, and boundary recomputation after an
alpha increase re-evaluates already-passed looks against the new lower
critical values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .boundaries import SpendingKind, cached_boundaries
from .combine import (CohortPValues, Scenario, StageWeights, clamp_p,
                      event_weights, intersection_target, inverse_normal, scenario_wiring)
from .futility import FutilityRule, Selection, SelectionDecision, select_population
from .multiplicity import (HYPOTHESES, Endpoint, HypothesisGraph, HypothesisId,
                           Population, hochberg_intersection, intersection_boundary)
from .numerics import norm_cdf, norm_quantile
from .simdata import AnalysisSnapshot

__all__ = [
    "DesignKind",
    "DesignSpec",
    "ObservedData",
    "TestRecord",
    "AnalysisRecord",
    "DecisionTrace",
    "run_design",
    "analyze_observed",
    "render_narrative",
]

TestTarget = Union[HypothesisId, Tuple[str, Endpoint]]

ANALYSIS_NAMES = ("IA1", "IA2", "FA", "IA4", "IA5")


def target_label(target: TestTarget) -> str:
    if isinstance(target, HypothesisId):
        return str(target)
    return f"{target[1].value.upper()}(FS)"


class DesignKind(Enum):
    GSD = "gsd"
    AD = "ad"
    GGSD = "ggsd"


class DesignConfigError(ValueError):
    """Inconsistent design specification."""


class MissingSlotError(ValueError):
    """A required snapshot or observed-data slot is absent."""


def _default_transitions() -> Dict[Tuple[HypothesisId, HypothesisId], float]:
    """Within-population PFS<->OS edges with weight 1, no cross-population."""
    trans = {}
    for pop in Population:
        pfs = HypothesisId(pop, Endpoint.PFS)
        os_ = HypothesisId(pop, Endpoint.OS)
        trans[(pfs, os_)] = 1.0
        trans[(os_, pfs)] = 1.0
    return trans


@dataclass(frozen=True)
class DesignSpec:
    """Everything pre-specified about one design arm."""

    kind: DesignKind
    alpha: float
    initial_alphas: Dict[HypothesisId, float]
    fractions: Dict[HypothesisId, Tuple[float, ...]]
    endpoint_analyses: Dict[Endpoint, Tuple[int, ...]]
    weights: Dict[Endpoint, Tuple[StageWeights, ...]] = field(default_factory=dict)
    event_driven_weights: bool = False
    transitions: Dict[Tuple[HypothesisId, HypothesisId], float] = field(
        default_factory=_default_transitions)
    spending: SpendingKind = SpendingKind.LAN_DEMETS_OBF
    futility: Optional[FutilityRule] = None
    special_graph: bool = True
    label: str = ""

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise DesignConfigError(f"alpha must lie in (0, 0.5): {self.alpha}")
        missing = [h for h in HYPOTHESES if h not in self.initial_alphas]
        if missing:
            raise DesignConfigError(f"initial alphas missing for {missing}")
        tol = 1e-9
        if self.kind in (DesignKind.GSD, DesignKind.AD):
            total = sum(self.initial_alphas.values())
            if abs(total - self.alpha) > tol:
                raise DesignConfigError(
                    f"{self.kind.value}: initial alphas sum to {total}, expected {self.alpha}")
        else:
            for pop in Population:
                total = sum(a for h, a in self.initial_alphas.items() if h.population is pop)
                if abs(total - self.alpha) > tol:
                    raise DesignConfigError(
                        f"ggsd: {pop.value} alphas sum to {total}, expected {self.alpha}")
        for h in HYPOTHESES:
            fr = self.fractions.get(h)
            looks = self.endpoint_analyses.get(h.endpoint)
            if fr is None or looks is None:
                raise DesignConfigError(f"fractions/analysis schedule missing for {h}")
            if len(fr) != len(looks):
                raise DesignConfigError(
                    f"{h}: {len(fr)} fractions but {len(looks)} planned analyses")
        if self.kind is not DesignKind.GSD and self.futility is None:
            raise DesignConfigError(f"{self.kind.value} requires a futility rule")
        if not self.event_driven_weights and self.kind is not DesignKind.GSD:
            for ep in Endpoint:
                w = self.weights.get(ep)
                if w is None or len(w) != len(self.endpoint_analyses[ep]):
                    raise DesignConfigError(f"weight table missing or misaligned for {ep}")

    @property
    def n_analyses(self) -> int:
        return 1 + max(max(v) for v in self.endpoint_analyses.values())

    def look_of(self, endpoint: Endpoint, analysis: int) -> Optional[int]:
        sched = self.endpoint_analyses[endpoint]
        return sched.index(analysis) if analysis in sched else None


@dataclass(frozen=True)
class TestRecord:
    target_label: str
    analysis: int
    look: int
    z: float
    boundary_z: float
    boundary_p: float
    alpha: float
    crossed: bool
    confirmed: bool


@dataclass
class AnalysisRecord:
    index: int
    calendar_time: Optional[float]
    tests: List[TestRecord] = field(default_factory=list)
    alpha_snapshot: Dict[str, float] = field(default_factory=dict)
    newly_rejected: List[str] = field(default_factory=list)


@dataclass
class DecisionTrace:
    design: str
    scenario: Optional[Scenario]
    futility: Optional[SelectionDecision]
    analyses: List[AnalysisRecord] = field(default_factory=list)
    rejected_at: Dict[str, int] = field(default_factory=dict)  # label -> analysis idx
    termination_index: Optional[int] = None
    termination_reason: str = ""  # futility | all-rejected | reached-FA
    warnings: List[str] = field(default_factory=list)

    def confirmed(self) -> Dict[str, int]:
        """Elementary rejections only (intersections carry an FS tag)."""
        return {k: v for k, v in self.rejected_at.items() if "(FS)" not in k}

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "scenario": self.scenario.value if self.scenario else None,
            "futility": None if self.futility is None else {
                "decision": self.futility.selection.value,
                "hr_full": self.futility.hr_full,
                "hr_sub": self.futility.hr_sub,
            },
            "termination": {
                "analysis": None if self.termination_index is None
                else ANALYSIS_NAMES[self.termination_index],
                "reason": self.termination_reason,
            },
            "rejections": {k: ANALYSIS_NAMES[v] for k, v in self.rejected_at.items()},
            "analyses": [
                {
                    "name": ANALYSIS_NAMES[a.index],
                    "calendar_time": a.calendar_time,
                    "alphas": a.alpha_snapshot,
                    "tests": [
                        {
                            "target": t.target_label,
                            "z": round(t.z, 6),
                            "boundary_z": round(t.boundary_z, 6),
                            "nominal_p": round(t.boundary_p, 8),
                            "alpha": round(t.alpha, 8),
                            "crossed": t.crossed,
                            "confirmed": t.confirmed,
                        }
                        for t in a.tests
                    ],
                    "newly_rejected": a.newly_rejected,
                }
                for a in self.analyses
            ],
            "warnings": self.warnings,
        }


def _scenario_of(decision: SelectionDecision) -> Optional[Scenario]:
    return {
        Selection.CONTINUE_BOTH: Scenario.BOTH,
        Selection.CONTINUE_SUB_ONLY: Scenario.S_ONLY,
        Selection.CONTINUE_FULL_ONLY: Scenario.F_ONLY,
        Selection.STOP_FUTILITY: None,
    }[decision.selection]


def _population_graph(design: DesignSpec, pop: Population,
                      special: bool) -> HypothesisGraph:
    """Graph over one population's two hypotheses.

    The gated design re-levels each population at the full alpha; for it the
    "special" shape starts all of the level on PFS with a handover edge to
    OS. The non-gated adaptive design keeps the hypotheses at their original
    allocations (alpha of dropped hypotheses is not reallocated: only a
    rejection moves alpha).
    """
    pfs = HypothesisId(pop, Endpoint.PFS)
    os_ = HypothesisId(pop, Endpoint.OS)
    trans = {(pfs, os_): 1.0, (os_, pfs): 1.0}
    if special:
        alphas = {pfs: design.alpha, os_: 0.0}
    else:
        alphas = {pfs: design.initial_alphas[pfs], os_: design.initial_alphas[os_]}
        trans = {k: v for k, v in design.transitions.items()
                 if k[0].population is pop and k[1].population is pop}
        if not trans:
            trans = {(pfs, os_): 1.0, (os_, pfs): 1.0}
    return HypothesisGraph(alphas=alphas, transitions=trans)


class _Engine:
    """Shared fixed-point testing machinery for simulated and observed data."""

    def __init__(self, design: DesignSpec, scenario: Optional[Scenario],
                 futility_decision: Optional[SelectionDecision]):
        self.design = design
        self.scenario = scenario
        self.trace = DecisionTrace(
            design=design.kind.value, scenario=scenario, futility=futility_decision)
        self.z_hist: Dict[TestTarget, Dict[int, float]] = {}
        # boundary/alpha in effect when a target was rejected, for reporting
        self.reject_info: Dict[str, Tuple[float, float]] = {}
        self.gate_open = not (design.kind is DesignKind.GGSD and scenario is Scenario.BOTH)
        self.graphs: List[HypothesisGraph] = []
        self.graph_of: Dict[HypothesisId, int] = {}
        self.in_scope: Tuple[HypothesisId, ...] = ()
        self._build_graphs()

    def _build_graphs(self):
        d = self.design
        if d.kind is DesignKind.GSD:
            self.graphs = [HypothesisGraph(alphas=dict(d.initial_alphas),
                                           transitions=dict(d.transitions))]
            self.graph_of = {h: 0 for h in HYPOTHESES}
            self.in_scope = HYPOTHESES
            return
        if self.scenario is Scenario.S_ONLY:
            g = _population_graph(d, Population.SUB, d.special_graph)
            self.graphs = [g]
            self.graph_of = {h: 0 for h in g.alphas}
            self.in_scope = tuple(sorted(g.alphas, key=str))
        elif self.scenario is Scenario.F_ONLY:
            g = _population_graph(d, Population.FULL, d.special_graph)
            self.graphs = [g]
            self.graph_of = {h: 0 for h in g.alphas}
            self.in_scope = tuple(sorted(g.alphas, key=str))
        else:  # BOTH
            if d.kind is DesignKind.GGSD:
                gs = _population_graph(d, Population.SUB, special=False)
                gf = _population_graph(d, Population.FULL, special=False)
                self.graphs = [gs, gf]
                self.graph_of = {h: (0 if h.population is Population.SUB else 1)
                                 for h in HYPOTHESES}
            else:  # AD: one graph, overall alpha across all four
                self.graphs = [HypothesisGraph(alphas=dict(d.initial_alphas),
                                               transitions=dict(d.transitions))]
                self.graph_of = {h: 0 for h in HYPOTHESES}
            self.in_scope = HYPOTHESES

    # -- state helpers -------------------------------------------------

    def _alpha(self, h: HypothesisId) -> float:
        return self.graphs[self.graph_of[h]].alpha(h)

    def _rejected(self, target: TestTarget) -> bool:
        return target_label(target) in self.trace.rejected_at

    def _bounds(self, h: HypothesisId):
        alpha = round(self._alpha(h), 12)
        return cached_boundaries(alpha, self.design.fractions[h], self.design.spending)

    def _testable(self, h: HypothesisId) -> bool:
        if h not in self.graph_of or self._rejected(h) or self._alpha(h) <= 0.0:
            return False
        if (self.design.kind is DesignKind.GGSD and self.scenario is Scenario.BOTH
                and h.population is Population.FULL and not self.gate_open):
            return False
        return True

    def _intersection_crossed(self, ep: Endpoint) -> Tuple[bool, float, float]:
        """Evaluate the FS intersection over all recorded looks.

        Boundary per look: minimum critical value over the member
        hypotheses currently carrying allocated alpha (and, for gGSD,
        admitted by the hierarchy gate).
        """
        hist = self.z_hist.get(intersection_target(ep), {})
        members = [HypothesisId(pop, ep) for pop in Population]
        live = [h for h in members if self._testable(h)]
        if not hist or not live:
            return False, math.nan, math.nan
        crossed = False
        last_c = math.nan
        for look, z in sorted(hist.items()):
            cs = []
            for h in live:
                b = self._bounds(h)
                if look < len(b.z_bounds):
                    cs.append(b.z_bounds[look])
            if not cs:
                continue
            c = intersection_boundary(cs)
            last_c = c
            if z >= c:
                crossed = True
        return crossed, last_c, hist[max(hist)]

    def _elementary_crossed(self, h: HypothesisId) -> Tuple[bool, float, float]:
        hist = self.z_hist.get(h, {})
        if not hist:
            return False, math.nan, math.nan
        b = self._bounds(h)
        crossed = any(z >= b.z_bounds[look] for look, z in hist.items()
                      if look < len(b.z_bounds))
        last_look = max(hist)
        c = b.z_bounds[min(last_look, len(b.z_bounds) - 1)]
        return crossed, c, hist[last_look]

    # -- the per-analysis fixed point -----------------------------------

    def run_analysis(self, k: int, calendar_time: Optional[float]):
        record = AnalysisRecord(index=k, calendar_time=calendar_time)
        changed = True
        while changed:
            changed = False
            if self.design.kind is not DesignKind.GSD:
                for ep in Endpoint:
                    tgt = intersection_target(ep)
                    if self._rejected(tgt):
                        continue
                    crossed, c, z = self._intersection_crossed(ep)
                    if crossed:
                        self.trace.rejected_at[target_label(tgt)] = k
                        self.reject_info[target_label(tgt)] = (c, math.nan)
                        changed = True
            for h in self.in_scope:
                if not self._testable(h) or h not in self.z_hist:
                    continue
                crossed, c, z = self._elementary_crossed(h)
                if not crossed:
                    continue
                if self.design.kind is not DesignKind.GSD:
                    fs = target_label(intersection_target(h.endpoint))
                    if fs not in self.trace.rejected_at:
                        continue  # blocked by the closed-testing gate
                label = target_label(h)
                self.trace.rejected_at[label] = k
                self.reject_info[label] = (c, self._alpha(h))
                record.newly_rejected.append(label)
                gi = self.graph_of[h]
                self.graphs[gi] = self.graphs[gi].reject(h)
                if h.population is Population.SUB:
                    self.gate_open = True
                changed = True
        self._record_tests(k, record)
        record.alpha_snapshot = {
            str(h): self._alpha(h) for h in self.in_scope
        }
        self.trace.analyses.append(record)

    def _record_tests(self, k: int, record: AnalysisRecord):
        """Snapshot every target's latest statistic against its boundary."""
        for target, hist in self.z_hist.items():
            look = max(hist)
            if isinstance(target, HypothesisId):
                if target not in self.graph_of:
                    continue
                alpha = self._alpha(target)
                if self._rejected(target):
                    c, alpha = self.reject_info[target_label(target)]
                    crossed = True
                elif alpha > 0.0:
                    b = self._bounds(target)
                    idx = min(look, len(b.z_bounds) - 1)
                    c = b.z_bounds[idx]
                    crossed = self._elementary_crossed(target)[0]
                else:
                    # Carrying no alpha (e.g. OS ahead of the special-graph
                    # handover): no live boundary to show.
                    c = math.nan
                    crossed = False
            else:
                if self._rejected(target):
                    c, _ = self.reject_info[target_label(target)]
                    crossed = True
                else:
                    crossed, c, _ = self._intersection_crossed(target[1])
                alpha = math.nan
            record.tests.append(TestRecord(
                target_label=target_label(target),
                analysis=k,
                look=look,
                z=hist[look],
                boundary_z=c,
                boundary_p=1.0 - norm_cdf(c) if not math.isnan(c) else math.nan,
                alpha=alpha,
                crossed=crossed,
                confirmed=self._rejected(target),
            ))

    def all_rejected(self) -> bool:
        return all(self._rejected(h) for h in self.in_scope)

    def finish(self, k: int):
        if self.all_rejected():
            self.trace.termination_index = k
            self.trace.termination_reason = "all-rejected"
            return True
        if k == self.design.n_analyses - 1:
            self.trace.termination_index = k
            self.trace.termination_reason = "reached-FA"
            return True
        return False


def _futility_trace(design: DesignSpec, decision: SelectionDecision) -> DecisionTrace:
    trace = DecisionTrace(design=design.kind.value, scenario=None, futility=decision)
    trace.termination_index = None
    trace.termination_reason = "futility"
    return trace


def _weights_for(design: DesignSpec, ep: Endpoint, look: int,
                 snap: AnalysisSnapshot) -> StageWeights:
    if design.event_driven_weights:
        n1 = snap.events[("stage1", Population.FULL, ep)]
        n2 = snap.events[("stage2", Population.FULL, ep)]
        if n1 + n2 == 0:
            return StageWeights(1.0, 0.0)
        return event_weights(n1, n2)
    return design.weights[ep][look]


def run_design(design: DesignSpec, snapshots: Sequence[AnalysisSnapshot],
               futility_snapshot: Optional[AnalysisSnapshot]) -> DecisionTrace:
    """Drive one simulated trial through a design and return its trace."""
    if len(snapshots) < design.n_analyses:
        raise MissingSlotError(
            f"design plans {design.n_analyses} analyses, got {len(snapshots)} snapshots")
    scenario = None
    futility_decision = None
    if design.kind is not DesignKind.GSD:
        if futility_snapshot is None or futility_snapshot.hr_full is None \
                or futility_snapshot.hr_sub is None:
            raise MissingSlotError("futility snapshot with stage-1 HR estimates is required")
        futility_decision = select_population(
            futility_snapshot.hr_full, futility_snapshot.hr_sub, design.futility)
        if futility_decision.selection is Selection.STOP_FUTILITY:
            return _futility_trace(design, futility_decision)
        scenario = _scenario_of(futility_decision)
    eng = _Engine(design, scenario, futility_decision)
    for k in range(design.n_analyses):
        snap = snapshots[k]
        for ep in Endpoint:
            look = design.look_of(ep, k)
            if look is None:
                continue
            if design.kind is DesignKind.GSD:
                for pop in Population:
                    h = HypothesisId(pop, ep)
                    eng.z_hist.setdefault(h, {})[look] = snap.z[("pooled", pop, ep)]
            else:
                cohorts = CohortPValues(
                    stage1_full=snap.p[("stage1", Population.FULL, ep)],
                    stage1_sub=snap.p[("stage1", Population.SUB, ep)],
                    stage2_full=snap.p[("stage2", Population.FULL, ep)],
                    stage2_sub=snap.p[("stage2", Population.SUB, ep)],
                )
                w = _weights_for(design, ep, look, snap)
                for target, p1, p2 in scenario_wiring(scenario, ep, cohorts):
                    _, clamped1 = clamp_p(p1)
                    _, clamped2 = clamp_p(p2)
                    if clamped1 or clamped2:
                        eng.trace.warnings.append(
                            f"analysis {k + 1}: degenerate p-value clamped for "
                            f"{target_label(target)}")
                    eng.z_hist.setdefault(target, {})[look] = inverse_normal(p1, p2, w)
        eng.run_analysis(k, snap.calendar_time)
        if eng.finish(k):
            break
    return eng.trace


@dataclass(frozen=True)
class ObservedData:
    """Observed-analysis inputs: futility HRs plus per-slot p-values.

    `p_values` maps hypothesis key ("full_pfs", "sub_os", ...) to a mapping
    of analysis index (0-based) to the already-combined one-sided p-value.
    `intersections` optionally supplies the per-endpoint FS intersection
    p-values; when absent the continuing population's slot is used
    (single-population scenarios) or the Hochberg combination of the two
    population slots (both-population scenarios).
    """

    hr_full: Optional[float] = None
    hr_sub: Optional[float] = None
    p_values: Mapping[HypothesisId, Mapping[int, float]] = field(default_factory=dict)
    intersections: Mapping[Endpoint, Mapping[int, float]] = field(default_factory=dict)


def _observed_z(p: float) -> float:
    p, _ = clamp_p(p)
    return norm_quantile(1.0 - p)


def analyze_observed(design: DesignSpec, observed: ObservedData) -> DecisionTrace:
    """Replay the decision logic on user-supplied observed values."""
    scenario = None
    futility_decision = None
    if design.kind is not DesignKind.GSD:
        if observed.hr_full is None or observed.hr_sub is None:
            raise MissingSlotError("observed futility hazard ratios are required")
        futility_decision = select_population(
            observed.hr_full, observed.hr_sub, design.futility)
        if futility_decision.selection is Selection.STOP_FUTILITY:
            return _futility_trace(design, futility_decision)
        scenario = _scenario_of(futility_decision)
    eng = _Engine(design, scenario, futility_decision)
    for k in range(design.n_analyses):
        for ep in Endpoint:
            look = design.look_of(ep, k)
            if look is None:
                continue
            for pop in Population:
                h = HypothesisId(pop, ep)
                p = observed.p_values.get(h, {}).get(k)
                if p is not None:
                    eng.z_hist.setdefault(h, {})[look] = _observed_z(p)
            if design.kind is DesignKind.GSD:
                continue
            p_fs = observed.intersections.get(ep, {}).get(k)
            if p_fs is None:
                p_full = observed.p_values.get(HypothesisId(Population.FULL, ep), {}).get(k)
                p_sub = observed.p_values.get(HypothesisId(Population.SUB, ep), {}).get(k)
                if scenario is Scenario.F_ONLY and p_full is not None:
                    p_fs = p_full
                elif scenario is Scenario.S_ONLY and p_sub is not None:
                    p_fs = p_sub
                elif p_full is not None and p_sub is not None:
                    p_fs = hochberg_intersection(p_full, p_sub)
            if p_fs is not None:
                eng.z_hist.setdefault(intersection_target(ep), {})[look] = _observed_z(p_fs)
        # Required slots for the selected scenario must be present.
        _check_required_slots(design, scenario, observed, k, eng)
        eng.run_analysis(k, None)
        if eng.finish(k):
            break
    return eng.trace


def _check_required_slots(design: DesignSpec, scenario: Optional[Scenario],
                          observed: ObservedData, k: int, eng: "_Engine"):
    needed_pops: Tuple[Population, ...]
    if design.kind is DesignKind.GSD or scenario is Scenario.BOTH:
        needed_pops = tuple(Population)
    elif scenario is Scenario.F_ONLY:
        needed_pops = (Population.FULL,)
    else:
        needed_pops = (Population.SUB,)
    for ep in Endpoint:
        look = design.look_of(ep, k)
        if look is None:
            continue
        for pop in needed_pops:
            h = HypothesisId(pop, ep)
            if eng._rejected(h):
                continue
            if look not in eng.z_hist.get(h, {}):
                raise MissingSlotError(
                    f"missing observed p-value for {h} at analysis {k + 1}")


def render_narrative(trace: DecisionTrace) -> str:
    """Plain-language account of an analyzed trial."""
    lines: List[str] = []
    design = trace.design.upper() if trace.design != "ggsd" else "gGSD"
    lines.append(f"Design: {design}")
    if trace.futility is not None:
        f = trace.futility
        lines.append(
            f"Futility analysis: HR(F) = {f.hr_full:.4g}, HR(S) = {f.hr_sub:.4g} "
            f"-> {f.selection.value.replace('_', ' ')}"
        )
    if trace.termination_reason == "futility":
        lines.append("Trial stopped for futility at the end of stage 1.")
        lines.append("No hypotheses tested")
        return "\n".join(lines)
    for rec in trace.analyses:
        name = ANALYSIS_NAMES[rec.index]
        for t in rec.tests:
            if "(FS)" in t.target_label:
                continue
            verdict = "rejected" if t.target_label in rec.newly_rejected else (
                "previously rejected" if t.confirmed else "not rejected")
            lines.append(
                f"{name}: {t.target_label} z = {t.z:.4f} vs boundary {t.boundary_z:.4f} "
                f"(nominal p {t.boundary_p:.4g}) -> {verdict}"
            )
    if trace.termination_index is not None:
        lines.append(
            f"Trial terminated at {ANALYSIS_NAMES[trace.termination_index]} "
            f"({trace.termination_reason})."
        )
    confirmed = trace.confirmed()
    if not confirmed:
        lines.append("No hypotheses rejected")
    else:
        ordered = sorted(confirmed.items(), key=lambda kv: (kv[1], kv[0]))
        lines.append("Rejections: " + "; ".join(
            f"{label} rejected at {ANALYSIS_NAMES[idx]}" for label, idx in ordered))
    return "\n".join(lines)
