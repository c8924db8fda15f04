"""Design evaluation for gated group sequential trials with subpopulation
selection and dual time-to-event endpoints."""

from .boundaries import (BoundarySet, SpendingFunction, SpendingKind,
                         cached_boundaries, compute_boundaries,
                         crossing_probability, crossing_probability_mvn, spend)
from .combine import (CohortPValues, Scenario, StageWeights, event_weights,
                      inverse_normal, scenario_wiring)
from .engine import (AnalysisRecord, DecisionTrace, DesignKind, DesignSpec,
                     ObservedData, TestRecord, analyze_observed,
                     render_narrative, run_design)
from .futility import (FutilityRule, Selection, SelectionDecision,
                       calibrate_threshold, select_population)
from .multiplicity import (HYPOTHESES, Endpoint, HypothesisGraph, HypothesisId,
                           Population, hochberg_intersection,
                           intersection_boundary)
from .simdata import (AnalysisSnapshot, AnalysisTrigger, ScenarioSpec,
                      TrialData, cox_hazard_ratio, generate_trial,
                      logrank_test, schedule_analyses, snapshot_at)

__version__ = "0.1.0"
