"""Configuration loading: one YAML file describes a full evaluation run.

A config bundles the data-generating scenario, the per-design alpha
allocations, the combination-test weight sets, simulation controls, and
(optionally) observed values for an analyze run. Validation is collected:
every problem in the file is reported in one pass, with its field path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import yaml

from .combine import StageWeights
from .engine import ANALYSIS_NAMES, DesignKind, DesignSpec, ObservedData
from .futility import FutilityRule
from .multiplicity import Endpoint, HypothesisId, Population
from .simdata import AnalysisTrigger, ScenarioSpec

__all__ = ["ConfigError", "RunConfig", "WeightSet", "parse_config", "build_designs"]

_HYPOTHESIS_SLUGS = {
    "full_pfs": HypothesisId(Population.FULL, Endpoint.PFS),
    "full_os": HypothesisId(Population.FULL, Endpoint.OS),
    "sub_pfs": HypothesisId(Population.SUB, Endpoint.PFS),
    "sub_os": HypothesisId(Population.SUB, Endpoint.OS),
}
_ENDPOINTS = {"pfs": Endpoint.PFS, "os": Endpoint.OS}


class ConfigError(ValueError):
    """All validation problems found in a config file, with field paths."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in errors))


@dataclass(frozen=True)
class WeightSet:
    """One pre-specified combination-weight choice per endpoint and look."""

    label: str
    event_driven: bool = False
    pfs: Tuple[StageWeights, ...] = ()
    os: Tuple[StageWeights, ...] = ()

    def for_endpoint(self, ep: Endpoint) -> Tuple[StageWeights, ...]:
        return self.pfs if ep is Endpoint.PFS else self.os


@dataclass(frozen=True)
class ObservedConfig:
    hr_full: Optional[float]
    hr_sub: Optional[float]
    # design slug -> ObservedData
    per_design: Dict[str, ObservedData] = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    name: str
    alpha: float
    scenario: ScenarioSpec
    alphas: Dict[str, Dict[HypothesisId, float]]  # "gsd" (also AD) and "ggsd"
    fractions: Dict[HypothesisId, Tuple[float, ...]]
    endpoint_analyses: Dict[Endpoint, Tuple[int, ...]]
    futility: FutilityRule
    weight_sets: Tuple[WeightSet, ...]
    reps: int
    seed: int
    observed: Optional[ObservedConfig] = None


class _Collector:
    """Walks the raw mapping, accumulating errors instead of raising."""

    def __init__(self):
        self.errors: List[str] = []

    def fail(self, path: str, message: str):
        self.errors.append(f"{path}: {message}")

    def expect_map(self, raw, path: str, allowed: Tuple[str, ...],
                   required: Tuple[str, ...] = ()) -> dict:
        if not isinstance(raw, dict):
            self.fail(path, f"expected a mapping, got {type(raw).__name__}")
            return {}
        for key in raw:
            if key not in allowed:
                self.fail(f"{path}.{key}", "unknown key")
        for key in required:
            if key not in raw:
                self.fail(f"{path}.{key}", "missing required key")
        return raw

    def number(self, raw: dict, path: str, key: str, default=None,
               lo=None, hi=None, integer=False):
        if key not in raw:
            return default
        v = raw[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"{path}.{key}", f"expected a number, got {v!r}")
            return default
        if integer and int(v) != v:
            self.fail(f"{path}.{key}", f"expected an integer, got {v!r}")
            return default
        if lo is not None and v < lo or hi is not None and v > hi:
            self.fail(f"{path}.{key}", f"value {v} outside [{lo}, {hi}]")
            return default
        return int(v) if integer else float(v)


def _endpoint_map(col: _Collector, raw, path: str) -> Dict[Endpoint, float]:
    out: Dict[Endpoint, float] = {}
    m = col.expect_map(raw, path, ("pfs", "os"), ("pfs", "os"))
    for slug, ep in _ENDPOINTS.items():
        v = col.number(m, path, slug)
        if v is not None:
            out[ep] = v
    return out


def _parse_scenario(col: _Collector, raw, name: str, alpha: float) -> Optional[ScenarioSpec]:
    m = col.expect_map(
        raw, "scenario",
        ("sample_size", "sub_prevalence", "enroll_duration", "stage1_cutoff",
         "medians", "hazard_ratios", "annual_dropout", "triggers"),
        ("sample_size", "sub_prevalence", "enroll_duration", "stage1_cutoff",
         "medians", "hazard_ratios", "annual_dropout", "triggers"))
    if not m:
        return None
    med = col.expect_map(m.get("medians", {}), "scenario.medians",
                         ("sub", "complement"), ("sub", "complement"))
    hrs = col.expect_map(m.get("hazard_ratios", {}), "scenario.hazard_ratios",
                         ("sub", "complement"), ("sub", "complement"))
    triggers = []
    raw_triggers = m.get("triggers", [])
    if not isinstance(raw_triggers, list) or not raw_triggers:
        col.fail("scenario.triggers", "expected a nonempty list")
        raw_triggers = []
    for i, t in enumerate(raw_triggers):
        tm = col.expect_map(t, f"scenario.triggers[{i}]",
                            ("endpoint", "events"), ("endpoint", "events"))
        ep = tm.get("endpoint")
        if ep not in _ENDPOINTS:
            col.fail(f"scenario.triggers[{i}].endpoint", f"expected pfs|os, got {ep!r}")
            continue
        n = col.number(tm, f"scenario.triggers[{i}]", "events", lo=1, integer=True)
        if n is not None:
            triggers.append(AnalysisTrigger(_ENDPOINTS[ep], n))
    if col.errors:
        return None
    try:
        return ScenarioSpec(
            name=name,
            sample_size=col.number(m, "scenario", "sample_size", lo=2, integer=True),
            sub_prevalence=col.number(m, "scenario", "sub_prevalence", lo=0.0, hi=1.0),
            enroll_duration=col.number(m, "scenario", "enroll_duration", lo=0.0),
            stage1_cutoff=col.number(m, "scenario", "stage1_cutoff", lo=0.0),
            median_sub=_endpoint_map(col, med.get("sub", {}), "scenario.medians.sub"),
            median_complement=_endpoint_map(col, med.get("complement", {}),
                                            "scenario.medians.complement"),
            hr_sub=_endpoint_map(col, hrs.get("sub", {}), "scenario.hazard_ratios.sub"),
            hr_complement=_endpoint_map(col, hrs.get("complement", {}),
                                        "scenario.hazard_ratios.complement"),
            annual_dropout=_endpoint_map(col, m.get("annual_dropout", {}),
                                         "scenario.annual_dropout"),
            triggers=tuple(triggers),
        )
    except (TypeError, ValueError) as exc:
        col.fail("scenario", str(exc))
        return None


def _parse_alphas(col: _Collector, raw, path: str, alpha: float,
                  per_population: bool) -> Dict[HypothesisId, float]:
    m = col.expect_map(raw, path, tuple(_HYPOTHESIS_SLUGS), tuple(_HYPOTHESIS_SLUGS))
    out: Dict[HypothesisId, float] = {}
    for slug, h in _HYPOTHESIS_SLUGS.items():
        v = col.number(m, path, slug, lo=0.0, hi=0.5)
        if v is not None:
            out[h] = v
    if len(out) == 4:
        tol = 1e-9
        if per_population:
            for pop, tag in ((Population.FULL, "full"), (Population.SUB, "sub")):
                total = sum(v for h, v in out.items() if h.population is pop)
                if abs(total - alpha) > tol:
                    col.fail(path, f"{tag}-population alphas sum to {total}, expected {alpha}")
        else:
            total = sum(out.values())
            if abs(total - alpha) > tol:
                col.fail(path, f"alphas sum to {total}, expected {alpha}")
    return out


def _parse_weight_pairs(col: _Collector, raw, path: str,
                        n_looks: int) -> Tuple[StageWeights, ...]:
    if not isinstance(raw, list) or len(raw) != n_looks:
        col.fail(path, f"expected a list of {n_looks} (w1^2, w2^2) pairs")
        return ()
    out = []
    for i, pair in enumerate(raw):
        if not isinstance(pair, list) or len(pair) != 2:
            col.fail(f"{path}[{i}]", f"expected [w1_squared, w2_squared], got {pair!r}")
            continue
        try:
            out.append(StageWeights.from_squares(float(pair[0]), float(pair[1])))
        except (TypeError, ValueError) as exc:
            col.fail(f"{path}[{i}]", str(exc))
    return tuple(out)


def _parse_weights(col: _Collector, raw, looks: Dict[Endpoint, int]) -> Tuple[WeightSet, ...]:
    if not isinstance(raw, list) or not raw:
        col.fail("weights", "expected a nonempty list of weight sets")
        return ()
    sets, labels = [], set()
    for i, entry in enumerate(raw):
        path = f"weights[{i}]"
        m = col.expect_map(entry, path, ("label", "event_driven", "pfs", "os"), ("label",))
        label = m.get("label")
        if not isinstance(label, str) or not label:
            col.fail(f"{path}.label", "expected a nonempty string")
            continue
        if label in labels:
            col.fail(f"{path}.label", f"duplicate weight-set label {label!r}")
        labels.add(label)
        if m.get("event_driven", False):
            sets.append(WeightSet(label=label, event_driven=True))
            continue
        sets.append(WeightSet(
            label=label,
            pfs=_parse_weight_pairs(col, m.get("pfs"), f"{path}.pfs", looks[Endpoint.PFS]),
            os=_parse_weight_pairs(col, m.get("os"), f"{path}.os", looks[Endpoint.OS]),
        ))
    return tuple(sets)


def _analysis_index(col: _Collector, key, path: str) -> Optional[int]:
    if isinstance(key, str) and key in ANALYSIS_NAMES:
        return ANALYSIS_NAMES.index(key)
    if isinstance(key, int) and 1 <= key <= len(ANALYSIS_NAMES):
        return key - 1
    col.fail(path, f"expected an analysis name {ANALYSIS_NAMES[:3]} or 1-based index, got {key!r}")
    return None


def _parse_observed(col: _Collector, raw) -> Optional[ObservedConfig]:
    m = col.expect_map(raw, "observed", ("hr_full", "hr_sub", "p_values"), ("p_values",))
    pv = m.get("p_values", {})
    if not isinstance(pv, dict):
        col.fail("observed.p_values", "expected a mapping keyed by design")
        pv = {}
    per_design: Dict[str, ObservedData] = {}
    hr_full = col.number(m, "observed", "hr_full", lo=0.0)
    hr_sub = col.number(m, "observed", "hr_sub", lo=0.0)
    for design_slug, slots in pv.items():
        if design_slug not in ("gsd", "ad", "ggsd"):
            col.fail(f"observed.p_values.{design_slug}", "unknown design (gsd|ad|ggsd)")
            continue
        dmap = col.expect_map(slots, f"observed.p_values.{design_slug}",
                              tuple(_HYPOTHESIS_SLUGS))
        p_values: Dict[HypothesisId, Dict[int, float]] = {}
        for slug, h in _HYPOTHESIS_SLUGS.items():
            if slug not in dmap:
                continue
            entry = dmap[slug]
            if not isinstance(entry, dict):
                col.fail(f"observed.p_values.{design_slug}.{slug}",
                         "expected a mapping of analysis -> p-value")
                continue
            per_look: Dict[int, float] = {}
            for key, p in entry.items():
                idx = _analysis_index(col, key, f"observed.p_values.{design_slug}.{slug}")
                if idx is None:
                    continue
                if isinstance(p, bool) or not isinstance(p, (int, float)) or not 0 < p <= 1:
                    col.fail(f"observed.p_values.{design_slug}.{slug}.{key}",
                             f"expected a p-value in (0, 1], got {p!r}")
                    continue
                per_look[idx] = float(p)
            p_values[h] = per_look
        per_design[design_slug] = ObservedData(
            hr_full=hr_full, hr_sub=hr_sub, p_values=p_values)
    return ObservedConfig(hr_full=hr_full, hr_sub=hr_sub, per_design=per_design)


def parse_config(path: str) -> RunConfig:
    """Load and fully validate a run configuration.

    Raises ConfigError listing every problem found, not just the first.
    """
    with open(path, "r") as f:
        try:
            raw = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigError([f"syntax: {exc}"]) from exc
    if raw is None:
        raise ConfigError(["file: empty configuration"])
    col = _Collector()
    top = col.expect_map(
        raw, "config",
        ("name", "alpha", "scenario", "designs", "weights", "simulation", "observed"),
        ("name", "alpha", "scenario", "designs", "weights", "simulation"))
    name = top.get("name") if isinstance(top.get("name"), str) else None
    if name is None:
        col.fail("config.name", "expected a string")
        name = "unnamed"
    alpha = col.number(top, "config", "alpha", default=0.025, lo=0.0, hi=0.5)

    designs = col.expect_map(
        top.get("designs", {}), "designs",
        ("endpoint_analyses", "fractions", "alphas", "futility"),
        ("endpoint_analyses", "fractions", "alphas", "futility"))

    ea_raw = col.expect_map(designs.get("endpoint_analyses", {}),
                            "designs.endpoint_analyses", ("pfs", "os"), ("pfs", "os"))
    endpoint_analyses: Dict[Endpoint, Tuple[int, ...]] = {}
    for slug, ep in _ENDPOINTS.items():
        val = ea_raw.get(slug)
        if not isinstance(val, list) or not all(isinstance(v, int) and v >= 1 for v in val):
            col.fail(f"designs.endpoint_analyses.{slug}",
                     "expected a list of 1-based analysis indices")
            endpoint_analyses[ep] = ()
        else:
            endpoint_analyses[ep] = tuple(v - 1 for v in val)

    fr_raw = col.expect_map(designs.get("fractions", {}), "designs.fractions",
                            ("full", "sub"), ("full", "sub"))
    fractions: Dict[HypothesisId, Tuple[float, ...]] = {}
    for pop_slug, pop in (("full", Population.FULL), ("sub", Population.SUB)):
        pm = col.expect_map(fr_raw.get(pop_slug, {}), f"designs.fractions.{pop_slug}",
                            ("pfs", "os"), ("pfs", "os"))
        for ep_slug, ep in _ENDPOINTS.items():
            val = pm.get(ep_slug)
            pth = f"designs.fractions.{pop_slug}.{ep_slug}"
            if not isinstance(val, list) or not all(
                    isinstance(v, (int, float)) and 0 < v <= 1 for v in val):
                col.fail(pth, "expected a list of fractions in (0, 1]")
                continue
            if len(val) != len(endpoint_analyses.get(ep, ())):
                col.fail(pth, f"{len(val)} fractions but endpoint has "
                              f"{len(endpoint_analyses.get(ep, ()))} planned analyses")
            fractions[HypothesisId(pop, ep)] = tuple(float(v) for v in val)

    al_raw = col.expect_map(designs.get("alphas", {}), "designs.alphas",
                            ("gsd", "ggsd"), ("gsd", "ggsd"))
    alphas = {
        "gsd": _parse_alphas(col, al_raw.get("gsd", {}), "designs.alphas.gsd",
                             alpha, per_population=False),
        "ggsd": _parse_alphas(col, al_raw.get("ggsd", {}), "designs.alphas.ggsd",
                              alpha, per_population=True),
    }

    fut_raw = col.expect_map(designs.get("futility", {}), "designs.futility",
                             ("theta_full", "theta_sub"), ("theta_full", "theta_sub"))
    futility = None
    tf = col.number(fut_raw, "designs.futility", "theta_full", lo=0.0)
    ts = col.number(fut_raw, "designs.futility", "theta_sub", lo=0.0)
    if tf and ts:
        futility = FutilityRule(theta_full=tf, theta_sub=ts)

    looks = {ep: len(v) for ep, v in endpoint_analyses.items()}
    weight_sets = _parse_weights(col, top.get("weights"), looks)

    sim = col.expect_map(top.get("simulation", {}), "simulation",
                         ("reps", "seed"), ("reps", "seed"))
    reps = col.number(sim, "simulation", "reps", default=2000, lo=1, integer=True)
    seed = col.number(sim, "simulation", "seed", default=0, integer=True)

    observed = None
    if "observed" in top:
        observed = _parse_observed(col, top["observed"])

    scenario = _parse_scenario(col, top.get("scenario", {}), name, alpha)
    if col.errors:
        raise ConfigError(col.errors)
    return RunConfig(
        name=name, alpha=alpha, scenario=scenario, alphas=alphas,
        fractions=fractions, endpoint_analyses=endpoint_analyses,
        futility=futility, weight_sets=weight_sets, reps=reps, seed=seed,
        observed=observed)


def build_designs(config: RunConfig,
                  kinds: Tuple[str, ...] = ("gsd", "ad", "ggsd")) -> List[DesignSpec]:
    """Expand the config into concrete design arms.

    GSD ignores combination weights, so it contributes a single arm; AD and
    gGSD get one arm per weight set, labeled `kind:weight-label`.
    """
    arms: List[DesignSpec] = []
    common = dict(alpha=config.alpha, fractions=config.fractions,
                  endpoint_analyses=config.endpoint_analyses)
    try:
        if "gsd" in kinds:
            arms.append(DesignSpec(kind=DesignKind.GSD, label="gsd",
                                   initial_alphas=config.alphas["gsd"], **common))
        for ws in config.weight_sets:
            weights = {} if ws.event_driven else {
                ep: ws.for_endpoint(ep) for ep in Endpoint}
            shared = dict(weights=weights, event_driven_weights=ws.event_driven,
                          futility=config.futility, **common)
            if "ad" in kinds:
                arms.append(DesignSpec(kind=DesignKind.AD, label=f"ad:{ws.label}",
                                       initial_alphas=config.alphas["gsd"],
                                       special_graph=False, **shared))
            if "ggsd" in kinds:
                arms.append(DesignSpec(kind=DesignKind.GGSD, label=f"ggsd:{ws.label}",
                                       initial_alphas=config.alphas["ggsd"], **shared))
    except ValueError as exc:
        raise ConfigError([f"designs: {exc}"]) from exc
    return arms
