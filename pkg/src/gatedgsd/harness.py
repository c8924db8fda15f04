"""Monte Carlo driver: replicate trials, run every design arm, aggregate.

One replication generates a single dataset, schedules the analyses from its
pooled event counts, snapshots the test statistics once, and then feeds the
same snapshots to every design arm (the designs differ only in how they
test, not in the data). Aggregation is an associative fold over replication
outcomes, so replications can be partitioned across processes without
changing the result.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .engine import ANALYSIS_NAMES, DesignKind, DesignSpec, run_design
from .multiplicity import HYPOTHESES, Endpoint, HypothesisId, Population
from .simdata import ScenarioSpec, generate_trial, schedule_analyses, snapshot_at

__all__ = [
    "DesignAggregate",
    "SimulationReport",
    "run_monte_carlo",
    "summarize",
    "write_tables",
    "write_manifest",
    "atomic_write_text",
    "true_null_hypotheses",
]

_SLUG = {
    "full_pfs": HypothesisId(Population.FULL, Endpoint.PFS),
    "full_os": HypothesisId(Population.FULL, Endpoint.OS),
    "sub_pfs": HypothesisId(Population.SUB, Endpoint.PFS),
    "sub_os": HypothesisId(Population.SUB, Endpoint.OS),
}


def true_null_hypotheses(setting: ScenarioSpec) -> Tuple[HypothesisId, ...]:
    """Hypotheses whose configured hazard ratios make them true nulls."""
    if setting.null_hypotheses is not None:
        return tuple(_SLUG[s] for s in setting.null_hypotheses)
    nulls = []
    for h in HYPOTHESES:
        hr_s = setting.hr_sub.get(h.endpoint, 1.0)
        hr_c = setting.hr_complement.get(h.endpoint, 1.0)
        is_null = hr_s == 1.0 if h.population is Population.SUB else (
            hr_s == 1.0 and hr_c == 1.0)
        if is_null:
            nulls.append(h)
    return tuple(nulls)


TERMINATION_BINS = ("futility",) + ANALYSIS_NAMES[:3]


@dataclass
class DesignAggregate:
    """Counting accumulator for one design arm; merged associatively."""

    n: int = 0
    fwer_hits: int = 0
    power_s_hits: int = 0
    power_sorf_hits: int = 0
    rejection_counts: Dict[str, int] = field(default_factory=dict)
    termination: Dict[str, int] = field(
        default_factory=lambda: {b: 0 for b in TERMINATION_BINS})

    def add(self, confirmed: Mapping[str, int], term_bin: str,
            nulls: Sequence[HypothesisId], eligible_pops: Sequence[Population]):
        self.n += 1
        if any(str(h) in confirmed for h in nulls):
            self.fwer_hits += 1
        both = {
            pop: all(str(HypothesisId(pop, ep)) in confirmed for ep in Endpoint)
            for pop in Population
        }
        if both[Population.SUB]:
            self.power_s_hits += 1
        if any(both[pop] for pop in eligible_pops):
            self.power_sorf_hits += 1
        for label in confirmed:
            self.rejection_counts[label] = self.rejection_counts.get(label, 0) + 1
        self.termination[term_bin] = self.termination.get(term_bin, 0) + 1

    def merge(self, other: "DesignAggregate") -> "DesignAggregate":
        out = DesignAggregate(
            n=self.n + other.n,
            fwer_hits=self.fwer_hits + other.fwer_hits,
            power_s_hits=self.power_s_hits + other.power_s_hits,
            power_sorf_hits=self.power_sorf_hits + other.power_sorf_hits,
        )
        for src in (self.rejection_counts, other.rejection_counts):
            for k, v in src.items():
                out.rejection_counts[k] = out.rejection_counts.get(k, 0) + v
        for src in (self.termination, other.termination):
            for k, v in src.items():
                out.termination[k] = out.termination.get(k, 0) + v
        return out

    # -- point estimates with binomial Monte Carlo standard errors -------

    def _rate(self, hits: int) -> Tuple[float, float]:
        if self.n == 0:
            return math.nan, math.nan
        p = hits / self.n
        return p, math.sqrt(p * (1.0 - p) / self.n)

    @property
    def fwer(self):
        return self._rate(self.fwer_hits)

    @property
    def power_s(self):
        return self._rate(self.power_s_hits)

    @property
    def power_sorf(self):
        return self._rate(self.power_sorf_hits)

    @property
    def reached_fa_fraction(self) -> float:
        return self.termination.get("FA", 0) / self.n if self.n else math.nan


@dataclass
class SimulationReport:
    setting: str
    seed: int
    n_rep: int
    true_nulls: Tuple[str, ...]
    arms: Dict[str, DesignAggregate] = field(default_factory=dict)

    def merge(self, other: "SimulationReport") -> "SimulationReport":
        if other.setting != self.setting or other.seed != self.seed:
            raise ValueError("cannot merge reports from different runs")
        merged = SimulationReport(self.setting, self.seed,
                                  self.n_rep + other.n_rep, self.true_nulls)
        for label in {**self.arms, **other.arms}:
            a = self.arms.get(label, DesignAggregate())
            b = other.arms.get(label, DesignAggregate())
            merged.arms[label] = a.merge(b)
        return merged


def _termination_bin(trace) -> str:
    if trace.termination_reason == "futility":
        return "futility"
    return ANALYSIS_NAMES[trace.termination_index]


def _run_chunk(setting: ScenarioSpec, designs: Sequence[DesignSpec],
               seed: int, reps: Iterable[int]) -> SimulationReport:
    nulls = true_null_hypotheses(setting)
    null_set = set(nulls)
    eligible = [pop for pop in Population
                if any(h.population is pop and h not in null_set for h in HYPOTHESES)]
    report = SimulationReport(setting.name, seed, 0, tuple(str(h) for h in nulls))
    for d in designs:
        report.arms[d.label] = DesignAggregate()
    for rep in reps:
        trial = generate_trial(setting, (seed, rep))
        times = schedule_analyses(trial, setting)
        snaps = [snapshot_at(trial, t, setting) for t in times]
        fsnap = snapshot_at(trial, setting.stage1_cutoff, setting, with_hr=True)
        for d in designs:
            trace = run_design(d, snaps, fsnap)
            report.arms[d.label].add(
                trace.confirmed(), _termination_bin(trace), nulls, eligible)
        report.n_rep += 1
    return report


def run_monte_carlo(setting: ScenarioSpec, designs: Sequence[DesignSpec],
                    n_rep: int, seed: int, threads: int = 1) -> SimulationReport:
    """Replicate `n_rep` trials through every design arm.

    Deterministic for a given (setting, designs, n_rep, seed): replication
    r draws from the dedicated substream seeded by (seed, r), so the result
    does not depend on how replications are partitioned across workers.
    """
    if n_rep < 1:
        raise ValueError("n_rep must be >= 1")
    labels = [d.label for d in designs]
    if len(set(labels)) != len(labels):
        raise ValueError(f"design labels must be unique: {labels}")
    if threads <= 1 or n_rep < 4 * threads:
        return _run_chunk(setting, designs, seed, range(n_rep))
    import multiprocessing as mp

    chunks = [range(i, n_rep, threads) for i in range(threads)]
    with mp.get_context("fork").Pool(threads) as pool:
        parts = pool.starmap(
            _run_chunk, [(setting, designs, seed, c) for c in chunks])
    report = parts[0]
    for part in parts[1:]:
        report = report.merge(part)
    return report


# -- tables and files ------------------------------------------------------


def summarize(reports: Sequence[SimulationReport]) -> Dict[str, List[dict]]:
    """Long-format rows for the FWER, power, and termination tables."""
    if not reports:
        raise ValueError("no reports to summarize")
    fwer_rows, power_rows, term_rows = [], [], []
    for rep in reports:
        for label in sorted(rep.arms):
            agg = rep.arms[label]
            fwer, fwer_se = agg.fwer
            ps, ps_se = agg.power_s
            psf, psf_se = agg.power_sorf
            base = {"setting": rep.setting, "arm": label, "reps": agg.n,
                    "seed": rep.seed}
            fwer_rows.append({**base,
                              "has_true_nulls": bool(rep.true_nulls),
                              "fwer": round(fwer, 6), "se": round(fwer_se, 6)})
            power_rows.append({**base,
                               "power_s": round(ps, 6), "se_s": round(ps_se, 6),
                               "power_sorf": round(psf, 6), "se_sorf": round(psf_se, 6)})
            for b in TERMINATION_BINS:
                count = agg.termination.get(b, 0)
                term_rows.append({**base, "stage": b, "count": count,
                                  "fraction": round(count / agg.n, 6) if agg.n else math.nan})
    return {"fwer": fwer_rows, "power": power_rows, "termination": term_rows}


def atomic_write_text(path: str, text: str):
    """Write via a sibling temp file and rename; no partial files on error."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(rows: List[dict]) -> str:
    if not rows:
        return ""
    import io

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_tables(tables: Mapping[str, List[dict]], out_dir: str) -> Dict[str, str]:
    """Write fwer.csv, power.csv, termination.csv; returns path per table."""
    paths = {}
    for name, rows in tables.items():
        path = os.path.join(out_dir, f"{name}.csv")
        atomic_write_text(path, _csv_text(rows))
        paths[name] = path
    return paths


def write_manifest(out_dir: str, config_echo: dict, seed: int, n_rep: int,
                   table_paths: Mapping[str, str], extra: Optional[dict] = None):
    """Run manifest: config echo, seed, and a content hash over the outputs."""
    h = hashlib.sha256()
    for name in sorted(table_paths):
        with open(table_paths[name], "rb") as f:
            h.update(name.encode())
            h.update(f.read())
    manifest = {
        "seed": seed,
        "replications": n_rep,
        "outputs": {k: os.path.basename(v) for k, v in sorted(table_paths.items())},
        "content_sha256": h.hexdigest(),
        "config": config_echo,
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(out_dir, "manifest.json")
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
