"""Trial generation, analysis scheduling, and survival statistics."""

import numpy as np
import pytest
import scipy.stats

from gatedgsd.multiplicity import Endpoint, Population
from gatedgsd.simdata import (
    AnalysisTrigger,
    ScenarioSpec,
    SchedulingError,
    cox_hazard_ratio,
    generate_trial,
    logrank_test,
    schedule_analyses,
    snapshot_at,
)


def toy_spec(**overrides):
    base = dict(
        name="toy",
        sample_size=400,
        sub_prevalence=0.5,
        enroll_duration=24.0,
        stage1_cutoff=12.0,
        median_sub={Endpoint.PFS: 6.0, Endpoint.OS: 12.0},
        median_complement={Endpoint.PFS: 5.0, Endpoint.OS: 9.0},
        hr_sub={Endpoint.PFS: 0.7, Endpoint.OS: 0.7},
        hr_complement={Endpoint.PFS: 0.7, Endpoint.OS: 0.7},
        annual_dropout={Endpoint.PFS: 0.1, Endpoint.OS: 0.01},
        triggers=(
            AnalysisTrigger(Endpoint.PFS, 200),
            AnalysisTrigger(Endpoint.OS, 250),
        ),
    )
    base.update(overrides)
    return ScenarioSpec(**base)


def test_generation_deterministic_and_seed_sensitive():
    spec = toy_spec()
    a = generate_trial(spec, (11, 0))
    b = generate_trial(spec, (11, 0))
    c = generate_trial(spec, (11, 1))
    np.testing.assert_array_equal(a.enroll_time, b.enroll_time)
    np.testing.assert_array_equal(a.event_time[Endpoint.OS], b.event_time[Endpoint.OS])
    assert not np.array_equal(a.event_time[Endpoint.OS], c.event_time[Endpoint.OS])


def test_stage_split_and_prevalence():
    spec = toy_spec(sample_size=20000)
    trial = generate_trial(spec, (3, 0))
    stage = trial.stage(spec.stage1_cutoff)
    assert set(np.unique(stage)) == {1, 2}
    # uniform enrollment: about half the patients land in stage 1
    assert abs((stage == 1).mean() - 0.5) < 0.02
    assert abs(trial.in_subgroup.mean() - 0.5) < 0.02
    assert abs(trial.experimental.mean() - 0.5) < 0.02


def test_schedule_monotone_and_meets_targets():
    spec = toy_spec()
    trial = generate_trial(spec, (5, 2))
    times = schedule_analyses(trial, spec)
    assert len(times) == 2
    assert times[0] <= times[1]
    # tiny epsilon absorbs float round-off in calendar-time subtraction
    snap = snapshot_at(trial, times[0] + 1e-9, spec)
    assert snap.events[("pooled", Population.FULL, Endpoint.PFS)] >= 200


def test_unreachable_trigger_raises():
    spec = toy_spec(triggers=(AnalysisTrigger(Endpoint.PFS, 100_000),))
    trial = generate_trial(spec, (5, 2))
    with pytest.raises(SchedulingError):
        schedule_analyses(trial, spec)


def test_logrank_agrees_with_scipy():
    rng = np.random.default_rng(17)
    for _ in range(20):
        n = 120
        arm = rng.random(n) < 0.5
        latent = rng.exponential(np.where(arm, 14.0, 10.0))
        cens = rng.uniform(2.0, 30.0, size=n)
        duration = np.minimum(latent, cens)
        status = latent <= cens
        z, p, n_ev = logrank_test(duration, status, arm)
        x = scipy.stats.CensoredData(
            duration[~arm][status[~arm]],
            right=duration[~arm][~status[~arm]])
        y = scipy.stats.CensoredData(
            duration[arm][status[arm]],
            right=duration[arm][~status[arm]])
        res = scipy.stats.logrank(x, y)
        assert abs(z) == pytest.approx(abs(res.statistic), abs=1e-8)
        assert 2.0 * min(p, 1.0 - p) == pytest.approx(res.pvalue, abs=1e-7)
        assert n_ev == int(status.sum())


def test_logrank_degenerate_inputs():
    d = np.array([1.0, 2.0, 3.0])
    assert logrank_test(d, np.zeros(3, bool), np.array([True, False, True])) == (0.0, 1.0, 0)
    z, p, _ = logrank_test(d, np.ones(3, bool), np.array([True, True, True]))
    assert (z, p) == (0.0, 1.0)


def test_logrank_p_uniform_under_null():
    """One-sided p is Uniform(0,1) under no treatment effect (KS < 0.02)."""
    rng = np.random.default_rng(20260826)
    ps = []
    for _ in range(4000):
        n = 80
        arm = rng.random(n) < 0.5
        latent = rng.exponential(10.0, size=n)
        cens = rng.uniform(5.0, 25.0, size=n)
        duration = np.minimum(latent, cens)
        status = latent <= cens
        ps.append(logrank_test(duration, status, arm)[1])
    ks = scipy.stats.kstest(ps, "uniform").statistic
    assert ks < 0.02


def test_cox_recovers_true_hazard_ratio():
    rng = np.random.default_rng(23)
    n = 40000
    arm = rng.random(n) < 0.5
    latent = rng.exponential(1.0, size=n) / np.where(arm, 0.7, 1.0)
    cens = rng.uniform(0.5, 4.0, size=n)
    duration = np.minimum(latent, cens)
    status = latent <= cens
    hr = cox_hazard_ratio(duration, status, arm)
    assert hr == pytest.approx(0.7, abs=0.03)
    # flipping the arm labels inverts the estimate
    inv = cox_hazard_ratio(duration, status, ~arm)
    assert inv == pytest.approx(1.0 / hr, rel=1e-6)


def test_cox_requires_events():
    with pytest.raises(ValueError):
        cox_hazard_ratio(np.array([1.0, 2.0]), np.zeros(2, bool), np.array([True, False]))


def test_snapshot_slot_consistency():
    spec = toy_spec()
    trial = generate_trial(spec, (9, 4))
    snap = snapshot_at(trial, 18.0, spec, with_hr=True)
    for pop in Population:
        for ep in Endpoint:
            pooled = snap.events[("pooled", pop, ep)]
            split = (snap.events[("stage1", pop, ep)] + snap.events[("stage2", pop, ep)])
            assert pooled == split
    full = snap.events[("pooled", Population.FULL, Endpoint.PFS)]
    sub = snap.events[("pooled", Population.SUB, Endpoint.PFS)]
    assert sub <= full
    assert snap.hr_full is not None and snap.hr_full > 0
    assert snap.hr_sub is not None and snap.hr_sub > 0
    for key, p in snap.p.items():
        assert 0.0 <= p <= 1.0


def test_snapshot_earlier_time_has_fewer_events():
    spec = toy_spec()
    trial = generate_trial(spec, (2, 7))
    early = snapshot_at(trial, 10.0, spec)
    late = snapshot_at(trial, 20.0, spec)
    key = ("pooled", Population.FULL, Endpoint.OS)
    assert early.events[key] < late.events[key]
