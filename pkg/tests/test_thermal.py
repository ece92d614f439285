import math

import numpy as np
import pytest
from scipy import stats

from qmemsim.errors import FrozenState, InsufficientData
from qmemsim.thermal import (CENSORED, DECODER_ABORT, LOGICAL_ERROR, MemorySample, SimState, ThermalConfig,
                             bkl_step, default_t_ec, delta_energy, estimate_tau, memory_time_sample,
                             metropolis_rate)


def test_metropolis_rate():
    assert metropolis_rate(-2, 4) == 1
    assert metropolis_rate(2, 4) == pytest.approx(math.exp(-8))
    for beta in (0.5, 1, 4):
        for dE in (2, 4):
            assert metropolis_rate(dE, beta) / metropolis_rate(-dE, beta) == pytest.approx(math.exp(-dE * beta))


def test_delta_energy_on_vacuum(cubic5):
    s = SimState.vacuum(cubic5, 4)
    assert delta_energy(s, 17) == 4
    s.flip(17)
    assert delta_energy(s, 17) == -4
    s.flip(17)
    assert s.energy == 0


def test_delta_energy_matches_recount(cubic5, rng):
    for _ in range(10_000 // 50):
        x = (rng.random(cubic5.n) < rng.random() * 0.3).astype(np.uint8)
        s = SimState(cubic5, 1.0, x)
        for q in rng.integers(0, cubic5.n, 50):
            y = x.copy()
            y[q] ^= 1
            full = int(cubic5.cell_syndrome(1, y).sum()) - int(cubic5.cell_syndrome(1, x).sum())
            assert delta_energy(s, int(q)) == full


def test_state_stays_consistent(cubic5, rng):
    s = SimState.vacuum(cubic5, 0.7)
    for _ in range(3000):
        bkl_step(s, rng)
        s.check()
    s.advance(s.t + 50.0, rng)
    s.check()


def test_uniform_selection_when_rates_equal(cubic5, rng):
    s = SimState.vacuum(cubic5, 2.0)
    hits = np.zeros(cubic5.n)
    for _ in range(100_000):
        q, _ = bkl_step(s, rng)
        hits[q] += 1
        s.flip(q)
    assert stats.chisquare(hits).pvalue > 0.001


def test_single_live_rate_always_chosen(cubic5, rng):
    s = SimState.vacuum(cubic5, 2.0)
    s.flip(42)
    s.rates = np.array([0.0, 0.0, 0.0, 0.0, 1.0])
    for _ in range(100):
        q, dt = bkl_step(s, rng)
        assert q == 42
        s.flip(q)


def test_mean_waiting_time(cubic5, rng):
    s = SimState.vacuum(cubic5, 0.5)
    R = s.R
    dts = np.empty(100_000)
    for i in range(len(dts)):
        q, dts[i] = bkl_step(s, rng)
        s.flip(q)
    se = dts.std(ddof=1) / math.sqrt(len(dts))
    assert abs(dts.mean() - 1 / R) < 3 * se


def test_frozen_state(cubic5, rng):
    s = SimState.vacuum(cubic5, 1.0)
    s.rates = np.zeros(5)
    with pytest.raises(FrozenState):
        bkl_step(s, rng)


def test_trial_interval():
    assert default_t_ec(4) == pytest.approx(8.886e4, rel=1e-3)
    assert ThermalConfig(4, 5).T_ec == pytest.approx(math.exp(16) / 100)


def test_quiet_run_survives_trials():
    cfg = ThermalConfig(12.0, 5, T_ec=1.0, t_max=3.0)
    out = memory_time_sample(cfg)
    assert out.kind == CENSORED and out.decodes == 3 and out.events == 0


def test_failure_kinds_at_l5():
    kinds = [memory_time_sample(ThermalConfig(4.0, 5, seed=3, sample=i)).kind for i in range(30)]
    assert set(kinds) <= {DECODER_ABORT, LOGICAL_ERROR}
    assert kinds.count(DECODER_ABORT) > len(kinds) / 2


def test_reproducible_sample():
    a = memory_time_sample(ThermalConfig(3.0, 5, seed=7, sample=2))
    b = memory_time_sample(ThermalConfig(3.0, 5, seed=7, sample=2))
    assert a == b


def _samples(times, kind=DECODER_ABORT):
    return [MemorySample(t, kind, i) for i, t in enumerate(times)]


def test_estimate_tau():
    assert tuple(estimate_tau(_samples([5.0] * 4))) == (5.0, 0.0)
    tau, ci = estimate_tau(_samples([1.0, 3.0]))
    assert (tau, ci) == (2.0, 1.0)
    draws = np.random.default_rng(1).exponential(100, 1000)
    est = estimate_tau(_samples(draws))
    assert abs(est.tau - 100) < 3 * est.ci
    with pytest.raises(InsufficientData):
        estimate_tau(_samples([1.0]))
    mixed = _samples([1.0, 3.0]) + _samples([9.0], CENSORED)
    assert estimate_tau(mixed).censored == 1
