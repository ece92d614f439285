import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmemsim.codes import LatticeSpec
from qmemsim.harness import (TauSummary, crossings, fit_below_optimum, fit_campaign, fit_power_law,
                             memory_time_campaign, sample_iid_error, threshold_estimate, threshold_sweep,
                             wilson_interval)
from qmemsim.records import (MEMORY_TIME, THRESHOLD, ExperimentRecord, read_csv, read_json, write_csv,
                             write_json)


def test_iid_extremes(rng):
    lat = LatticeSpec(3, 10)
    sites, P = sample_iid_error(0.0, lat, rng)
    assert len(sites) == 0 and P.is_identity()
    sites, P = sample_iid_error(1.0, lat, rng)
    assert len(sites) == lat.nsites
    assert P.zmask.sum() == 0
    # every occupied cubic site carries X on at least one qubit
    assert P.xmask.reshape(-1, 2).any(axis=1).all()


def test_iid_mean_count(rng):
    lat = LatticeSpec(3, 10)
    counts = np.array([len(sample_iid_error(0.05, lat, rng)[0]) for _ in range(10_000)])
    sigma = np.sqrt(1000 * 0.05 * 0.95 / len(counts))
    assert abs(counts.mean() - 50) < 3 * sigma


def test_toric_site_model_one_edge_per_site(rng):
    lat = LatticeSpec(2, 12)
    sites, P = sample_iid_error(0.3, lat, rng)
    per_site = P.xmask.reshape(-1, 2).sum(axis=1)
    assert (per_site[sites] == 1).all() and per_site.sum() == len(sites)


def test_qubit_model_rate(rng):
    lat = LatticeSpec(2, 50)
    _, P = sample_iid_error(0.1, lat, rng, model="qubit")
    assert abs(P.xmask.mean() - 0.1) < 0.01


def test_bad_rate(rng):
    with pytest.raises(ValueError):
        sample_iid_error(1.5, LatticeSpec(2, 4), rng)


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and hi - lo == pytest.approx(0.192, abs=0.002)
    assert wilson_interval(0, 10)[0] == 0.0


def test_zero_rate_never_fails():
    for kind, L in (("toric2d", 8), ("cubic3d", 5)):
        recs = threshold_sweep(kind, [L], [0.0], 50)
        assert recs[0].failures == 0


def test_toric_size_trend():
    recs = threshold_sweep("toric2d", [8, 16, 24], [0.05, 0.09], 1000, seed=1, model="qubit")
    f = {(r.L, r.p): r.fraction for r in recs}
    assert f[8, 0.05] > f[16, 0.05] > f[24, 0.05]
    assert f[8, 0.09] < f[16, 0.09] < f[24, 0.09]


def test_sweep_reproducible_and_order_free():
    a = threshold_sweep("toric2d", [8, 12], [0.06, 0.08], 100, seed=5, model="qubit")
    b = threshold_sweep("toric2d", [12, 8], [0.08, 0.06], 100, seed=5, model="qubit")
    key = lambda r: (r.L, r.p)
    assert [(r.L, r.p, r.failures) for r in sorted(a, key=key)] == [(r.L, r.p, r.failures) for r in sorted(b, key=key)]


def test_sweep_independent_of_workers():
    a = threshold_sweep("toric2d", [8], [0.06, 0.08], 60, seed=2, model="qubit", workers=1)
    b = threshold_sweep("toric2d", [8], [0.06, 0.08], 60, seed=2, model="qubit", workers=2)
    assert [r.failures for r in a] == [r.failures for r in b]


def _rec(L, p, failures, trials=1000):
    return ExperimentRecord(THRESHOLD, "toric2d", L, 0, p=p, trials=trials, failures=failures)


def test_crossing_interpolation():
    recs = [_rec(8, 0.05, 300), _rec(8, 0.08, 600), _rec(16, 0.05, 200), _rec(16, 0.08, 700)]
    (La, Lb, pc), = crossings(recs)
    assert (La, Lb) == (8, 16)
    # difference goes -0.1 -> +0.1: midpoint in log p
    assert pc == pytest.approx(np.sqrt(0.05 * 0.08))
    assert threshold_estimate(recs) == pytest.approx(pc)
    assert threshold_estimate([_rec(8, 0.05, 1), _rec(16, 0.05, 0)]) is None


def test_power_law_fit_recovers_exponent():
    L = np.array([5, 7, 9, 11, 13, 17])
    fit = fit_power_law(L, L.astype(float) ** 3)
    assert fit.slope == pytest.approx(3.0, abs=0.05)
    noisy = L ** 3 * np.exp(np.random.default_rng(0).normal(0, 0.02, len(L)))
    assert fit_power_law(L, noisy).slope == pytest.approx(3.0, abs=0.05)


def test_fit_uses_points_up_to_optimum():
    fit = fit_below_optimum([5, 7, 9, 11], [5.0 ** 2, 7.0 ** 2, 9.0 ** 2, 10.0])
    assert fit.points == 3 and fit.slope == pytest.approx(2.0)
    assert fit_below_optimum([5, 7], [9.0, 3.0]) is None


def test_campaign_fits_from_synthetic_summaries():
    summaries = []
    for beta in (4.0, 4.5, 5.0):
        for L in (5, 7, 9, 11):
            summaries.append(TauSummary(beta, L, np.exp(1.7 * beta ** 2) * (L / 5) ** 3, 1.0, 100, 0))
    exponents, beta_fit = fit_campaign(summaries)
    assert all(f.slope == pytest.approx(3.0, abs=0.05) for f in exponents.values())
    assert beta_fit.slope == pytest.approx(1.7, abs=1e-6)


def test_campaign_empty():
    res = memory_time_campaign([4.0], [5], 0)
    assert res.records == [] and res.summaries == []


def test_campaign_small_run():
    res = memory_time_campaign([4.0], [5], 4, seed=11)
    assert len(res.records) == 4 and res.summaries[0].n + res.summaries[0].censored == 4
    assert all(r.experiment == MEMORY_TIME for r in res.records)


def test_campaign_rejects_bad_size():
    with pytest.raises(ValueError):
        memory_time_campaign([4.0], [15], 1)


times = st.floats(1e-3, 1e12, allow_nan=False)


@given(st.lists(st.tuples(st.integers(3, 200), st.floats(0.1, 9), st.integers(0, 10 ** 6),
                          st.integers(0, 10 ** 4), times, st.sampled_from(["decoder-abort", "nontrivial-logical"]),
                          st.floats(0, 1e4)), max_size=8))
def test_memory_records_roundtrip(rows):
    recs = [ExperimentRecord(MEMORY_TIME, "cubic3d", L, seed, beta=b, sample=s, t_fail=t, outcome=k, duration=d)
            for L, b, seed, s, t, k, d in rows]
    assert read_csv(write_csv(recs)) == recs
    assert read_json(write_json(recs)) == recs


@given(st.lists(st.tuples(st.integers(3, 200), st.floats(0, 0.5), st.integers(1, 10 ** 5)), max_size=8))
def test_threshold_records_roundtrip(rows):
    recs = [ExperimentRecord(THRESHOLD, "toric2d", L, 3, p=p, trials=n, failures=n // 3) for L, p, n in rows]
    assert read_csv(write_csv(recs)) == recs
    assert read_json(write_json(recs)) == recs


def test_csv_header_and_precision(tmp_path):
    r = ExperimentRecord(MEMORY_TIME, "cubic3d", 5, 1, beta=4.0, sample=0, t_fail=123456.789012345,
                         outcome="decoder-abort")
    text = write_csv([r], tmp_path / "m.csv")
    header, row = text.strip().split("\n")
    assert header.startswith("code,L,beta,seed,sample,t_fail,kind")
    assert row.split(",")[5] == "123456.789"
    assert read_csv(tmp_path / "m.csv") == [r]
    t = write_csv([_rec(8, 0.05, 3)])
    assert t.startswith("code,L,p,seed,trials,failures")


def test_mixed_kinds_rejected():
    with pytest.raises(ValueError):
        write_csv([_rec(8, 0.05, 1), ExperimentRecord(MEMORY_TIME, "cubic3d", 5, 0, beta=4.0, t_fail=1.0)])
