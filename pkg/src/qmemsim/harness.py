"""Error sampling, threshold sweeps and memory-time campaigns."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .codes import CUBIC, SECTOR_Z, LatticeSpec, _logical_matrices, shared_code, validate_lattice_size
from .decoder import decode_sector
from .errors import InsufficientData
from .neutrality import SPECIALIZED, STANDARD
from .pauli import PauliOperator
from .records import MEMORY_TIME, THRESHOLD, ExperimentRecord
from .thermal import ThermalConfig, estimate_tau, memory_time_sample

SITE_MODEL = "site"
QUBIT_MODEL = "qubit"


def point_rng(seed: int, L: int, p: float) -> np.random.Generator:
    """Independent stream for one (L, p) point of a sweep."""
    ss = np.random.SeedSequence(seed, spawn_key=(L, int(round(p * 1e9))))
    return np.random.Generator(np.random.Philox(ss))


def sample_iid_error(epsilon: float, lattice: LatticeSpec, rng: np.random.Generator,
                     model: str = SITE_MODEL):
    """Random bit-flip error.

    ``model="site"`` occupies each site with probability ``epsilon``.  On the
    cubic lattice an occupied site carries X on the first, second or both of
    its qubits with equal odds; on the toric lattice it carries X on one of
    its two edges, chosen uniformly.  ``model="qubit"`` flips every qubit
    independently with probability ``epsilon``.

    Returns
    -------
    (sites, PauliOperator)
        Occupied site indices (sorted) and the X error.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    V = lattice.nsites
    q = lattice.q
    x = np.zeros(V * q, dtype=np.uint8)
    if model == QUBIT_MODEL:
        x[:] = rng.random(V * q) < epsilon
        sites = np.flatnonzero(x.reshape(V, q).any(axis=1))
    elif model == SITE_MODEL:
        sites = np.flatnonzero(rng.random(V) < epsilon)
        if lattice.D == 3:
            pattern = rng.integers(1, 4, size=len(sites))  # 1: first, 2: second, 3: both
            x[q * sites] = pattern & 1
            x[q * sites + 1] = pattern >> 1
        else:
            x[q * sites + rng.integers(0, 2, size=len(sites))] = 1
    else:
        raise ValueError(f"unknown error model {model!r}")
    return sites, PauliOperator(x, np.zeros_like(x))


def wilson_interval(failures: int, trials: int, confidence: float = 0.95):
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    z = stats.norm.ppf(0.5 + confidence / 2)
    f = failures / trials
    den = 1 + z * z / trials
    mid = (f + z * z / (2 * trials)) / den
    half = z * np.sqrt(f * (1 - f) / trials + z * z / (4 * trials * trials)) / den
    return (max(0.0, mid - half), min(1.0, mid + half))


def bitflip_trial(code, x: np.ndarray, mode: str = STANDARD) -> bool:
    """Decode an X error; True when the decode aborts or leaves a logical."""
    _, Zs = _logical_matrices(code)
    cells = np.flatnonzero(code.cell_syndrome(SECTOR_Z, x))
    if len(cells):
        ok, flips = decode_sector(code, SECTOR_Z, cells, mode)
        if not ok:
            return True
        r = x ^ (np.bincount(flips, minlength=code.n) & 1).astype(np.uint8)
    else:
        r = x
    return bool((Zs.astype(np.int64) @ r % 2).any())


def _threshold_point(args):
    kind, L, p, trials, seed, model, mode = args
    code = shared_code(kind, L)
    rng = point_rng(seed, L, p)
    t0 = time.perf_counter()
    fails = 0
    for _ in range(trials):
        _, P = sample_iid_error(p, code.lattice, rng, model)
        fails += bitflip_trial(code, P.xmask, mode)
    return ExperimentRecord(THRESHOLD, kind, L, seed, p=p, trials=trials, failures=fails,
                            duration=time.perf_counter() - t0)


def _fan_out(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def threshold_sweep(kind: str, sizes, rates, samples: int, seed: int = 0, *,
                    model: str = SITE_MODEL, mode: str = STANDARD, workers: int = 1) -> list:
    """Failure counts for every (L, p) point.

    Each point draws from its own stream, so results do not depend on the
    worker count or the order of points.
    """
    for p in rates:
        if not 0 <= p < 0.5:
            raise ValueError(f"rate {p} outside [0, 0.5)")
    jobs = [(kind, int(L), float(p), int(samples), seed, model, mode) for L in sizes for p in rates]
    return _fan_out(_threshold_point, jobs, workers)


def failure_table(records) -> dict:
    """``{L: (rates, fractions)}`` sorted by rate."""
    table = {}
    for r in records:
        table.setdefault(r.L, []).append((r.p, r.fraction))
    return {L: tuple(map(np.array, zip(*sorted(v)))) for L, v in sorted(table.items())}


def crossings(records) -> list:
    """Crossing points of failure curves for consecutive sizes.

    Between neighbouring rates where the sign of ``f_large - f_small`` goes
    from negative to non-negative, the crossing is found by linear
    interpolation in ``log p``.  Returns ``(L_small, L_large, p_cross)``.
    """
    table = failure_table(records)
    Ls = sorted(table)
    out = []
    for La, Lb in zip(Ls, Ls[1:]):
        pa, fa = table[La]
        pb, fb = table[Lb]
        common = np.intersect1d(pa, pb)
        if len(common) < 2:
            continue
        d = np.array([fb[pb == p][0] - fa[pa == p][0] for p in common])
        for i in range(len(common) - 1):
            if d[i] < 0 <= d[i + 1]:
                l0, l1 = np.log(common[i]), np.log(common[i + 1])
                t = d[i] / (d[i] - d[i + 1])
                out.append((La, Lb, float(np.exp(l0 + t * (l1 - l0)))))
                break
    return out


def threshold_estimate(records):
    """Mean of the consecutive-size crossings, or None when there is none."""
    c = crossings(records)
    return float(np.mean([x[2] for x in c])) if c else None


# ------------------------------------------------------------ memory time

@dataclass
class TauSummary:
    beta: float
    L: int
    tau: float
    ci: float
    n: int
    censored: int


@dataclass
class LinearFit:
    slope: float
    intercept: float
    slope_err: float
    points: int


@dataclass
class CampaignResult:
    records: list
    summaries: list = field(default_factory=list)
    exponents: dict = field(default_factory=dict)  # beta -> LinearFit of log tau on log L
    beta_fit: LinearFit | None = None  # log tau_max on beta**2


def _fit(x, y) -> LinearFit:
    res = stats.linregress(x, y)
    err = res.stderr if len(x) > 2 else float("nan")
    return LinearFit(float(res.slope), float(res.intercept), float(err), len(x))


def fit_power_law(sizes, taus) -> LinearFit:
    """Slope of ``log tau`` against ``log L``."""
    return _fit(np.log(np.asarray(sizes, float)), np.log(np.asarray(taus, float)))


def fit_below_optimum(sizes, taus) -> LinearFit | None:
    """Power-law fit over the sizes up to the one with the largest tau."""
    order = np.argsort(sizes)
    sizes = np.asarray(sizes)[order]
    taus = np.asarray(taus)[order]
    top = int(np.argmax(taus))
    if top < 1:
        return None
    return fit_power_law(sizes[:top + 1], taus[:top + 1])


def fit_beta_squared(betas, tau_max) -> LinearFit:
    """Slope of ``log tau_max`` against ``beta**2``."""
    return _fit(np.asarray(betas, float) ** 2, np.log(np.asarray(tau_max, float)))


def _memory_job(args):
    beta, L, seed, sample, kind, mode, T_ec, t_max = args
    cfg = ThermalConfig(beta, L, T_ec, t_max, seed, sample, mode, code=kind)
    t0 = time.perf_counter()
    s = memory_time_sample(cfg)
    return ExperimentRecord(MEMORY_TIME, kind, L, seed, beta=beta, sample=sample, t_fail=s.t_fail,
                            outcome=s.kind, duration=time.perf_counter() - t0)


def summarize(records) -> list:
    """Tau estimate per (beta, L); groups with too little data are skipped."""
    from .thermal import MemorySample
    groups = {}
    for r in records:
        groups.setdefault((r.beta, r.L), []).append(r)
    out = []
    for (beta, L), rs in sorted(groups.items()):
        samples = [MemorySample(r.t_fail, r.outcome, r.sample, 0, 0) for r in rs]
        try:
            est = estimate_tau(samples)
        except InsufficientData:
            continue
        out.append(TauSummary(beta, L, est.tau, est.ci, est.n, est.censored))
    return out


def fit_campaign(summaries) -> tuple:
    exponents = {}
    by_beta = {}
    for s in summaries:
        by_beta.setdefault(s.beta, []).append(s)
    tau_max = []
    for beta, ss in sorted(by_beta.items()):
        fit = fit_below_optimum([s.L for s in ss], [s.tau for s in ss])
        if fit is not None:
            exponents[beta] = fit
        tau_max.append((beta, max(s.tau for s in ss)))
    beta_fit = fit_beta_squared(*zip(*tau_max)) if len(tau_max) >= 2 else None
    return exponents, beta_fit


def memory_time_campaign(betas, sizes, samples: int, seed: int = 0, *, kind: str = CUBIC,
                         mode: str = SPECIALIZED, T_ec=None, t_max=None, workers: int = 1) -> CampaignResult:
    """Failure-time samples for every (beta, L) plus fitted summaries."""
    for L in sizes:
        if kind == CUBIC and not validate_lattice_size(L):
            raise ValueError(f"L={L} does not give a two-qubit cubic code")
    jobs = [(float(b), int(L), seed, i, kind, mode, T_ec, t_max)
            for b in betas for L in sizes for i in range(samples)]
    records = _fan_out(_memory_job, jobs, workers)
    summaries = summarize(records)
    exponents, beta_fit = fit_campaign(summaries)
    return CampaignResult(records, summaries, exponents, beta_fit)
