"""Continuous-time Metropolis dynamics of bit-flip errors.

Only X errors are simulated, so only the Z-type generators see defects.  A
qubit whose four incident generators hold ``k`` defects changes the energy by
``dE = 4 - 2k`` when flipped; qubits are kept in five lists by ``k`` so that
a move is drawn in O(1) and the total rate is an exact five-term sum.

Random numbers come from a Philox stream keyed by ``(seed, sample)`` and
are fed to the compiled kernel in blocks, so a sample is reproducible from
its seed and index alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .codes import CUBIC, SECTOR_Z, CodeDescriptor, DefectSet, _logical_matrices, shared_code
from .decoder import decode_sector
from .errors import FrozenState, InsufficientData
from .neutrality import SPECIALIZED
from .pauli import PauliOperator

DECODER_ABORT = "decoder-abort"
LOGICAL_ERROR = "nontrivial-logical"
CENSORED = "censored-at-t_max"


def metropolis_rate(dE, beta):
    """``min(1, exp(-beta * dE))``."""
    return np.minimum(1.0, np.exp(-beta * np.asarray(dE, dtype=float)))


def default_t_ec(beta: float) -> float:
    return math.exp(4 * beta) / 100


@dataclass
class ThermalConfig:
    beta: float
    L: int
    T_ec: float | None = None
    t_max: float | None = None
    seed: int = 0
    sample: int = 0
    mode: str = SPECIALIZED
    J: float = 0.5
    code: str = CUBIC

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.T_ec is None:
            self.T_ec = default_t_ec(self.beta)
        if self.t_max is None:
            self.t_max = 1e4 * self.T_ec

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.sample,))
        return np.random.Generator(np.random.Philox(ss))


# ------------------------------------------------------------ kernels

@numba.njit(cache=True)
def _move(q, knew, kcls, lists, counts, pos):
    kold = kcls[q]
    i = pos[q]
    last = lists[kold, counts[kold] - 1]
    lists[kold, i] = last
    pos[last] = i
    counts[kold] -= 1
    lists[knew, counts[knew]] = q
    pos[q] = counts[knew]
    counts[knew] += 1
    kcls[q] = knew


@numba.njit(cache=True)
def _flip(q, x, d, kcls, lists, counts, pos, qcells, cellq):
    x[q] ^= 1
    nd = 0
    for a in range(qcells.shape[1]):
        c = qcells[q, a]
        d[c] ^= 1
        step = 1 if d[c] else -1
        nd += step
        for b in range(cellq.shape[1]):
            q2 = cellq[c, b]
            _move(q2, kcls[q2] + step, kcls, lists, counts, pos)
    return nd


@numba.njit(cache=True)
def _total_rate(counts, rates):
    R = 0.0
    for k in range(rates.shape[0]):
        R += counts[k] * rates[k]
    return R


@numba.njit(cache=True)
def _advance(x, d, kcls, lists, counts, pos, rates, qcells, cellq, t, t_stop, u, max_events, acc):
    """Run events until ``t_stop``, ``max_events`` or the uniforms run out.

    ``acc`` accumulates (time-weighted defect count, elapsed time, events).
    Returns ``(t, uniforms_used, last_qubit, last_dt, status)`` with status
    0 = reached t_stop, 1 = event budget spent, 2 = need more uniforms,
    3 = frozen.
    """
    used = 0
    nev = 0
    ndef = 0
    for c in range(d.shape[0]):
        ndef += d[c]
    last_q = -1
    last_dt = 0.0
    while True:
        if nev >= max_events:
            return t, used, last_q, last_dt, 1
        if used + 3 > u.shape[0]:
            return t, used, last_q, last_dt, 2
        R = _total_rate(counts, rates)
        if R <= 0.0:
            return t, used, last_q, last_dt, 3
        dt = -math.log(1.0 - u[used]) / R
        if t + dt >= t_stop:
            # the pending event is discarded; waiting times are memoryless
            acc[0] += (t_stop - t) * ndef
            acc[1] += t_stop - t
            used += 1
            return t_stop, used, last_q, last_dt, 0
        target = u[used + 1] * R
        k = 0
        cum = counts[0] * rates[0]
        while cum <= target and k < rates.shape[0] - 1:
            k += 1
            cum += counts[k] * rates[k]
        while counts[k] == 0:
            k -= 1
        j = int(u[used + 2] * counts[k])
        if j >= counts[k]:
            j = counts[k] - 1
        q = lists[k, j]
        used += 3
        acc[0] += dt * ndef
        acc[1] += dt
        acc[2] += 1
        t += dt
        ndef += _flip(q, x, d, kcls, lists, counts, pos, qcells, cellq)
        nev += 1
        last_q = q
        last_dt = dt


@numba.njit(cache=True)
def _metropolis_chain(x, d, qcells, rates_by_k, u, acc):
    # discrete-time single-flip chain, independent of the class bookkeeping
    n = x.shape[0]
    ndef = 0
    for c in range(d.shape[0]):
        ndef += d[c]
    for s in range(u.shape[0] // 2):
        q = int(u[2 * s] * n)
        if q >= n:
            q = n - 1
        k = 0
        for a in range(qcells.shape[1]):
            k += d[qcells[q, a]]
        if u[2 * s + 1] < rates_by_k[k]:
            x[q] ^= 1
            for a in range(qcells.shape[1]):
                c = qcells[q, a]
                d[c] ^= 1
            ndef += qcells.shape[1] - 2 * k
        acc[0] += ndef
        acc[1] += 1


# ------------------------------------------------------------ state

class SimState:
    """Evolving X-error configuration with incremental defects and rates.

    Attributes
    ----------
    x : uint8 array, error bits on all qubits
    d : uint8 array, Z-type defects
    t : float, simulation clock
    """

    def __init__(self, code: CodeDescriptor, beta: float, x=None):
        self.code = code
        self.beta = float(beta)
        self.qcells = np.ascontiguousarray(code.flip_cells[SECTOR_Z])
        self.cellq = np.ascontiguousarray(code.generator_qubits[SECTOR_Z])
        f = self.qcells.shape[1]
        self.rates = metropolis_rate(f - 2 * np.arange(f + 1), self.beta)
        n = code.n
        self.x = np.zeros(n, dtype=np.uint8) if x is None else np.asarray(x, dtype=np.uint8).copy()
        self.d = code.cell_syndrome(SECTOR_Z, self.x)
        self.kcls = self.d[self.qcells].sum(axis=1).astype(np.int64)
        self.lists = np.zeros((f + 1, n), dtype=np.int64)
        self.counts = np.zeros(f + 1, dtype=np.int64)
        self.pos = np.zeros(n, dtype=np.int64)
        for q in range(n):
            k = self.kcls[q]
            self.lists[k, self.counts[k]] = q
            self.pos[q] = self.counts[k]
            self.counts[k] += 1
        self.t = 0.0
        self.events = 0
        self.acc = np.zeros(3)

    @classmethod
    def vacuum(cls, code: CodeDescriptor, beta: float) -> "SimState":
        return cls(code, beta)

    @property
    def R(self) -> float:
        return float(_total_rate(self.counts, self.rates))

    @property
    def rate_table(self) -> np.ndarray:
        return self.rates[self.kcls]

    @property
    def energy(self) -> int:
        return int(self.d.sum())

    @property
    def defects(self) -> DefectSet:
        bits = np.zeros((2, self.code.ncells), dtype=np.uint8)
        bits[SECTOR_Z] = self.d
        return DefectSet(self.code.lattice, bits)

    @property
    def error(self) -> PauliOperator:
        return PauliOperator(self.x.copy())

    def flip(self, q: int) -> None:
        _flip(q, self.x, self.d, self.kcls, self.lists, self.counts, self.pos, self.qcells, self.cellq)

    def check(self) -> None:
        """Assert the incremental bookkeeping against a full recomputation."""
        d = self.code.cell_syndrome(SECTOR_Z, self.x)
        assert np.array_equal(d, self.d), "defect map out of sync"
        k = d[self.qcells].sum(axis=1)
        assert np.array_equal(k, self.kcls), "rate classes out of sync"
        assert np.array_equal(np.bincount(k, minlength=len(self.counts)), self.counts)
        for c in range(len(self.counts)):
            assert np.all(self.kcls[self.lists[c, : self.counts[c]]] == c)
        assert abs(self.R - self.rate_table.sum()) <= 1e-9 * self.code.n

    def advance(self, t_stop: float, rng: np.random.Generator, max_events: int = 1 << 62, block: int = 3 << 16):
        """Evolve until ``t_stop`` or ``max_events``; returns the last (qubit, dt)."""
        last = (-1, 0.0)
        done = 0
        while True:
            u = rng.random(block)
            t, used, q, dt, status = _advance(self.x, self.d, self.kcls, self.lists, self.counts, self.pos,
                                              self.rates, self.qcells, self.cellq, self.t, t_stop, u,
                                              max_events - done, self.acc)
            nev = int(self.acc[2]) - self.events
            self.events = int(self.acc[2])
            done += nev
            self.t = t
            if q >= 0:
                last = (int(q), float(dt))
            if status == 3:
                raise FrozenState("total rate is zero")
            if status in (0, 1):
                return last


def delta_energy(state: SimState, qubit: int) -> int:
    """Defect-count change from flipping X on ``qubit``."""
    f = state.qcells.shape[1]
    return f - 2 * int(state.d[state.qcells[qubit]].sum())


def bkl_step(state: SimState, rng: np.random.Generator):
    """Draw and apply one rejection-free move; returns ``(qubit, dt)``."""
    if state.R <= 0:
        raise FrozenState("total rate is zero")
    u = rng.random(3)
    t, used, q, dt, status = _advance(state.x, state.d, state.kcls, state.lists, state.counts, state.pos,
                                      state.rates, state.qcells, state.cellq, state.t, np.inf, u, 1, state.acc)
    if status == 3:
        raise FrozenState("total rate is zero")
    state.t = t
    state.events = int(state.acc[2])
    return int(q), float(dt)


# ------------------------------------------------------------ memory time

@dataclass
class MemorySample:
    t_fail: float
    kind: str
    sample: int = 0
    events: int = 0
    decodes: int = 0

    @property
    def censored(self) -> bool:
        return self.kind == CENSORED


def _code_for(config: ThermalConfig) -> CodeDescriptor:
    return shared_code(config.code, config.L)


def memory_time_sample(config: ThermalConfig, code: CodeDescriptor | None = None) -> MemorySample:
    """Evolve from the vacuum until a trial decode fails.

    Every ``T_ec`` a copy of the syndrome is decoded; the sample fails at the
    first trial where the decoder aborts or the corrected error is a
    nontrivial logical operator.  Runs reaching ``t_max`` are censored.
    """
    code = code or _code_for(config)
    _, Zs = _logical_matrices(code)
    Zs = Zs.astype(np.int64)
    state = SimState.vacuum(code, config.beta)
    rng = config.rng()
    decodes = 0
    t_next = config.T_ec
    while t_next <= config.t_max:
        state.advance(t_next, rng)
        decodes += 1
        cells = np.flatnonzero(state.d)
        if len(cells):
            ok, flips = decode_sector(code, SECTOR_Z, cells, config.mode)
            if not ok:
                return MemorySample(t_next, DECODER_ABORT, config.sample, state.events, decodes)
            r = state.x ^ (np.bincount(flips, minlength=code.n) & 1).astype(np.uint8)
        else:
            r = state.x
        if (Zs @ r % 2).any():
            return MemorySample(t_next, LOGICAL_ERROR, config.sample, state.events, decodes)
        t_next += config.T_ec
    return MemorySample(config.t_max, CENSORED, config.sample, state.events, decodes)


class TauEstimate(tuple):
    """``(tau, ci)`` with the sample count and censored count attached."""

    def __new__(cls, tau, ci, n, censored):
        obj = super().__new__(cls, (tau, ci))
        obj.n = n
        obj.censored = censored
        return obj

    @property
    def tau(self):
        return self[0]

    @property
    def ci(self):
        return self[1]


def estimate_tau(samples) -> TauEstimate:
    """Mean failure time and its standard error over uncensored samples.

    Raises
    ------
    InsufficientData
        With fewer than two uncensored samples.
    """
    times = np.array([s.t_fail for s in samples if not s.censored], dtype=float)
    censored = sum(1 for s in samples if s.censored)
    if len(times) < 2:
        raise InsufficientData(f"need at least two uncensored samples, got {len(times)}")
    return TauEstimate(float(times.mean()), float(times.std(ddof=1) / np.sqrt(len(times))), len(times), censored)


# ------------------------------------------------------------ equilibrium checks

def _batch_means(values):
    v = np.asarray(values, dtype=float)
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(len(v)))


def bkl_mean_defects(code: CodeDescriptor, beta: float, events: int, rng, batches: int = 50, burn: int = 10 ** 5):
    """Time-averaged defect count under the continuous-time dynamics.

    Returns ``(mean, standard error)`` from batch means.
    """
    state = SimState.vacuum(code, beta)
    state.advance(np.inf, rng, max_events=burn)
    per = events // batches
    means = []
    for _ in range(batches):
        state.acc[:] = 0
        state.events = 0
        state.advance(np.inf, rng, max_events=per)
        means.append(state.acc[0] / state.acc[1])
    return _batch_means(means)


def metropolis_mean_defects(code: CodeDescriptor, beta: float, steps: int, rng, batches: int = 50, burn: int = 10 ** 5):
    """Defect count averaged over a discrete-time single-flip Metropolis chain."""
    qcells = np.ascontiguousarray(code.flip_cells[SECTOR_Z])
    f = qcells.shape[1]
    rates = metropolis_rate(f - 2 * np.arange(f + 1), beta)
    x = np.zeros(code.n, dtype=np.uint8)
    d = np.zeros(code.ncells, dtype=np.uint8)
    acc = np.zeros(2)
    _metropolis_chain(x, d, qcells, rates, rng.random(2 * burn), acc)
    per = steps // batches
    means = []
    for _ in range(batches):
        acc[:] = 0
        done = 0
        while done < per:
            m = min(per - done, 1 << 20)
            _metropolis_chain(x, d, qcells, rates, rng.random(2 * m), acc)
            done += m
        means.append(acc[0] / acc[1])
    return _batch_means(means)
