"""Monte Carlo model of the per-slot heralding and matching discipline.

Each clock slot both relays attempt a herald with probability p0.  A lone
herald survives at most m further slots in the fixed buffer; if the other
side fires within that window the pair meets the central swap, which
succeeds with probability p1 and consumes both states either way.  Waits
are sampled by skipping idle slots with geometric draws, so the cost per
trial scales with the number of herald events rather than the number of
slots.

The RNG is splitmix64 with one independent stream per trial (derived odd
increments), identical between the numba and numpy sampler variants, so a
seed fixes the results bit-for-bit regardless of backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import USE_NUMBA, backend, njit

__all__ = ["SimConfig", "SimStats", "StorageMap", "simulate_heralding",
           "storage_time_map"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 1.0 / 9007199254740992.0  # 2**-53


@dataclass(frozen=True)
class SimConfig:
    p0: float
    p1: float = 1.0
    m: int = 0
    trials: int = 100_000
    seed: int = 0
    histogram_bins: int = 0   # 0 keeps one bin per storage slot

    def __post_init__(self):
        if not 0.0 < self.p0 <= 1.0:
            raise ValueError("p0 must be in (0, 1]")
        if not 0.0 < self.p1 <= 1.0:
            raise ValueError("p1 must be in (0, 1]")
        if self.m < 0 or self.m != int(self.m):
            raise ValueError("m must be a nonnegative integer")
        if self.trials < 1:
            raise ValueError("need at least one trial")


@dataclass(frozen=True)
class SimStats:
    mean_wait_slots: float
    stderr: float
    hist_lo: np.ndarray        # storage-slot bin lower edges
    hist_hi: np.ndarray
    hist_mass: np.ndarray      # normalized to 1
    empirical_rate: float      # successes per simulated slot
    mean_storage_slots: float
    successes: int
    total_slots: int
    seed: int
    generator: str
    backend: str


def _mix_v(z):
    """splitmix64 finalizer, vectorized over uint64 arrays."""
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


def _sample_numpy(seed, trials, p_both, p1, m, inv_lq, inv_lqq, p0_is_one):
    with np.errstate(over="ignore"):
        counter = np.arange(1, trials + 1, dtype=np.uint64)
        state = _mix_v(np.uint64(seed) + _GOLDEN * counter)
        gamma = _mix_v(state) | np.uint64(1)
        waits = np.zeros(trials, dtype=np.int64)
        stores = np.zeros(trials, dtype=np.int64)
        elapsed = np.zeros(trials, dtype=np.int64)
        active = np.arange(trials)
        while active.size:
            s = state[active]
            g = gamma[active]
            s += g
            u1 = ((_mix_v(s) >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _U53
            if p0_is_one:
                tmin = np.ones(active.size, dtype=np.int64)
            else:
                tmin = 1 + np.floor(np.log(u1) * inv_lqq).astype(np.int64)
            s += g
            u2 = ((_mix_v(s) >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _U53
            both = u2 <= p_both
            extra = np.zeros(active.size, dtype=np.int64)
            lone = ~both
            if lone.any():
                sl = s[lone] + g[lone]
                s[lone] = sl
                u3 = ((_mix_v(sl) >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _U53
                extra[lone] = 1 + np.floor(np.log(u3) * inv_lq).astype(np.int64)
            matched = both | (extra <= m)
            finished = np.zeros(active.size, dtype=bool)
            if matched.any():
                sm = s[matched] + g[matched]
                s[matched] = sm
                u4 = ((_mix_v(sm) >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _U53
                success = u4 <= p1
                finished[np.flatnonzero(matched)[success]] = True
                cycle = tmin[matched] + extra[matched]
                rows = active[matched]
                done = rows[success]
                waits[done] = elapsed[done] + cycle[success]
                stores[done] = extra[matched][success]
                failed = rows[~success]
                elapsed[failed] += cycle[~success]
            renew = active[~matched]
            elapsed[renew] += tmin[~matched] + m
            state[active] = s
            active = active[~finished]
    return waits, stores


def _sample_loops(seed, trials, p_both, p1, m, inv_lq, inv_lqq, p0_is_one):
    waits = np.zeros(trials, dtype=np.int64)
    stores = np.zeros(trials, dtype=np.int64)
    for i in range(trials):
        s = np.uint64(seed) + _GOLDEN * np.uint64(i + 1)
        s = s ^ (s >> np.uint64(30))
        s = s * _MIX1
        s = s ^ (s >> np.uint64(27))
        s = s * _MIX2
        s = s ^ (s >> np.uint64(31))
        g = s
        g = g ^ (g >> np.uint64(30))
        g = g * _MIX1
        g = g ^ (g >> np.uint64(27))
        g = g * _MIX2
        g = (g ^ (g >> np.uint64(31))) | np.uint64(1)
        elapsed = np.int64(0)
        while True:
            s += g
            z = s
            z = z ^ (z >> np.uint64(30))
            z = z * _MIX1
            z = z ^ (z >> np.uint64(27))
            z = z * _MIX2
            z = z ^ (z >> np.uint64(31))
            u1 = np.float64((z >> np.uint64(11)) + np.uint64(1)) * _U53
            if p0_is_one:
                tmin = np.int64(1)
            else:
                tmin = np.int64(1) + np.int64(np.floor(np.log(u1) * inv_lqq))
            s += g
            z = s
            z = z ^ (z >> np.uint64(30))
            z = z * _MIX1
            z = z ^ (z >> np.uint64(27))
            z = z * _MIX2
            z = z ^ (z >> np.uint64(31))
            u2 = np.float64((z >> np.uint64(11)) + np.uint64(1)) * _U53
            extra = np.int64(0)
            if u2 <= p_both:
                matched = True
            else:
                s += g
                z = s
                z = z ^ (z >> np.uint64(30))
                z = z * _MIX1
                z = z ^ (z >> np.uint64(27))
                z = z * _MIX2
                z = z ^ (z >> np.uint64(31))
                u3 = np.float64((z >> np.uint64(11)) + np.uint64(1)) * _U53
                extra = np.int64(1) + np.int64(np.floor(np.log(u3) * inv_lq))
                matched = extra <= m
            if matched:
                s += g
                z = s
                z = z ^ (z >> np.uint64(30))
                z = z * _MIX1
                z = z ^ (z >> np.uint64(27))
                z = z * _MIX2
                z = z ^ (z >> np.uint64(31))
                u4 = np.float64((z >> np.uint64(11)) + np.uint64(1)) * _U53
                cycle = tmin + extra
                if u4 <= p1:
                    waits[i] = elapsed + cycle
                    stores[i] = extra
                    break
                elapsed += cycle
            else:
                elapsed += tmin + np.int64(m)
    return waits, stores


if USE_NUMBA:
    _sample = njit(cache=True)(_sample_loops)
else:
    _sample = _sample_numpy


def _sample_raw(config: SimConfig):
    q = 1.0 - config.p0
    p_both = config.p0 / (1.0 + q)
    p0_is_one = config.p0 >= 1.0
    inv_lq = 0.0 if p0_is_one else 1.0 / math.log(q)
    inv_lqq = 0.0 if p0_is_one else 1.0 / (2.0 * math.log(q))
    return _sample(np.uint64(config.seed & 0xFFFFFFFFFFFFFFFF),
                   config.trials, p_both, config.p1, config.m,
                   inv_lq, inv_lqq, p0_is_one)


def simulate_heralding(config: SimConfig) -> SimStats:
    """Sample `trials` consecutive protocol successes; deterministic in seed."""
    waits, stores = _sample_raw(config)
    trials = config.trials
    total = int(waits.sum())
    mean = total / trials
    stderr = float(waits.std(ddof=1)) / math.sqrt(trials) if trials > 1 else 0.0
    counts = np.bincount(stores, minlength=config.m + 1).astype(np.float64)
    lo = np.arange(counts.size, dtype=np.float64)
    hi = lo + 1.0
    if 0 < config.histogram_bins < counts.size:
        edges = np.linspace(0, counts.size, config.histogram_bins + 1)
        counts = np.histogram(stores, bins=edges)[0].astype(np.float64)
        lo, hi = edges[:-1], edges[1:]
    return SimStats(
        mean_wait_slots=mean,
        stderr=stderr,
        hist_lo=lo, hist_hi=hi, hist_mass=counts / trials,
        empirical_rate=trials / total,
        mean_storage_slots=float(stores.mean()),
        successes=trials,
        total_slots=total,
        seed=config.seed,
        generator="splitmix64",
        backend=backend(),
    )


@dataclass(frozen=True)
class StorageMap:
    """Total buffer storage time per (L, alpha_qm) cell."""

    l_grid: np.ndarray
    alpha_qm_grid: np.ndarray
    worst_case_s: np.ndarray     # t_qm1 + m * tau
    simulated_s: np.ndarray      # t_qm1 + mean matched storage * tau
    mean_wait_slots: np.ndarray
    feasible: np.ndarray
    configuration: str
    seed: int


def storage_time_map(l_grid, alpha_qm_grid, params, configuration: str = "repeater",
                     trials: int = 20_000, seed: int = 0, m_max: int = 4096,
                     work_budget: float = 2e8) -> StorageMap:
    """Storage-time landscape for the two node-placement strategies.

    "repeater" pins the relay output next to the relay (d2 = 0, storage
    dominated by the two-way classical delay); "slow-light" lets the
    optimizer push d2 into the channel, trading storage for fiber.  Cells
    whose heralding probability is too small to sample inside the work
    budget are marked infeasible rather than dropped.
    """
    from . import optimize as _optimize
    from .geometry import solve_geometry
    from .rates import p0_small_chi

    if configuration not in ("repeater", "slow-light"):
        raise ValueError("configuration must be 'repeater' or 'slow-light'")
    l_grid = np.asarray(l_grid, dtype=float)
    a_grid = np.asarray(alpha_qm_grid, dtype=float)
    if l_grid.size == 0 or a_grid.size == 0:
        raise ValueError("grids must be nonempty")
    shape = (l_grid.size, a_grid.size)
    worst = np.full(shape, np.nan)
    simulated = np.full(shape, np.nan)
    waits = np.full(shape, np.nan)
    feasible = np.zeros(shape, dtype=bool)
    for i, L in enumerate(l_grid):
        for j, alpha_qm in enumerate(a_grid):
            cell = params.with_(alpha_qm_db_per_km=alpha_qm)
            spec = _optimize.SweepSpec(mode="analytic", m_max=m_max)
            if configuration == "repeater":
                m = _optimize._best_m_at_d2(L, 0.0, cell, spec)
                geom = solve_geometry(L, 0.0, cell, m)
            else:
                point = _optimize.optimize_point(L, cell, spec)
                geom = solve_geometry(L, point.best_d2, cell, point.best_m)
            worst[i, j] = geom.t_qm1_s + geom.m * cell.tau_s
            p0 = p0_small_chi(geom.eta1)
            if p0 <= 0.0:
                continue
            q = 1.0 - p0
            p_match = p0 / (1.0 + q) + (q / (1.0 + q)) * (1.0 - q ** geom.m)
            cell_trials = trials
            if p_match * work_budget < trials:
                cell_trials = int(p_match * work_budget)
            if cell_trials < 100:
                continue
            stats = simulate_heralding(SimConfig(
                p0=p0, p1=1.0, m=geom.m, trials=cell_trials,
                seed=seed + i * a_grid.size + j))
            simulated[i, j] = geom.t_qm1_s + stats.mean_storage_slots * cell.tau_s
            waits[i, j] = stats.mean_wait_slots
            feasible[i, j] = True
    return StorageMap(l_grid=l_grid, alpha_qm_grid=a_grid, worst_case_s=worst,
                      simulated_s=simulated, mean_wait_slots=waits,
                      feasible=feasible, configuration=configuration, seed=seed)
