"""Parameter search over (d2, m, chi) and curve/heatmap generation.

The analytic mode scans the closed-form small-squeezing rate; the numeric
mode refines around the analytic optimum with full Fock-state
evaluations, sweeping the squeezing on a log grid (the analytic rate is
proportional to chi^2, so chi drops out of its argmax).  Ties are broken
toward smaller d2, then smaller m, then smaller chi, by evaluating
candidates in ascending order and only accepting strict improvements.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InfeasibleGeometryError, ProbabilityOverflowError
from .geometry import ChannelParams, d2_upper_bound, solve_geometry, switch_count
from .rates import DEFAULT_KAPPA0, skr_small_chi, z0_mean_wait

__all__ = ["SweepSpec", "CurvePoint", "HeatmapResult", "optimize_point",
           "rate_curve", "crossover", "heatmap_optimal_d2"]

THREAD_ENV = "FASTRELAY_THREADS"


@dataclass(frozen=True)
class SweepSpec:
    """Search configuration for one optimization run."""

    mode: str = "analytic"            # "analytic" | "numeric"
    d2_points: int = 64               # coarse grid before golden refinement
    d2_tol_rel: float = 1e-3          # refine d2 to this fraction of L
    m_max: int = 4096
    chi: float = 0.01                 # squeezing used in analytic mode
    chi_grid: tuple = field(default_factory=lambda: tuple(
        float(x) for x in np.geomspace(0.01, 0.5, 12)))
    cutoff: int | None = None         # None lets the squeezing pick it
    kappa0: float = DEFAULT_KAPPA0

    def __post_init__(self):
        if self.mode not in ("analytic", "numeric"):
            raise ValueError("mode must be 'analytic' or 'numeric'")
        if self.d2_points < 2 or self.m_max < 0:
            raise ValueError("bad search grid")
        if not self.chi_grid:
            raise ValueError("chi grid must be nonempty")


@dataclass(frozen=True)
class CurvePoint:
    L_km: float
    skr_bits_per_use: float
    skr_bits_per_s: float
    best_d2: float
    best_m: int
    best_chi: float
    curve_id: str
    mode: str


@dataclass(frozen=True)
class HeatmapResult:
    alpha_qm_grid: np.ndarray
    l_grid: np.ndarray
    d2_over_l: np.ndarray        # rows follow l_grid, columns alpha_qm_grid
    skr_bits_per_s: np.ndarray
    feasible: np.ndarray
    break_even_alpha: np.ndarray  # per-L boundary, NaN when no flip in range
    nsp_threshold: float


def _m_candidates(m_max: int, base_b: int) -> list[int]:
    """Dense small-m coverage plus a geometric tail and the switch-count steps."""
    cands = set(range(0, min(m_max, 64) + 1))
    if m_max > 64:
        cands.update(int(round(x)) for x in np.geomspace(65, m_max, 48))
    power = base_b
    while power <= m_max:
        cands.add(power)
        if power + 1 <= m_max:
            cands.add(power + 1)
        power *= base_b
    cands.add(m_max)
    return sorted(c for c in cands if 0 <= c <= m_max)


def _skr_analytic_vec(L: float, d2, m: int, params: ChannelParams,
                      chi: float, kappa0: float) -> np.ndarray:
    """Vectorized copy of the scalar analytic pipeline over a d2 array."""
    d2 = np.asarray(d2, dtype=float)
    d1 = L / 4.0 - d2 / 2.0
    t_qm1 = np.maximum(
        d1 / params.c_q + (d1 + d2) / params.c_c - d2 / params.c_q, 0.0)
    d_qm = params.c_qm * t_qm1 + params.c_qm * m * params.tau_s
    uses = switch_count(m, params.base_b)
    db = (params.alpha_db_per_km * (d1 + d2)
          + params.alpha_qm_db_per_km * d_qm)
    eta1 = 10.0 ** (-params.alpha_db_per_km * d1 / 10.0)
    eta_c_over_eta1 = 10.0 ** (-db / 10.0) / eta1 * params.eta_switch ** uses
    p0 = kappa0 * eta1 / 2.0
    q = 1.0 - p0
    qm1 = q ** (m + 1)
    z0 = (1.0 + 2.0 * q - 2.0 * qm1) / (p0 * (1.0 + q - 2.0 * qm1))
    p1 = 2.0 * chi * chi * eta1 * eta_c_over_eta1
    return p1 / (z0 * params.tau_s)


def _analytic_best(L: float, params: ChannelParams, spec: SweepSpec):
    """Exhaustive m scan with coarse-plus-golden d2 search. Returns (skr, d2, m)."""
    bound = d2_upper_bound(L, params) * (1.0 - 1e-12)
    grid = np.linspace(0.0, bound, spec.d2_points)
    best = (-math.inf, 0.0, 0)
    for m in _m_candidates(spec.m_max, params.base_b):
        vals = _skr_analytic_vec(L, grid, m, params, spec.chi, spec.kappa0)
        k = int(np.argmax(vals))
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, grid.size - 1)]
        skr, d2 = vals[k], grid[k]
        if hi > lo:
            res = minimize_scalar(
                lambda x: -_skr_analytic_vec(L, x, m, params, spec.chi,
                                             spec.kappa0),
                bounds=(lo, hi), method="bounded",
                options={"xatol": spec.d2_tol_rel * L})
            if -res.fun > skr:
                skr, d2 = -float(res.fun), float(res.x)
        if skr > best[0]:
            best = (skr, d2, m)
    if not math.isfinite(best[0]):
        raise InfeasibleGeometryError(f"no feasible layout at L = {L} km")
    return best


def _best_m_at_d2(L: float, d2: float, params: ChannelParams,
                  spec: SweepSpec) -> int:
    vals = [(float(_skr_analytic_vec(L, d2, m, params, spec.chi, spec.kappa0)), m)
            for m in _m_candidates(spec.m_max, params.base_b)]
    return max(vals, key=lambda t: t[0])[1]


def _numeric_eval(L: float, d2: float, m: int, chi: float,
                  params: ChannelParams, spec: SweepSpec) -> float:
    from .fock.protocol import numeric_skr, protocol_cutoff
    cutoff = protocol_cutoff(chi)
    if spec.cutoff is not None:
        cutoff = max(cutoff, spec.cutoff)
    try:
        geom = solve_geometry(L, d2, params, m)
        return numeric_skr(geom, params, chi, cutoff=cutoff).skr_bits_per_s
    except ProbabilityOverflowError:
        return 0.0


def optimize_point(L: float, params: ChannelParams,
                   spec: SweepSpec | None = None,
                   curve_id: str = "") -> CurvePoint:
    """Best (d2, m, chi) and the resulting rate at total distance L."""
    if L <= 0:
        raise InfeasibleGeometryError("total distance must be positive")
    spec = spec or SweepSpec()
    skr, d2, m = _analytic_best(L, params, spec)
    chi = spec.chi
    if spec.mode == "numeric":
        # stage 1: squeezing sweep at the analytic layout
        best = (-math.inf, chi)
        for c in sorted(spec.chi_grid):
            v = _numeric_eval(L, d2, m, c, params, spec)
            if v > best[0]:
                best = (v, c)
        skr, chi = best
        # stage 2: local layout refinement at the chosen squeezing
        bound = d2_upper_bound(L, params) * (1.0 - 1e-12)
        d2_cands = sorted({0.0, 0.85 * d2, d2, min(1.15 * d2, bound)})
        m_cands = sorted({max(0, m // 2), m, min(2 * m, spec.m_max)})
        for d2_c in d2_cands:
            for m_c in m_cands:
                if d2_c == d2 and m_c == m:
                    continue
                v = _numeric_eval(L, d2_c, m_c, chi, params, spec)
                if v > skr:
                    skr, d2, m = v, d2_c, m_c
    return CurvePoint(
        L_km=float(L), skr_bits_per_use=skr * params.tau_s,
        skr_bits_per_s=skr, best_d2=float(d2), best_m=int(m),
        best_chi=float(chi), curve_id=curve_id, mode=spec.mode,
    )


def rate_curve(l_grid, params: ChannelParams, spec: SweepSpec | None = None,
               curve_id: str = "", max_workers: int | None = None) -> list[CurvePoint]:
    """optimize_point over a distance grid, merged in grid order.

    Cell evaluations are independent; worker count comes from the
    FASTRELAY_THREADS environment variable unless given explicitly.
    """
    l_grid = [float(x) for x in l_grid]
    if not l_grid:
        raise ValueError("distance grid must be nonempty")
    spec = spec or SweepSpec()
    if max_workers is None:
        max_workers = int(os.environ.get(THREAD_ENV, "1") or "1")
    if max_workers > 1 and len(l_grid) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(_curve_cell,
                                 [(L, params, spec, curve_id) for L in l_grid]))
    return [optimize_point(L, params, spec, curve_id) for L in l_grid]


def _curve_cell(args) -> CurvePoint:
    L, params, spec, curve_id = args
    return optimize_point(L, params, spec, curve_id)


def crossover(curve_a, curve_b, l_min: float, l_max: float,
              samples: int = 65, tol_km: float = 0.05):
    """Distance where curve_a crosses curve_b, or None without a sign change.

    Both arguments are callables of L; the difference is sampled on a
    uniform grid and the first strict sign change is refined by bisection.
    """
    if l_max <= l_min:
        raise ValueError("need l_max > l_min")
    grid = np.linspace(l_min, l_max, samples)
    diffs = np.array([curve_a(L) - curve_b(L) for L in grid])
    bracket = None
    for i in range(samples - 1):
        a, b = diffs[i], diffs[i + 1]
        if np.isnan(a) or np.isnan(b):
            continue
        if a == 0.0 and b == 0.0:
            continue
        if a * b < 0.0 or (a == 0.0 and b != 0.0) or (a != 0.0 and b == 0.0):
            bracket = (grid[i], grid[i + 1], a)
            break
    if bracket is None:
        return None
    lo, hi, f_lo = bracket
    while hi - lo > tol_km:
        mid = 0.5 * (lo + hi)
        f_mid = curve_a(mid) - curve_b(mid)
        if (f_lo <= 0.0) == (f_mid <= 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def heatmap_optimal_d2(alpha_qm_grid, l_grid, params: ChannelParams,
                       spec: SweepSpec | None = None,
                       ideal_switches: bool = True,
                       nsp_threshold: float = 0.05,
                       refine_tol: float = 5e-4) -> HeatmapResult:
    """Optimal relay-offset ratio d2/L per (alpha_qm, L) cell.

    Lossless switches are assumed by default (they belong to the variable
    buffer, which this landscape ignores).  The break-even contour is the
    per-distance memory loss where the optimal layout flips between the
    buffered d2 = 0 regime and pushing the relay output into the channel;
    it is refined by bisection to `refine_tol` dB/km.
    """
    spec = spec or SweepSpec()
    if spec.mode != "analytic":
        raise ValueError("heatmap supports the analytic objective")
    a_grid = np.asarray(alpha_qm_grid, dtype=float)
    l_grid = np.asarray(l_grid, dtype=float)
    if a_grid.size == 0 or l_grid.size == 0:
        raise ValueError("grids must be nonempty")
    base = params.with_(eta_switch=1.0) if ideal_switches else params

    def ratio_at(L, alpha_qm):
        cell = base.with_(alpha_qm_db_per_km=float(alpha_qm))
        try:
            _, d2, _ = _analytic_best(L, cell, spec)
        except InfeasibleGeometryError:
            return np.nan
        return d2 / L

    shape = (l_grid.size, a_grid.size)
    ratios = np.full(shape, np.nan)
    skrs = np.full(shape, np.nan)
    feasible = np.zeros(shape, dtype=bool)
    for i, L in enumerate(l_grid):
        for j, alpha_qm in enumerate(a_grid):
            cell = base.with_(alpha_qm_db_per_km=float(alpha_qm))
            try:
                skr, d2, _ = _analytic_best(L, cell, spec)
            except InfeasibleGeometryError:
                continue
            ratios[i, j] = d2 / L
            skrs[i, j] = skr
            feasible[i, j] = True

    break_even = np.full(l_grid.size, np.nan)
    for i, L in enumerate(l_grid):
        row = ratios[i]
        flip = None
        for j in range(a_grid.size - 1):
            lo_nsp = row[j] <= nsp_threshold
            hi_nsp = row[j + 1] <= nsp_threshold
            if lo_nsp != hi_nsp:
                flip = (a_grid[j], a_grid[j + 1])
                break
        if flip is None:
            continue
        lo, hi = flip
        lo_is_nsp = ratio_at(L, lo) <= nsp_threshold
        while hi - lo > refine_tol:
            mid = 0.5 * (lo + hi)
            if (ratio_at(L, mid) <= nsp_threshold) == lo_is_nsp:
                lo = mid
            else:
                hi = mid
        break_even[i] = 0.5 * (lo + hi)
    return HeatmapResult(alpha_qm_grid=a_grid, l_grid=l_grid, d2_over_l=ratios,
                         skr_bits_per_s=skrs, feasible=feasible,
                         break_even_alpha=break_even,
                         nsp_threshold=nsp_threshold)
