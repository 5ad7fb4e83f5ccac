"""fastrelay: rate engine for multi-node single-photon-interference QKD.

Capacity bounds, nested-relay scaling theory, practical-geometry timing,
analytic and full Fock-state secret-key rates, a Monte Carlo matching
simulator, and the parameter optimizer that turns them into curves,
crossovers and heatmaps.
"""

from ._accel import USE_NUMBA, backend
from .bounds import eta_from_distance, skc_bound
from .errors import (InfeasibleD2Error, InfeasibleGeometryError,
                     ProbabilityOverflowError, TruncationError)
from .geometry import (SPEED_OF_LIGHT_KM_S, ChannelParams, PracticalGeometry,
                       buffer_transmissivity, d2_upper_bound, solve_geometry,
                       switch_count)
from .nesting import (MemoryThreshold, NestedSolution, critical_memory_loss,
                      e1_min, ideal_rate, memory_threshold, scaling_asymptote,
                      scaling_exponent, scaling_polynomial, segment_lengths)
from .optimize import (CurvePoint, HeatmapResult, SweepSpec, crossover,
                       heatmap_optimal_d2, optimize_point, rate_curve)
from .rates import (DEFAULT_KAPPA0, RateBreakdown, p0_small_chi, p1_small_chi,
                    repeater_rate, skr_small_chi, skr_small_chi_closed_form,
                    z0_mean_wait, z1_mean_wait)
from .sim import SimConfig, SimStats, StorageMap, simulate_heralding, storage_time_map

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA",
    "backend",
    "eta_from_distance",
    "skc_bound",
    "InfeasibleD2Error",
    "InfeasibleGeometryError",
    "ProbabilityOverflowError",
    "TruncationError",
    "SPEED_OF_LIGHT_KM_S",
    "ChannelParams",
    "PracticalGeometry",
    "buffer_transmissivity",
    "d2_upper_bound",
    "solve_geometry",
    "switch_count",
    "MemoryThreshold",
    "NestedSolution",
    "critical_memory_loss",
    "e1_min",
    "ideal_rate",
    "memory_threshold",
    "scaling_asymptote",
    "scaling_exponent",
    "scaling_polynomial",
    "segment_lengths",
    "CurvePoint",
    "HeatmapResult",
    "SweepSpec",
    "crossover",
    "heatmap_optimal_d2",
    "optimize_point",
    "rate_curve",
    "DEFAULT_KAPPA0",
    "RateBreakdown",
    "p0_small_chi",
    "p1_small_chi",
    "repeater_rate",
    "skr_small_chi",
    "skr_small_chi_closed_form",
    "z0_mean_wait",
    "z1_mean_wait",
    "SimConfig",
    "SimStats",
    "StorageMap",
    "simulate_heralding",
    "storage_time_map",
    "__version__",
]
