"""Ideal nested-relay theory for the dual-rail protocol.

A depth-N layout places relays so that classical heralds, travelling at
c_c, catch up with the slower quantum signals (c_q) at every merge point.
With f = c_q/c_c < 1 the weighted partial sums S_k of the segment lengths
obey a second-order linear recurrence whose roots are 1 and g = 2/(1-f),
which yields closed forms for the segment lengths, the scaling exponent
of the ideal rate K_N = eta**scaling / 2, and the quantum-memory
break-even thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import eta_from_distance
from .errors import InfeasibleGeometryError

__all__ = [
    "NestedSolution",
    "MemoryThreshold",
    "scaling_exponent",
    "scaling_asymptote",
    "scaling_polynomial",
    "segment_lengths",
    "ideal_rate",
    "memory_threshold",
    "e1_min",
    "critical_memory_loss",
]

# f this close to 1 makes g = 2/(1-f) blow up; treat as infeasible rather
# than returning huge geometry silently.
_F_MAX = 1.0 - 1e-9


def _check_f(f: float) -> None:
    if not 0.0 < f < _F_MAX:
        raise InfeasibleGeometryError(
            f"speed ratio f = c_q/c_c must be in (0, 1), got {f}"
        )


@dataclass(frozen=True)
class NestedSolution:
    """Solved segment layout at nesting depth N over total distance L."""

    depth: int
    m: int                      # number of segment classes, N + 1
    g: float                    # characteristic root 2 / (1 - f)
    partial_sums: np.ndarray    # S_0 .. S_m (km), S_m = L/2
    lengths: np.ndarray         # d_1 .. d_m (km)
    cost_km: float              # E = sum of d_k
    scaling: float              # E / L
    total_km: float


@dataclass(frozen=True)
class MemoryThreshold:
    """Buffered-relay cost at memory-to-channel loss ratio gamma."""

    gamma: float
    gamma_star: float           # critical ratio; no buffering pays above it
    e1_min: float               # minimum scaling cost (km)
    s1: float                   # optimal buffer lengths (km)
    s2: float


def scaling_exponent(f: float, N: int) -> float:
    """Rate-loss exponent of the depth-N layout; N = 0 gives exactly 1/2."""
    _check_f(f)
    if N < 0 or N != int(N):
        raise ValueError("nesting depth must be a nonnegative integer")
    if N == 0:
        return 0.5
    m = N + 1
    g = 2.0 / (1.0 - f)
    # closed form divided through by g**m so large depths stay finite
    g_m = g ** (-m)
    num = (1.0 - g ** (1 - m)) / (g - 1.0) - (m - 1) * g_m
    den = 1.0 - g_m
    return 0.5 - 0.5 * num / den


def scaling_asymptote(f: float) -> float:
    """Depth -> infinity limit of the exponent, f / (1 + f)."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"speed ratio must be in [0, 1], got {f}")
    return f / (1.0 + f)


def scaling_polynomial(f: float, N: int) -> float:
    """Exponent as an explicit rational function of f, for N = 1..5.

    Independent of scaling_exponent's partial-sum route; the two must agree
    to 1e-12 across f.
    """
    _check_f(f)
    if N == 1:
        return -1.0 / (f - 3.0)
    if N == 2:
        return (-f**2 + 2*f + 3) / (2*f**2 - 8*f + 14)
    if N == 3:
        return -(f**3 - 4*f**2 + 5*f + 2) / (f**3 - 5*f**2 + 11*f - 15)
    if N == 4:
        return (-3*f**4 + 16*f**3 - 34*f**2 + 32*f + 5) / (
            2*f**4 - 12*f**3 + 32*f**2 - 52*f + 62)
    if N == 5:
        return -(2*f**5 - 13*f**4 + 36*f**3 - 54*f**2 + 42*f + 3) / (
            f**5 - 7*f**4 + 22*f**3 - 42*f**2 + 57*f - 63)
    raise ValueError(f"explicit rational form only available for N = 1..5, got {N}")


def segment_lengths(f: float, N: int, L: float) -> NestedSolution:
    """Solve the depth-N segment lengths over total distance L (km).

    S_k = (L/2)(g^k - 1)/(g^m - 1) and d_k = S_k - 2 S_{k-1}; the result
    satisfies the total-length identity, the timing recursion
    (1-f) d_{k+1} = d_k + f S_k, and d_k >= 0.
    """
    _check_f(f)
    if L <= 0:
        raise ValueError("total distance must be positive")
    if N < 0 or N != int(N):
        raise ValueError("nesting depth must be a nonnegative integer")
    m = N + 1
    g = 2.0 / (1.0 - f)
    k = np.arange(m + 1)
    # (g^k - 1)/(g^m - 1) via negative powers: no overflow at any depth,
    # and S_0 = 0, S_m = L/2 hold exactly
    powers = g ** (k - m).astype(float)
    ratio = (powers - powers[0]) / (1.0 - powers[0])
    S = 0.5 * L * ratio
    d = S[1:] - 2.0 * S[:-1]
    cost = float(np.sum(d))
    return NestedSolution(
        depth=int(N), m=m, g=g, partial_sums=S, lengths=d,
        cost_km=cost, scaling=cost / L, total_km=float(L),
    )


def ideal_rate(f: float, N, L_km: float, alpha_db_per_km: float) -> float:
    """Ideal rate K_N = eta**scaling_N / 2 in bits per channel use.

    N may be math.inf, which selects the asymptotic exponent.
    """
    if N == math.inf:
        if not 0.0 < f < 1.0:
            raise InfeasibleGeometryError(f"speed ratio must be in (0, 1), got {f}")
        exponent = scaling_asymptote(f)
    else:
        exponent = scaling_exponent(f, N)
    eta = eta_from_distance(L_km, alpha_db_per_km)
    return 0.5 * eta ** exponent


def _gamma_star(f: float, c_c: float, c_qm: float) -> float:
    if f >= 3.0:
        raise ValueError(f"threshold formula requires f < 3, got {f}")
    if min(c_c, c_qm) <= 0:
        raise ValueError("signal speeds must be positive")
    return f * c_c / (c_qm * (3.0 - f))


def e1_min(gamma: float, f: float, c_c: float, c_qm: float, L: float = 1.0) -> float:
    """Minimum scaling cost of the depth-1 layout with buffer loss ratio gamma.

    Linear in gamma up to gamma_star, constant L/(3-f) beyond; continuous
    at the threshold.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    gs = _gamma_star(f, c_c, c_qm)
    if gamma <= gs:
        return L / 4.0 + gamma * (c_qm * L / (4.0 * c_c)) * (1.0 + 1.0 / f)
    return L / (3.0 - f)


def memory_threshold(f: float, c_c: float, c_qm: float,
                     gamma: float = 0.0, L: float = 1.0) -> MemoryThreshold:
    """Critical loss ratio gamma_star and the optimal buffered layout at gamma."""
    gs = _gamma_star(f, c_c, c_qm)
    if gamma <= gs:
        # buffered optimum: d1 = L/4, d2 = 0, storage only on the late side
        s1 = 0.0
        s2 = c_qm * (L / 4.0) * (1.0 / c_c + 1.0 / (f * c_c))
    else:
        s1 = s2 = 0.0
    return MemoryThreshold(
        gamma=gamma, gamma_star=gs,
        e1_min=e1_min(gamma, f, c_c, c_qm, L), s1=s1, s2=s2,
    )


def critical_memory_loss(f: float, c_c: float, c_qm: float,
                         alpha_db_per_km: float) -> float:
    """Memory attenuation (dB/km) below which buffering starts to pay."""
    return _gamma_star(f, c_c, c_qm) * alpha_db_per_km
