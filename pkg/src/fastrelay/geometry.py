"""Node placement and timing for the practical single-rail protocol.

The balanced layout splits the total distance as L = 2(2 d1 + d2): each
half has a source at distance d1 from the outer relay, and the relay
output travels d2 plus two optical buffers before reaching the central
station.  The first buffer (d_qm1) absorbs the classical-quantum
propagation mismatch, the second (d_qm2 = c_qm * m * tau) implements the
m-slot storage window, and a digital variable buffer of base b adds
switch passes for synchronisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .bounds import eta_from_distance
from .errors import InfeasibleD2Error

__all__ = [
    "SPEED_OF_LIGHT_KM_S",
    "ChannelParams",
    "PracticalGeometry",
    "d2_upper_bound",
    "switch_count",
    "solve_geometry",
    "buffer_transmissivity",
]

SPEED_OF_LIGHT_KM_S = 299792.458


@dataclass(frozen=True)
class ChannelParams:
    """Fiber, buffer, detector and clock parameters for one deployment.

    Speeds are in km/s, attenuations in dB/km, tau_s is the pulse period
    (inverse repetition rate) and base_b the radix of the digital delay
    buffer.
    """

    alpha_db_per_km: float = 0.2
    alpha_qm_db_per_km: float = 0.2
    c_q: float = 2.0 * SPEED_OF_LIGHT_KM_S / 3.0
    c_c: float = 0.9997 * SPEED_OF_LIGHT_KM_S
    c_qm: float = 2.0 * SPEED_OF_LIGHT_KM_S / 3.0
    tau_s: float = 1e-9
    eta_switch: float = 0.99
    eta_det: float = 0.93
    dark_rate_hz: float = 0.01
    base_b: int = 2

    def __post_init__(self):
        if self.alpha_db_per_km < 0 or self.alpha_qm_db_per_km < 0:
            raise ValueError("attenuations must be nonnegative")
        if min(self.c_q, self.c_c, self.c_qm) <= 0:
            raise ValueError("signal speeds must be positive")
        if self.tau_s <= 0:
            raise ValueError("pulse period must be positive")
        if not 0.0 < self.eta_switch <= 1.0:
            raise ValueError("switch transmissivity must be in (0, 1]")
        if not 0.0 < self.eta_det <= 1.0:
            raise ValueError("detector efficiency must be in (0, 1]")
        if self.dark_rate_hz < 0:
            raise ValueError("dark-count rate must be nonnegative")
        if self.base_b < 2 or self.base_b != int(self.base_b):
            raise ValueError("buffer base must be an integer >= 2")

    @property
    def f(self) -> float:
        """Speed ratio c_q / c_c."""
        return self.c_q / self.c_c

    @property
    def dark_click_prob(self) -> float:
        """Per-gate dark-click probability, dark rate times pulse period."""
        return self.dark_rate_hz * self.tau_s

    @classmethod
    def default(cls, alpha_qm_db_per_km: float = 0.2, **overrides) -> "ChannelParams":
        """Defaults with the buffer-speed convention tied to buffer quality.

        Fiber-loop buffers (alpha_qm = 0.2 dB/km) run at the fiber speed
        c_q; for any other buffer loss the buffer medium is taken at the
        vacuum speed of light.
        """
        c = SPEED_OF_LIGHT_KM_S
        c_qm = 2.0 * c / 3.0 if alpha_qm_db_per_km == 0.2 else c
        kwargs = dict(alpha_qm_db_per_km=alpha_qm_db_per_km, c_qm=c_qm)
        kwargs.update(overrides)
        return cls(**kwargs)

    def with_(self, **overrides) -> "ChannelParams":
        return replace(self, **overrides)


@dataclass(frozen=True)
class PracticalGeometry:
    """All distances, times and transmissivities of one solved layout."""

    L_km: float
    d1_km: float
    d2_km: float
    d_qm1_km: float
    d_qm2_km: float
    m: int
    switch_uses: int
    t1_s: float
    t2_s: float
    tc_s: float
    t_qm1_s: float
    t_qm2_s: float
    eta1: float
    eta2: float
    eta_qm1: float
    eta_qm2: float
    eta_c: float = field(default=0.0)


def d2_upper_bound(L: float, params: ChannelParams) -> float:
    """Largest d2 for which the classical herald still arrives in time."""
    return L * (params.c_c + params.c_q) / (6.0 * params.c_c - 2.0 * params.c_q)


def switch_count(m: int, b: int) -> int:
    """Worst-case switch passes of the base-b variable buffer, b*ceil(log_b m) + 1.

    m = 0 bypasses the variable buffer; only the single routing switch
    remains.
    """
    if m < 0 or m != int(m):
        raise ValueError("storage steps m must be a nonnegative integer")
    if b < 2:
        raise ValueError("buffer base must be >= 2")
    if m <= 1:
        return 1
    # integer ceil(log_b(m)), immune to float log rounding
    digits = 0
    span = 1
    while span < m:
        span *= b
        digits += 1
    return b * digits + 1


def solve_geometry(L: float, d2: float, params: ChannelParams, m: int) -> PracticalGeometry:
    """Solve the node layout for total distance L with relay offset d2.

    Raises InfeasibleD2Error when d2 lies above the timing window (the
    boundary itself is allowed and gives d_qm1 = 0).
    """
    if L <= 0:
        raise ValueError("total distance must be positive")
    if d2 < 0:
        raise ValueError("relay offset d2 must be nonnegative")
    if m < 0 or m != int(m):
        raise ValueError("storage steps m must be a nonnegative integer")
    bound = d2_upper_bound(L, params)
    if d2 > bound * (1.0 + 1e-12):
        raise InfeasibleD2Error(d2, bound)

    d1 = L / 4.0 - d2 / 2.0
    t1 = d1 / params.c_q
    t2 = d2 / params.c_q
    tc = (d1 + d2) / params.c_c
    t_qm1 = max(t1 + tc - t2, 0.0)
    d_qm1 = params.c_qm * t_qm1
    t_qm2 = m * params.tau_s
    d_qm2 = params.c_qm * t_qm2

    uses = switch_count(m, params.base_b)
    eta1 = eta_from_distance(d1, params.alpha_db_per_km)
    eta2 = eta_from_distance(d2, params.alpha_db_per_km)
    eta_qm1 = eta_from_distance(d_qm1, params.alpha_qm_db_per_km)
    eta_qm2 = eta_from_distance(d_qm2, params.alpha_qm_db_per_km)
    eta_c = eta2 * eta_qm1 * eta_qm2 * params.eta_switch ** uses
    return PracticalGeometry(
        L_km=L, d1_km=d1, d2_km=d2, d_qm1_km=d_qm1, d_qm2_km=d_qm2,
        m=int(m), switch_uses=uses,
        t1_s=t1, t2_s=t2, tc_s=tc, t_qm1_s=t_qm1, t_qm2_s=t_qm2,
        eta1=eta1, eta2=eta2, eta_qm1=eta_qm1, eta_qm2=eta_qm2, eta_c=eta_c,
    )


def buffer_transmissivity(geom: PracticalGeometry, params: ChannelParams) -> float:
    """Total transmissivity of the local buffering stage including switches."""
    return geom.eta_qm1 * geom.eta_qm2 * params.eta_switch ** geom.switch_uses
