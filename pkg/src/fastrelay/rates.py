"""Analytic secret-key-rate pipeline for the practical protocol.

SKR = r * R / tau with R = 1 / (Z0 * Z1): Z0 is the mean number of clock
slots until both relays hold a live herald simultaneously (storage window
m slots), Z1 = 1/P1 the mean wait for the final swap.  In the analytic
small-squeezing mode the raw key per success is r = 1 bit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ProbabilityOverflowError
from .geometry import ChannelParams, PracticalGeometry

__all__ = [
    "DEFAULT_KAPPA0",
    "RateBreakdown",
    "p0_small_chi",
    "p1_small_chi",
    "z0_mean_wait",
    "z1_mean_wait",
    "repeater_rate",
    "skr_small_chi",
    "skr_small_chi_closed_form",
]

# Relay heralding constant: P0 = kappa0 * eta1 / 2.  The Fock-space
# brute-force oracle (fock.protocol.determine_p0_constant) confirms
# kappa0 = 1; see the oracle test before touching this.
DEFAULT_KAPPA0 = 1.0


@dataclass(frozen=True)
class RateBreakdown:
    """Per-factor decomposition of one secret-key-rate evaluation."""

    p0: float                # relay heralding probability per slot, per side
    p1: float                # final swap probability per matched pair
    q: float                 # 1 - p0
    z0: float                # mean slots until both sides hold a herald
    z1: float                # mean matched pairs per final success, 1/p1
    repeater_rate: float     # successes per slot, 1 / (z0 * z1)
    raw_rate_bits: float     # key bits per success
    skr_bits_per_s: float
    mode: str                # "analytic" or "numeric"


def p0_small_chi(eta1: float, kappa0: float = DEFAULT_KAPPA0) -> float:
    """Relay heralding probability in the small-squeezing limit, kappa0*eta1/2."""
    if not 0.0 <= eta1 <= 1.0:
        raise ValueError(f"eta1 must be in [0, 1], got {eta1}")
    return kappa0 * eta1 / 2.0


def p1_small_chi(chi: float, eta_c: float) -> float:
    """Final-swap probability 2 * chi**2 * eta_c in the small-squeezing limit."""
    if not 0.0 < chi < 1.0:
        raise ValueError(f"squeezing parameter must be in (0, 1), got {chi}")
    p1 = 2.0 * chi * chi * eta_c
    if p1 > 1.0:
        raise ProbabilityOverflowError(
            f"2*chi^2*eta_c = {p1:.6g} exceeds 1; chi too large for the "
            "small-squeezing formula"
        )
    return p1


def z0_mean_wait(p0: float, m: int) -> float:
    """Mean slots until both relays herald within an m-slot storage window."""
    if p0 <= 0.0:
        raise ValueError("p0 = 0 never heralds; mean wait is infinite")
    if p0 > 1.0:
        raise ValueError(f"p0 must be in (0, 1], got {p0}")
    if m < 0 or m != int(m):
        raise ValueError("storage window m must be a nonnegative integer")
    q = 1.0 - p0
    qm1 = q ** (m + 1)
    return (1.0 + 2.0 * q - 2.0 * qm1) / (p0 * (1.0 + q - 2.0 * qm1))


def z1_mean_wait(p1: float) -> float:
    """Mean matched pairs consumed per final success (no cutoff), 1/p1."""
    if not 0.0 < p1 <= 1.0:
        raise ValueError(f"p1 must be in (0, 1], got {p1}")
    return 1.0 / p1


def repeater_rate(z0: float, z1: float) -> float:
    """Protocol successes per slot."""
    return 1.0 / (z0 * z1)


def skr_small_chi(geom: PracticalGeometry, params: ChannelParams, chi: float,
                  kappa0: float = DEFAULT_KAPPA0) -> RateBreakdown:
    """Analytic SKR pipeline with r fixed to 1 bit per success."""
    p0 = p0_small_chi(geom.eta1, kappa0)
    p1 = p1_small_chi(chi, geom.eta_c)
    z0 = z0_mean_wait(p0, geom.m)
    z1 = z1_mean_wait(p1)
    rate = repeater_rate(z0, z1)
    return RateBreakdown(
        p0=p0, p1=p1, q=1.0 - p0, z0=z0, z1=z1, repeater_rate=rate,
        raw_rate_bits=1.0, skr_bits_per_s=rate / params.tau_s, mode="analytic",
    )


def skr_small_chi_closed_form(geom: PracticalGeometry, params: ChannelParams,
                              chi: float) -> float:
    """Single-expression form of the analytic SKR (bits/s).

    Algebraically identical to skr_small_chi; kept as an independent code
    path so the identity can be checked numerically.
    """
    eta1 = geom.eta1
    loss_product = (chi * chi * eta1 * geom.eta2 * geom.eta_qm1 * geom.eta_qm2
                    * params.eta_switch ** geom.switch_uses)
    survive = (1.0 - eta1 / 2.0) ** (geom.m + 1)
    numerator = eta1 / 2.0 + 2.0 * survive - 2.0
    denominator = eta1 + 2.0 * survive - 3.0
    return loss_product * numerator / (params.tau_s * denominator)
