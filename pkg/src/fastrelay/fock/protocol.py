"""Numerical oracle for the full multi-node protocol and its baseline.

Composes the source, relay and swap stages as one global pure state:
TMSV and a split single photon feed each relay, channel loss purifies
into explicit environment modes, relay and central swaps are balanced
mixers followed by threshold-detector POVM weights on the click pattern,
and only the very last step traces the environment to produce the
conditional state shared by the end parties.

Mode layout of one half (built by relay_half_state):

    0 A      retained source mode
    1 det1   relay detector, no-click side of the kept pattern
    2 det2   relay detector, click side
    3 B      mode travelling on toward the central station
    4 E      loss environment of the transmitted source mode
    5 F      loss environment of the relay photon
    6 G      loss environment of the central channel (after add_central_loss)

The tensored full state repeats the layout at offset 7 for the far half.
"""

from __future__ import annotations

from math import sqrt

import numpy as np

from ..bounds import eta_from_distance
from ..errors import ProbabilityOverflowError
from ..geometry import ChannelParams, PracticalGeometry
from ..rates import RateBreakdown, repeater_rate, z0_mean_wait, z1_mean_wait
from .detectors import DetectorModel
from .states import (DensityMatrix, StateVector, beamsplitter, cutoff_for_chi,
                     loss_channel, partial_trace, povm_select, rci,
                     single_photon_entangled, tensor, tmsv)

__all__ = [
    "PROTOCOL_EPS_TAIL",
    "bsm_click",
    "bsm_outcome_probs",
    "relay_half_state",
    "full_protocol_pure",
    "full_protocol_state",
    "single_node_state",
    "numeric_skr",
    "single_node_skr",
    "determine_p0_constant",
    "protocol_cutoff",
]

# amplitude-tail target used when choosing a cutoff for a given squeezing;
# chi = 0.25 maps to cutoff 8
PROTOCOL_EPS_TAIL = 6e-6

_P1_FLOOR = 1e-300


def protocol_cutoff(chi: float) -> int:
    """Cutoff for a protocol run at squeezing chi (tail below 6e-6)."""
    return cutoff_for_chi(chi, PROTOCOL_EPS_TAIL, minimum=2, cap=14)


def bsm_click(state: StateVector, modes, detectors: DetectorModel,
              pattern: int = +1, dedup: bool = True) -> StateVector:
    """Swap attempt on `modes`: balanced mixer, then one click + one no-click.

    pattern=+1 puts the click on modes[1] and keeps the (|01> + |10>)
    combination; pattern=-1 clicks modes[0] and keeps the odd combination.
    The measured modes stay in the state carrying sqrt-POVM weights, so
    the squared norm is the outcome probability.
    """
    i, j = modes
    mixed = beamsplitter(state, (i, j), 1 / sqrt(2), 1 / sqrt(2), dedup=dedup)
    max_occ = mixed.occ_mask
    click = np.sqrt(detectors.click_weights(max_occ))
    no_click = np.sqrt(detectors.no_click_weights(max_occ))
    if pattern >= 0:
        mixed = povm_select(mixed, j, click)
        return povm_select(mixed, i, no_click)
    mixed = povm_select(mixed, i, click)
    return povm_select(mixed, j, no_click)


def bsm_outcome_probs(state: StateVector, modes, detectors: DetectorModel) -> dict:
    """Probabilities of all four click patterns of one swap attempt."""
    i, j = modes
    mixed = beamsplitter(state, (i, j), 1 / sqrt(2), 1 / sqrt(2))
    max_occ = mixed.occ_mask
    click = np.sqrt(detectors.click_weights(max_occ))
    no_click = np.sqrt(detectors.no_click_weights(max_occ))
    probs = {}
    for pat, wi, wj in (("nn", no_click, no_click), ("nc", no_click, click),
                        ("cn", click, no_click), ("cc", click, click)):
        probs[pat] = povm_select(povm_select(mixed, i, wi), j, wj).norm_sq()
    return probs


def relay_half_state(chi: float, eta1: float, detectors: DetectorModel,
                     cutoff: int, pattern: int = +1):
    """One heralded half of the protocol.

    Returns the unnormalized post-selected state (modes 0..5 as in the
    module docstring) and the probability of the selected click pattern;
    the full heralding probability counts both patterns, p0 = 2 * p.
    """
    st = tensor(tmsv(chi, cutoff), single_photon_entangled())
    # modes now: A=0, C=1, D=2, B=3
    st = loss_channel(st, 1, eta1)   # E -> 4
    st = loss_channel(st, 2, eta1)   # F -> 5
    st = bsm_click(st, (1, 2), detectors, pattern=pattern)
    return st, st.norm_sq()


def full_protocol_pure(chi: float, eta1: float, eta_c: float,
                       detectors: DetectorModel, cutoff: int,
                       pattern: int = +1):
    """Global 14-mode pure state after the central swap's POVM weights.

    Returns (state, p0, p_final_pattern); the state is built from
    normalized heralded halves, so its squared norm is the probability of
    the selected central click pattern.
    """
    half, p_half = relay_half_state(chi, eta1, detectors, cutoff,
                                    pattern=pattern)
    if p_half <= 0.0:
        raise ProbabilityOverflowError("relay heralding probability underflowed")
    p0 = 2.0 * p_half
    half = loss_channel(half, 3, eta_c)          # G -> 6
    half.amps /= sqrt(half.norm_sq())
    full = tensor(half, half)                    # far half at offset 7
    full = bsm_click(full, (3, 10), detectors, pattern=pattern, dedup=False)
    return full, p0, full.norm_sq()


def full_protocol_state(chi: float, eta1: float, eta_c: float,
                        detectors: DetectorModel, cutoff: int | None = None,
                        pattern: int = +1):
    """Conditional end-to-end state and both success probabilities.

    Returns (rho, p0, p1): rho is the normalized two-mode state held by
    the end parties after a full heralded run, p0 the per-side relay
    heralding probability, p1 the central swap probability (both count
    the two accepted click patterns).
    """
    if cutoff is None:
        cutoff = protocol_cutoff(chi)
    full, p0, p_pat = full_protocol_pure(chi, eta1, eta_c, detectors,
                                         cutoff, pattern=pattern)
    rho = partial_trace(full, (0, 7))
    trace = rho.trace_tracked
    p1 = 2.0 * trace
    if p1 < _P1_FLOOR:
        raise ProbabilityOverflowError(f"central swap probability underflowed ({p1:.3g})")
    return rho.normalized(), p0, p1


def single_node_state(chi: float, eta_arm: float, detectors: DetectorModel,
                      cutoff: int, pattern: int = +1):
    """Documented single-node baseline: one central swap, no relays.

    Both parties keep one TMSV mode and send the other over half the total
    distance (per-arm transmissivity eta_arm) straight to the central
    station, where the same mixer-plus-threshold-detector swap attempts a
    herald every clock slot.  Returns (rho, p_single).
    """
    src = tmsv(chi, cutoff)
    st = tensor(src, src)            # A=0, C=1, A'=2, C'=3
    st = loss_channel(st, 1, eta_arm)
    st = loss_channel(st, 3, eta_arm)
    st = bsm_click(st, (1, 3), detectors, pattern=pattern, dedup=False)
    rho = partial_trace(st, (0, 2))
    trace = rho.trace_tracked
    p_single = 2.0 * trace
    if p_single < _P1_FLOOR:
        raise ProbabilityOverflowError("baseline swap probability underflowed")
    return rho.normalized(), p_single


def numeric_skr(geom: PracticalGeometry, params: ChannelParams, chi: float,
                cutoff: int | None = None) -> RateBreakdown:
    """Full-state SKR: raw key from the reverse coherent information.

    The decoder side is the far party, so r = max(S(A) - S(AA'), 0); the
    waiting statistics reuse the analytic mean-wait formulas with the
    numerically obtained probabilities.
    """
    detectors = DetectorModel.from_params(params)
    rho, p0, p1 = full_protocol_state(chi, geom.eta1, geom.eta_c, detectors,
                                      cutoff=cutoff)
    r = max(rci(rho, decoder_modes=(1,)), 0.0)
    z0 = z0_mean_wait(min(p0, 1.0), geom.m)
    z1 = z1_mean_wait(min(p1, 1.0))
    rate = repeater_rate(z0, z1)
    return RateBreakdown(
        p0=p0, p1=p1, q=1.0 - p0, z0=z0, z1=z1, repeater_rate=rate,
        raw_rate_bits=r, skr_bits_per_s=r * rate / params.tau_s, mode="numeric",
    )


def single_node_skr(L_km: float, params: ChannelParams, chi: float,
                    cutoff: int | None = None) -> RateBreakdown:
    """Baseline SKR r * p_single / tau; every slot is a fresh attempt."""
    if cutoff is None:
        cutoff = protocol_cutoff(chi)
    eta_arm = eta_from_distance(L_km / 2.0, params.alpha_db_per_km)
    detectors = DetectorModel.from_params(params)
    rho, p_single = single_node_state(chi, eta_arm, detectors, cutoff)
    r = max(rci(rho, decoder_modes=(1,)), 0.0)
    p = min(p_single, 1.0)
    return RateBreakdown(
        p0=p, p1=1.0, q=1.0 - p, z0=1.0 / p, z1=1.0, repeater_rate=p,
        raw_rate_bits=r, skr_bits_per_s=r * p / params.tau_s, mode="numeric",
    )


def determine_p0_constant(chi: float = 1e-3, eta1: float = 0.5,
                          cutoff: int = 4) -> float:
    """Brute-force the relay heralding constant kappa0 with p0 = kappa0*eta1/2.

    The derivation sections print two incompatible small-squeezing values
    for the relay probability; this composes the actual circuit with ideal
    detectors and measures the constant directly.  rates.DEFAULT_KAPPA0
    must match the value recorded here (it is 1.0: p0 -> eta1/2).
    """
    _, p_half = relay_half_state(chi, eta1, DetectorModel.ideal(), cutoff)
    p0 = 2.0 * p_half
    return 2.0 * p0 / eta1
