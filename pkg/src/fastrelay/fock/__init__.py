"""Truncated Fock-space engine: states, linear optics, detectors, protocol."""

from .detectors import DetectorModel
from .protocol import (bsm_click, bsm_outcome_probs, determine_p0_constant,
                       full_protocol_pure, full_protocol_state, numeric_skr,
                       protocol_cutoff, relay_half_state, single_node_skr,
                       single_node_state)
from .states import (EPS_TRUNC, DensityMatrix, StateVector, beamsplitter,
                     bell_project, cutoff_for_chi, entropy, fidelity_with_pure,
                     fock_state, loss_channel, partial_trace, povm_select,
                     rci, single_photon_entangled, tensor, tmsv, vacuum)

__all__ = [
    "EPS_TRUNC",
    "DetectorModel",
    "DensityMatrix",
    "StateVector",
    "beamsplitter",
    "bell_project",
    "bsm_click",
    "bsm_outcome_probs",
    "cutoff_for_chi",
    "determine_p0_constant",
    "entropy",
    "fidelity_with_pure",
    "fock_state",
    "full_protocol_pure",
    "full_protocol_state",
    "loss_channel",
    "numeric_skr",
    "partial_trace",
    "povm_select",
    "protocol_cutoff",
    "rci",
    "relay_half_state",
    "single_node_skr",
    "single_node_state",
    "single_photon_entangled",
    "tensor",
    "tmsv",
    "vacuum",
]
