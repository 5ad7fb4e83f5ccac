"""Threshold (click / no-click) detector model.

No-click on n incident photons has probability (1 - p_dark)(1 - eff)^n;
click is its complement.  Both elements are diagonal in the Fock basis,
which is what lets the engine keep measured modes pure via sqrt-POVM
weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DetectorModel"]


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0
    dark_click_prob: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("detector efficiency must be in (0, 1]")
        if not 0.0 <= self.dark_click_prob < 1.0:
            raise ValueError("dark-click probability must be in [0, 1)")

    @classmethod
    def ideal(cls) -> "DetectorModel":
        return cls(1.0, 0.0)

    @classmethod
    def from_params(cls, params) -> "DetectorModel":
        """Build from ChannelParams: per-gate dark probability is rate*tau."""
        return cls(params.eta_det, params.dark_click_prob)

    def no_click_weights(self, max_occ: int) -> np.ndarray:
        n = np.arange(max_occ + 1)
        return (1.0 - self.dark_click_prob) * (1.0 - self.efficiency) ** n

    def click_weights(self, max_occ: int) -> np.ndarray:
        return 1.0 - self.no_click_weights(max_occ)
