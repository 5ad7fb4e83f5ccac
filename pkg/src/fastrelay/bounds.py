"""Secret-key capacity benchmarks for lossy bosonic channels.

Every protocol rate in this package is compared against the repeaterless
and n-repeater secret-key capacities of the pure-loss channel,
``-log2(1 - eta^(1/(n+1)))``.  Distances are in km and attenuation in
dB/km throughout; natural-log attenuation is never used.
"""

from __future__ import annotations

import math

__all__ = ["eta_from_distance", "skc_bound"]


def eta_from_distance(length_km: float, alpha_db_per_km: float) -> float:
    """End-to-end transmissivity 10**(-alpha*L/10) of a fiber span.

    Raises ValueError for negative or non-finite inputs.
    """
    if not (math.isfinite(length_km) and math.isfinite(alpha_db_per_km)):
        raise ValueError("length and attenuation must be finite")
    if length_km < 0 or alpha_db_per_km < 0:
        raise ValueError("length and attenuation must be nonnegative")
    return 10.0 ** (-alpha_db_per_km * length_km / 10.0)


def skc_bound(eta: float, repeaters: int = 0, allow_infinite: bool = False) -> float:
    """Secret-key capacity bound with `repeaters` ideal repeaters, in bits/use.

    repeaters=0 is the repeaterless bound, repeaters=1 the single-repeater
    bound.  eta=1 is an infinite-capacity channel: returns inf when
    `allow_infinite` is set, raises otherwise.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {eta}")
    if repeaters < 0 or repeaters != int(repeaters):
        raise ValueError("repeater count must be a nonnegative integer")
    if eta == 1.0:
        if allow_infinite:
            return math.inf
        raise ValueError("eta = 1 gives an infinite capacity (pass allow_infinite=True)")
    root = eta ** (1.0 / (repeaters + 1))
    # log1p keeps precision when root is far below machine epsilon
    return -math.log1p(-root) / math.log(2.0)
