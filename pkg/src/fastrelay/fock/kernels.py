"""Hot kernels for the sparse Fock engine.

The two-mode mixing expansion dominates the cost of protocol-sized states
(hundreds of thousands of terms), so it ships as a numba loop with a
vectorized numpy fallback.  Both variants emit terms in identical order:
input-term major, output occupation ascending.
"""

from __future__ import annotations

import numpy as np

from .._accel import USE_NUMBA, njit

__all__ = ["bs_expand"]


def _bs_expand_numpy(codes, amps, n, m, sh_i, sh_j, clear_mask, tab):
    tot = n + m
    counts = tot + 1
    offsets = np.concatenate(([0], np.cumsum(counts)))
    total = int(offsets[-1])
    idx = np.repeat(np.arange(codes.size), counts)
    c = np.arange(total, dtype=np.int64) - np.repeat(offsets[:-1], counts)
    base = codes[idx] & clear_mask
    out_codes = base | (c << sh_i) | ((tot[idx] - c) << sh_j)
    out_amps = amps[idx] * tab[n[idx], m[idx], c]
    return out_codes, out_amps


def _bs_expand_loops(codes, amps, n, m, sh_i, sh_j, clear_mask, tab):
    nterms = codes.size
    total = 0
    for i in range(nterms):
        total += n[i] + m[i] + 1
    out_codes = np.empty(total, np.int64)
    out_amps = np.empty(total, np.complex128)
    pos = 0
    for i in range(nterms):
        tot = n[i] + m[i]
        base = codes[i] & clear_mask
        a = amps[i]
        for c in range(tot + 1):
            out_codes[pos] = base | (c << sh_i) | ((tot - c) << sh_j)
            out_amps[pos] = a * tab[n[i], m[i], c]
            pos += 1
    return out_codes, out_amps


if USE_NUMBA:
    bs_expand = njit(cache=True)(_bs_expand_loops)
else:
    bs_expand = _bs_expand_numpy
