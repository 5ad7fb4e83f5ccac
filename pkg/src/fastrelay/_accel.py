"""Numba toggle for the hot kernels.

Every hot kernel in the package ships in two interchangeable variants: a
numba ``@njit`` loop and a vectorized pure-numpy fallback.  Which one runs
is decided once at import time:

* numpy fallback if numba is not importable, or
* numpy fallback if the environment variable ``FASTRELAY_NO_NUMBA`` is set
  to ``1``/``true``/``yes``/``on``.

Both variants consume identical RNG streams and produce identical results;
``benchmarks/bench_kernels.py`` compares their speed.
"""

from __future__ import annotations

import os

_flag = os.environ.get("FASTRELAY_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag in {"1", "true", "yes", "on"}

if not NUMBA_DISABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        njit = None
else:
    njit = None

USE_NUMBA = njit is not None


def backend() -> str:
    """Name of the active kernel backend, recorded in run metadata."""
    return "numba" if USE_NUMBA else "numpy"
