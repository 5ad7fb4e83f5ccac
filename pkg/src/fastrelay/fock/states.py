"""Sparse multi-mode Fock states and the linear-optics toolbox.

States are stored as packed occupation codes (a few bits per mode inside
one int64) with complex amplitudes, so protocol-sized superpositions stay
cheap while every operation remains exact up to the truncation metadata.
Loss channels append explicit vacuum environment modes and the global
state is kept pure for as long as possible; mixing only happens in
partial_trace.

Conventions: the two-mode mixer maps creation operators as
a_i+ -> t a_i+ + r a_j+ and a_j+ -> -conj(r) a_i+ + conj(t) a_j+, so a
single photon splits as |1,0> -> t|1,0> + r|0,1>.
"""

from __future__ import annotations

import json
import math
from math import comb, factorial, sqrt

import numpy as np
import scipy.sparse

from ..errors import TruncationError
from .kernels import bs_expand

__all__ = [
    "EPS_TRUNC",
    "StateVector",
    "DensityMatrix",
    "vacuum",
    "fock_state",
    "tmsv",
    "single_photon_entangled",
    "tensor",
    "beamsplitter",
    "loss_channel",
    "povm_select",
    "bell_project",
    "partial_trace",
    "entropy",
    "rci",
    "fidelity_with_pure",
    "cutoff_for_chi",
]

# default amplitude-tail bound for constructed source states
EPS_TRUNC = 1e-4

# amplitudes this far below the dominant one cannot move any tracked
# tolerance; dropping them keeps term counts structural
_PRUNE_REL = 1e-18

_BIT_BUDGET = 60  # codes must stay positive in int64


class StateVector:
    """Sparse pure state over `mode_count` bosonic modes.

    `cutoff` records the largest occupation the state may contain (basis
    metadata, updated by operations); `bits` is the packing width per mode.
    """

    __slots__ = ("mode_count", "cutoff", "bits", "codes", "amps")

    def __init__(self, mode_count: int, cutoff: int, codes, amps, bits: int = 4):
        if mode_count < 1:
            raise ValueError("state needs at least one mode")
        if mode_count * bits > _BIT_BUDGET:
            raise TruncationError(
                f"{mode_count} modes at {bits} bits/mode exceed the packing budget"
            )
        if cutoff >= (1 << bits):
            raise TruncationError(
                f"cutoff {cutoff} not representable at {bits} bits/mode"
            )
        self.mode_count = int(mode_count)
        self.cutoff = int(cutoff)
        self.bits = int(bits)
        self.codes = np.asarray(codes, dtype=np.int64)
        self.amps = np.asarray(amps, dtype=np.complex128)

    # -- bookkeeping -------------------------------------------------

    @property
    def occ_mask(self) -> int:
        return (1 << self.bits) - 1

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def occupations(self, mode: int) -> np.ndarray:
        return (self.codes >> (self.bits * mode)) & self.occ_mask

    def amplitude(self, occ) -> complex:
        code = self._pack(occ)
        pos = np.searchsorted(self.codes, code)
        if pos < self.codes.size and self.codes[pos] == code:
            return complex(self.amps[pos])
        return 0.0 + 0.0j

    def items(self):
        """Occupation-tuple / amplitude pairs, ascending code order."""
        for code, amp in zip(self.codes, self.amps):
            yield self._unpack(int(code)), complex(amp)

    def _pack(self, occ) -> int:
        if len(occ) != self.mode_count:
            raise ValueError("occupation length does not match mode count")
        code = 0
        for i, n in enumerate(occ):
            if not 0 <= n <= self.occ_mask:
                raise TruncationError(f"occupation {n} outside packing range")
            code |= int(n) << (self.bits * i)
        return code

    def _unpack(self, code: int):
        return tuple((code >> (self.bits * i)) & self.occ_mask
                     for i in range(self.mode_count))

    def dedup(self) -> "StateVector":
        """Merge duplicate codes and drop negligible amplitudes, in place."""
        order = np.argsort(self.codes, kind="stable")
        codes = self.codes[order]
        uniq, starts = np.unique(codes, return_index=True)
        sums = np.add.reduceat(self.amps[order], starts)
        mags = np.abs(sums)
        floor = mags.max(initial=0.0) * _PRUNE_REL
        keep = mags > floor
        self.codes, self.amps = uniq[keep], sums[keep]
        return self

    def copy(self) -> "StateVector":
        return StateVector(self.mode_count, self.cutoff,
                           self.codes.copy(), self.amps.copy(), self.bits)

    def normalized(self) -> "StateVector":
        out = self.copy()
        out.amps /= sqrt(self.norm_sq())
        return out

    def repacked(self, bits: int) -> "StateVector":
        if bits == self.bits:
            return self
        if self.mode_count * bits > _BIT_BUDGET:
            raise TruncationError("repack exceeds the packing budget")
        new_mask = (1 << bits) - 1
        codes = np.zeros_like(self.codes)
        for mode in range(self.mode_count):
            occ = self.occupations(mode)
            if occ.max(initial=0) > new_mask:
                raise TruncationError("occupation too large for requested width")
            codes |= occ << (bits * mode)
        return StateVector(self.mode_count, self.cutoff, codes, self.amps.copy(), bits)

    def to_json(self) -> str:
        entries = [
            {"occ": list(occ), "re": amp.real, "im": amp.imag}
            for occ, amp in self.items()
        ]
        return json.dumps({"mode_count": self.mode_count, "cutoff": self.cutoff,
                           "amplitudes": entries})


class DensityMatrix:
    """Dense reduced state over a few kept modes, dim = per-mode dimension."""

    __slots__ = ("mode_count", "dim", "matrix", "trace_tracked")

    def __init__(self, mode_count: int, dim: int, matrix: np.ndarray):
        self.mode_count = int(mode_count)
        self.dim = int(dim)
        self.matrix = np.asarray(matrix, dtype=np.complex128)
        self.trace_tracked = float(np.trace(self.matrix).real)

    @property
    def cutoff(self) -> int:
        return self.dim - 1

    def validate(self, tol: float = 1e-10) -> None:
        scale = max(abs(self.trace_tracked), 1.0)
        if np.abs(self.matrix - self.matrix.conj().T).max() > tol * scale:
            raise ValueError("density matrix is not Hermitian within tolerance")
        w = np.linalg.eigvalsh(self.matrix)
        if w.min() < -tol * scale:
            raise ValueError(f"density matrix has negative eigenvalue {w.min():.3g}")

    def normalized(self) -> "DensityMatrix":
        return DensityMatrix(self.mode_count, self.dim,
                             self.matrix / self.trace_tracked)

    def partial_trace(self, keep) -> "DensityMatrix":
        keep = tuple(keep)
        d, k = self.dim, self.mode_count
        tensor = self.matrix.reshape((d,) * (2 * k))
        drop = [i for i in range(k) if i not in keep]
        for count, mode in enumerate(sorted(drop)):
            axis = mode - count  # earlier traces shrank the tensor
            rank = tensor.ndim // 2
            tensor = np.trace(tensor, axis1=axis, axis2=axis + rank)
        nk = len(keep)
        return DensityMatrix(nk, d, tensor.reshape(d ** nk, d ** nk))

    def to_json(self) -> str:
        return json.dumps({
            "mode_count": self.mode_count, "dim": self.dim,
            "re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist(),
        })


# -- constructors ----------------------------------------------------


def vacuum(mode_count: int, cutoff: int, bits: int = 4) -> StateVector:
    return StateVector(mode_count, cutoff, [0], [1.0 + 0.0j], bits)


def fock_state(occ, cutoff: int | None = None, bits: int = 4) -> StateVector:
    cutoff = max(occ) if cutoff is None else cutoff
    st = vacuum(len(occ), cutoff, bits)
    st.codes = np.array([st._pack(occ)], dtype=np.int64)
    return st


def tmsv(chi: float, cutoff: int, eps_trunc: float = EPS_TRUNC,
         bits: int = 4) -> StateVector:
    """Two-mode squeezed vacuum sqrt(1-chi^2) sum_n chi^n |n,n>."""
    if not 0.0 <= chi < 1.0:
        raise ValueError(f"squeezing parameter must be in [0, 1), got {chi}")
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    if chi > 0 and chi ** (cutoff + 1) >= eps_trunc:
        raise TruncationError(
            f"cutoff {cutoff} leaves amplitude tail {chi ** (cutoff + 1):.3g} "
            f">= eps_trunc {eps_trunc:.3g} at chi = {chi}"
        )
    n = np.arange(cutoff + 1, dtype=np.int64)
    amps = sqrt(1.0 - chi * chi) * chi ** n.astype(float)
    codes = n | (n << bits)
    return StateVector(2, cutoff, codes, amps, bits)


def single_photon_entangled(cutoff: int = 1, bits: int = 4) -> StateVector:
    """(|0,1> + |1,0>)/sqrt(2): one photon split on a balanced mixer."""
    st = vacuum(2, cutoff, bits)
    st.codes = np.array([1 << bits, 1], dtype=np.int64)
    st.amps = np.array([1 / sqrt(2), 1 / sqrt(2)], dtype=np.complex128)
    st.codes.sort()
    return st


def cutoff_for_chi(chi: float, eps_trunc: float = EPS_TRUNC,
                   minimum: int = 3, cap: int = 14) -> int:
    """Smallest cutoff keeping the source amplitude tail below eps_trunc."""
    if chi <= 0:
        return minimum
    need = math.ceil(math.log(eps_trunc) / math.log(chi)) - 1
    need = max(minimum, need)
    if need > cap:
        raise TruncationError(f"chi = {chi} needs cutoff {need} > cap {cap}")
    return need


# -- operations ------------------------------------------------------


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Product state; mode indices of `b` follow those of `a`."""
    bits = max(a.bits, b.bits)
    total_modes = a.mode_count + b.mode_count
    if total_modes * bits > _BIT_BUDGET:
        bits = _BIT_BUDGET // total_modes
        if bits < 1:
            raise TruncationError("too many modes to pack")
    a = a.repacked(bits)
    b = b.repacked(bits)
    shift = bits * a.mode_count
    codes = (a.codes[:, None] | (b.codes[None, :] << shift)).ravel()
    amps = (a.amps[:, None] * b.amps[None, :]).ravel()
    return StateVector(total_modes, max(a.cutoff, b.cutoff), codes, amps, bits)


def _mix_table(t: complex, r: complex, nmax: int) -> np.ndarray:
    """tab[n, m, c] = <c, n+m-c| B |n, m> for the creation-operator map."""
    tab = np.zeros((nmax + 1, nmax + 1, 2 * nmax + 1), dtype=np.complex128)
    rc, tc = np.conj(r), np.conj(t)
    for n in range(nmax + 1):
        for m in range(nmax + 1):
            for c in range(n + m + 1):
                s = 0.0 + 0.0j
                for k in range(max(0, c - m), min(n, c) + 1):
                    s += (comb(n, k) * comb(m, c - k)
                          * t ** k * r ** (n - k) * (-rc) ** (c - k)
                          * tc ** (m - c + k))
                tab[n, m, c] = s * sqrt(
                    factorial(c) * factorial(n + m - c)
                    / (factorial(n) * factorial(m)))
    return tab


def beamsplitter(state: StateVector, modes, t: complex, r: complex,
                 dedup: bool = True) -> StateVector:
    """Two-mode mixing with transmission t and reflection r on `modes`.

    Grows the packing width when an output occupation would not fit;
    raises TruncationError if no width can hold it.
    """
    if abs(abs(t) ** 2 + abs(r) ** 2 - 1.0) > 1e-12:
        raise ValueError("|t|^2 + |r|^2 must equal 1")
    i, j = modes
    if i == j or not (0 <= i < state.mode_count and 0 <= j < state.mode_count):
        raise ValueError("mixer needs two distinct valid mode indices")
    n = state.occupations(i)
    m = state.occupations(j)
    out_max = int((n + m).max(initial=0))
    while out_max > state.occ_mask:
        state = state.repacked(state.bits + 1)
    sh_i, sh_j = state.bits * i, state.bits * j
    clear = ~((state.occ_mask << sh_i) | (state.occ_mask << sh_j))
    tab = _mix_table(complex(t), complex(r), max(int(n.max(initial=0)),
                                                 int(m.max(initial=0))))
    codes, amps = bs_expand(state.codes, state.amps,
                            n.astype(np.int64), m.astype(np.int64),
                            sh_i, sh_j, clear, tab)
    out = StateVector(state.mode_count, max(state.cutoff, out_max),
                      codes, amps, state.bits)
    return out.dedup() if dedup else out


def loss_channel(state: StateVector, mode: int, eta: float,
                 dedup: bool = True) -> StateVector:
    """Pure-loss channel on `mode`; the appended final mode purifies it."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {eta}")
    grown = StateVector(state.mode_count + 1, state.cutoff,
                        state.codes.copy(), state.amps.copy(), state.bits)
    return beamsplitter(grown, (mode, state.mode_count),
                        sqrt(eta), sqrt(1.0 - eta), dedup=dedup)


def povm_select(state: StateVector, mode: int, weights: np.ndarray) -> StateVector:
    """Apply sqrt-POVM diagonal weights on one mode, keeping the state pure.

    `weights[n]` multiplies every amplitude with occupation n on `mode`;
    passing the square root of a diagonal POVM element makes the squared
    norm of the result the outcome probability while the mode survives as
    an environment mode for the final trace.
    """
    occ = state.occupations(mode)
    if occ.max(initial=0) >= len(weights):
        raise ValueError("weight table shorter than largest occupation")
    amps = state.amps * weights[occ]
    keep = amps != 0
    return StateVector(state.mode_count, state.cutoff,
                       state.codes[keep], amps[keep], state.bits)


def _remove_modes(state: StateVector, drop) -> StateVector:
    keep = [k for k in range(state.mode_count) if k not in drop]
    codes = np.zeros_like(state.codes)
    for pos, mode in enumerate(keep):
        codes |= state.occupations(mode) << (state.bits * pos)
    return StateVector(len(keep), state.cutoff, codes,
                       state.amps.copy(), state.bits).dedup()


def bell_project(state: StateVector, modes, sign: int = +1):
    """Project `modes` onto (|0,1> + sign |1,0>)/sqrt(2) and remove them.

    Returns the unnormalized remainder and the outcome probability (its
    squared norm); normalization is left to the caller.
    """
    i, j = modes
    ni = state.occupations(i)
    nj = state.occupations(j)
    sel01 = (ni == 0) & (nj == 1)
    sel10 = (ni == 1) & (nj == 0)
    clear = ~((state.occ_mask << (state.bits * i))
              | (state.occ_mask << (state.bits * j)))
    rest = state.codes & clear
    s = 1.0 if sign >= 0 else -1.0
    codes = np.concatenate([rest[sel01], rest[sel10]])
    amps = np.concatenate([state.amps[sel01], s * state.amps[sel10]]) / sqrt(2)
    out = StateVector(state.mode_count, state.cutoff, codes, amps, state.bits)
    out.dedup()
    out = _remove_modes(out, (i, j))
    return out, out.norm_sq()


def partial_trace(state: StateVector, keep) -> DensityMatrix:
    """Reduced density matrix over `keep` (ordered mode indices).

    Groups amplitudes by the traced-mode occupations and accumulates the
    Gram matrix through one sparse product, so unnormalized post-selected
    states trace to their success probability.
    """
    keep = tuple(keep)
    if not keep:
        raise ValueError("keep at least one mode")
    dim = 1 + max(int(state.occupations(k).max(initial=0)) for k in keep)
    keep_mask = 0
    for k in keep:
        keep_mask |= state.occ_mask << (state.bits * k)
    env = state.codes & ~keep_mask
    kept_idx = np.zeros(state.codes.size, dtype=np.int64)
    for k in keep:
        kept_idx = kept_idx * dim + state.occupations(k)
    _, rows = np.unique(env, return_inverse=True)
    side = dim ** len(keep)
    M = scipy.sparse.coo_matrix(
        (state.amps, (rows.ravel(), kept_idx)),
        shape=(int(rows.max(initial=0)) + 1, side)).tocsr()
    rho = (M.conj().T @ M).toarray()
    return DensityMatrix(len(keep), dim, rho)


# -- spectral quantities ---------------------------------------------


def entropy(rho, psd_tol: float = 1e-10) -> float:
    """Von Neumann entropy in bits, with 0 log 0 = 0."""
    matrix = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    w = np.linalg.eigvalsh(matrix)
    scale = max(float(np.sum(w)), 1.0)
    if w.min() < -psd_tol * scale:
        raise ValueError(f"state has negative eigenvalue {w.min():.3g}")
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def rci(rho: DensityMatrix, decoder_modes) -> float:
    """Reverse coherent information S(marginal without decoder) - S(joint).

    `decoder_modes` are positions within the kept-mode tuple; swapping the
    argument to the other side gives the direct ordering.
    """
    decoder = set(decoder_modes)
    keep = [k for k in range(rho.mode_count) if k not in decoder]
    if not keep or not decoder:
        raise ValueError("decoder must hold a proper subset of the modes")
    marginal = rho.partial_trace(keep)
    return entropy(marginal) - entropy(rho)


def fidelity_with_pure(rho: DensityMatrix, target: StateVector) -> float:
    """<psi| rho |psi> for a pure target over the same kept modes."""
    if target.mode_count != rho.mode_count:
        raise ValueError("mode counts differ")
    dim = rho.dim
    vec = np.zeros(dim ** rho.mode_count, dtype=np.complex128)
    for occ, amp in target.items():
        if max(occ) >= dim:
            continue  # outside the reduced basis: contributes nothing
        idx = 0
        for n in occ:
            idx = idx * dim + n
        vec[idx] = amp
    return float(np.real(vec.conj() @ rho.matrix @ vec))
