"""Third-order intersection tensor bootstrapped from a Boolean Gram matrix.

Entry (a, b, c) is |S_a cap S_b cap S_c|, recovered by inclusion-exclusion
from mu-inverted union sizes:

    T_abc = t_abc - t_ab - t_ac - t_bc + 3k.

Triple zero-co-occurrence counts for a whole slice are obtained by
restricting the complemented Gram matrix to the columns where the anchor row
is zero and multiplying the restriction by its transpose.  An exact oracle
built directly from the generating supports is provided for testing.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import DimensionError, InconsistencyError, ParameterError
from .instance import GramMatrix, SelectionMatrix
from .mu import MuTable, invert_counts, invert_fraction, mu_table


class IntersectionTensor:
    """Symmetric tensor with entries in {0..k}.

    Either fully/partially materialized (``block`` over ``indices``) or a
    lazy handle that computes entries on demand from the Gram matrix.
    """

    def __init__(self, m, k, block=None, indices=None, entry_fn=None):
        self.m = m
        self.k = k
        self.block = block
        self.indices = tuple(indices) if indices is not None else None
        self._entry_fn = entry_fn
        self._pos = ({idx: i for i, idx in enumerate(self.indices)}
                     if self.indices is not None else None)

    @property
    def dim(self) -> int:
        return self.block.shape[0] if self.block is not None else self.m

    def entry(self, a: int, b: int, c: int) -> int:
        if self.block is not None:
            if self._pos is None:
                return int(self.block[a, b, c])
            if a in self._pos and b in self._pos and c in self._pos:
                return int(self.block[self._pos[a], self._pos[b], self._pos[c]])
        if self._entry_fn is None:
            raise ParameterError(f"entry ({a},{b},{c}) outside the materialized block")
        return self._entry_fn(a, b, c)

    def metadata(self) -> dict:
        mode = "full" if self.indices is None and self.block is not None else (
            "anchored" if self.block is not None else "lazy")
        out = {"m": self.m, "k": self.k, "mode": mode}
        if self.indices is not None:
            out["anchors"] = list(self.indices)
        return out


def contract(T: IntersectionTensor, v) -> np.ndarray:
    """Sum_c v_c * T[:, :, c] over the materialized index set."""
    if T.block is None:
        raise ParameterError("contraction requires a materialized tensor")
    v = np.asarray(v, dtype=float)
    if v.shape != (T.block.shape[0],):
        raise DimensionError(
            f"vector of length {v.shape} against block dim {T.block.shape[0]}")
    return np.einsum("abc,c->ab", T.block.astype(float), v)


def _complement_rows(M: GramMatrix, rows) -> np.ndarray:
    """0/1 array (len(rows), m): 1 where the Gram entry is zero."""
    nbytes = (M.m + 7) // 8
    full = (1 << M.m) - 1
    raw = b"".join((~M.bits[a] & full).to_bytes(nbytes, "little") for a in rows)
    flat = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return flat.reshape(len(rows), nbytes * 8)[:, : M.m]


def _pie(t_abc, t_ab, t_ac, t_bc, k):
    return t_abc - t_ab - t_ac - t_bc + 3 * k


def build_tensor(M: GramMatrix, r: int, k: int, mode: str = "full",
                 anchors=None, table: MuTable = None,
                 clamp: bool = False) -> IntersectionTensor:
    """Bootstrap the intersection tensor from the Boolean Gram matrix.

    mode="full" materializes all m slices (memory m^3); mode="anchored"
    materializes the subtensor on the given anchor rows; mode="lazy" only
    supports per-entry access.  Entries outside {0..k} raise
    InconsistencyError unless ``clamp`` is set.
    """
    if M.m < 1:
        raise ParameterError("empty Gram matrix")
    if table is None:
        table = mu_table(r, k)
    m = M.m

    pair_cache = {}
    full_mask = (1 << m) - 1

    def invert_fraction_count(cnt):
        return invert_fraction(Fraction(cnt, m), table)

    def pair_union(a, b):
        key = (a, b) if a <= b else (b, a)
        if key not in pair_cache:
            cnt = ((~M.bits[a] & full_mask) & (~M.bits[b] & full_mask)).bit_count()
            pair_cache[key] = invert_fraction_count(cnt)
        return pair_cache[key]

    def entry_fn(a, b, c):
        acc = (~M.bits[a] & full_mask) & (~M.bits[b] & full_mask) & (~M.bits[c] & full_mask)
        t_abc = invert_fraction_count(acc.bit_count())
        val = _pie(t_abc, pair_union(a, b), pair_union(a, c), pair_union(b, c), k)
        if not 0 <= val <= k:
            if clamp:
                return min(max(val, 0), k)
            raise InconsistencyError((a, b, c), val)
        return val

    if mode == "lazy":
        return IntersectionTensor(m, k, entry_fn=entry_fn)

    if mode == "full":
        idx = list(range(m))
        indices = None
    elif mode == "anchored":
        if anchors is None:
            raise ParameterError("anchored mode requires an anchor set")
        idx = list(anchors)
        indices = idx
    else:
        raise ParameterError(f"unknown mode {mode!r}")

    Z = _complement_rows(M, idx).astype(np.float32)
    n = len(idx)
    pair_counts = Z @ Z.T
    t_pair = invert_counts(np.rint(pair_counts), m, table)
    block = np.zeros((n, n, n), dtype=np.int16)
    for i in range(n):
        triple_counts = (Z * Z[i]) @ Z.T
        t_triple = invert_counts(np.rint(triple_counts), m, table)
        block[i] = (t_triple - t_pair[i][:, None] - t_pair[i][None, :] - t_pair
                    + 3 * k)
    bad = (block < 0) | (block > k)
    if bad.any():
        if clamp:
            block = np.clip(block, 0, k)
        else:
            i, j, l = np.argwhere(bad)[0]
            a, b, c = idx[i], idx[j], idx[l]
            raise InconsistencyError((a, b, c), int(block[i, j, l]))
    return IntersectionTensor(m, k, block=block, indices=indices, entry_fn=entry_fn)


def oracle_tensor(W: SelectionMatrix, materialize: bool = False) -> IntersectionTensor:
    """Exact tensor |S_a cap S_b cap S_c| computed directly from the supports."""
    masks = W.masks

    def entry_fn(a, b, c):
        return (masks[a] & masks[b] & masks[c]).bit_count()

    block = None
    if materialize:
        dense = W.dense().astype(np.int32)
        block = np.einsum("ai,bi,ci->abc", dense, dense, dense).astype(np.int16)
    return IntersectionTensor(W.m, W.k, block=block, entry_fn=entry_fn)
