"""Simultaneous-diagonalization decomposition of the intersection tensor and
the full recovery pipeline: decompose, round to Boolean columns, extend from
an anchor subset to all rows, and verify against the input Gram matrix.

The decomposition works on two random contractions T(Id, Id, v).  Instead of
the fragile m x m eigenproblem of M1 @ pinv(M2), we project both contractions
onto an orthonormal basis U of the component span (rank-revealing SVD of M1),
solve the r x r nonsymmetric eigenproblem there, and lift the eigenvectors
back by U; this is algebraically equivalent on the span.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegeneracyError, DimensionError, ParameterError,
                     RankDeficiencyError, RoundingError, SsbmfError)
from .instance import (GramMatrix, SelectionMatrix, factorization_error, gram,
                       split_seed)
from .mu import MuTable, mu_table, union_block
from .tensor import IntersectionTensor, build_tensor, contract


@dataclass
class RecoverConfig:
    mode: str = "anchored"           # "full" or "anchored"
    anchors: int = None              # default min(m, max(4r, r + 16))
    seed: int = 0
    round_tol: float = 0.25
    sv_cutoff: float = 1e-8
    gap_tol: float = 1e-6
    retries: int = 5
    clamp: bool = False


@dataclass
class RecoveredFactors:
    W_hat: SelectionMatrix
    success: bool
    residual: int
    permutation: list = None
    failure: str = None
    diagnostics: dict = field(default_factory=dict)

    def report(self, include_timing: bool = True) -> dict:
        out = {"success": self.success, "residual": self.residual,
               "retries": self.diagnostics.get("retries", 0)}
        if include_timing and "seconds" in self.diagnostics:
            out["seconds"] = self.diagnostics["seconds"]
        if self.permutation is not None:
            out["permutation"] = list(self.permutation)
        if self.failure is not None:
            out["failure"] = self.failure
        return out


def jennrich_decompose(T: IntersectionTensor, r: int, seed: int = 0,
                       sv_cutoff: float = 1e-8, gap_tol: float = 1e-6,
                       retries: int = 5, diagnostics: dict = None):
    """Recover the rank-one components of T = sum_i w_i^(x3).

    Returns r unit-normalized vectors, each a scalar multiple of one w_i,
    provided the components are linearly independent.  Raises
    RankDeficiencyError if the contraction has numerical rank < r and
    DegeneracyError if eigenvalue collisions persist across all retries.
    """
    if T.block is None:
        raise ParameterError("decomposition requires a materialized tensor")
    n = T.block.shape[0]
    if r > n:
        raise ParameterError(f"r={r} exceeds tensor dimension {n}")
    rng = np.random.Generator(np.random.Philox(key=seed & ((1 << 64) - 1)))
    last_gap = None
    for attempt in range(retries):
        v1 = rng.normal(size=n)
        v1 /= np.linalg.norm(v1)
        v2 = rng.normal(size=n)
        v2 /= np.linalg.norm(v2)
        M1 = contract(T, v1)
        M2 = contract(T, v2)
        U, s, _ = np.linalg.svd(M1)
        rank = int(np.sum(s > sv_cutoff * s[0])) if s[0] > 0 else 0
        if rank < r:
            raise RankDeficiencyError(
                f"contraction has numerical rank {rank} < r={r}")
        U = U[:, :r]
        A1 = U.T @ M1 @ U
        A2 = U.T @ M2 @ U
        u2, s2, vt2 = np.linalg.svd(A2)
        inv2 = vt2.T @ np.diag(np.where(s2 > sv_cutoff * s2[0], 1.0 / s2, 0.0)) @ u2.T
        evals, evecs = np.linalg.eig(A1 @ inv2)
        scale = np.max(np.abs(evals))
        gaps = np.abs(evals[:, None] - evals[None, :])
        np.fill_diagonal(gaps, np.inf)
        last_gap = float(gaps.min())
        if scale == 0 or last_gap < gap_tol * scale:
            continue
        if np.max(np.abs(evals.imag)) > gap_tol * scale:
            continue
        if diagnostics is not None:
            diagnostics["retries"] = attempt
            diagnostics["eigen_gap"] = last_gap / scale
        vectors = []
        for i in range(r):
            w = U @ evecs[:, i].real
            nrm = np.linalg.norm(w)
            if nrm == 0:
                raise RankDeficiencyError("zero eigenvector after lifting")
            vectors.append(w / nrm)
        return vectors
    raise DegeneracyError(
        f"eigenvalue gap {last_gap} below tolerance after {retries} retries")


def round_boolean(v, tol: float = 0.25) -> np.ndarray:
    """Scale by the signed entry of largest magnitude, then snap to {0,1}."""
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ParameterError("cannot round the zero vector")
    pivot = v[np.argmax(np.abs(v))]
    scaled = v / pivot
    margins = np.minimum(np.abs(scaled), np.abs(scaled - 1.0))
    worst = int(np.argmax(margins))
    if margins[worst] > tol:
        raise RoundingError(worst, float(margins[worst]))
    return (scaled > 0.5).astype(np.int8)


def extend_from_anchors(anchor_block: np.ndarray, anchor_indices,
                        M: GramMatrix, table: MuTable, k: int) -> SelectionMatrix:
    """Fill in the non-anchor rows of W from the recovered anchor block.

    For a non-anchor row a, the intersection counts against the anchors are
    c_ab = 2k - |S_a cup S_b| (mu-inverted from M); the row is the rounded
    least-squares solution of (anchor block) x = c, re-checked exactly.
    """
    anchor_block = np.asarray(anchor_block, dtype=float)
    n0, r = anchor_block.shape
    if n0 < r:
        raise ParameterError(f"need at least r={r} anchors, got {n0}")
    if np.linalg.matrix_rank(anchor_block) < r:
        raise RankDeficiencyError("anchor block is column rank-deficient")
    anchor_indices = list(anchor_indices)
    others = [a for a in range(M.m) if a not in set(anchor_indices)]
    rows = [None] * M.m
    for pos, a in enumerate(anchor_indices):
        sup = tuple(int(j) for j in np.flatnonzero(anchor_block[pos] > 0.5))
        if len(sup) != k:
            raise SsbmfError(f"anchor row {a} is not {k}-sparse")
        rows[a] = sup
    if others:
        unions = union_block(M, table, others, anchor_indices)
        counts = 2 * k - unions
        pinv = np.linalg.pinv(anchor_block)
        sol = counts @ pinv.T
        rounded = (sol > 0.5).astype(np.int64)
        sums = rounded.sum(axis=1)
        recheck = rounded @ anchor_block.T
        for i, a in enumerate(others):
            if sums[i] != k:
                raise SsbmfError(
                    f"row {a} rounded to sparsity {int(sums[i])}, expected {k}")
            if not np.array_equal(recheck[i], counts[i]):
                raise SsbmfError(f"row {a} fails the intersection re-check")
            rows[a] = tuple(int(j) for j in np.flatnonzero(rounded[i]))
    return SelectionMatrix(m=M.m, r=r, k=k, rows=tuple(rows))


def match_columns(W_hat: SelectionMatrix, W_ref: SelectionMatrix):
    """Greedy exact matching of column multisets.

    Returns (permutation, unmatched): permutation[i] = j means column i of
    W_hat equals column j of W_ref; unmatched lists leftover column indices
    of (W_hat, W_ref) when the multisets differ.
    """
    if (W_hat.m, W_hat.r) != (W_ref.m, W_ref.r):
        raise DimensionError("shape mismatch between candidate and reference")
    cols_hat = _column_keys(W_hat)
    cols_ref = _column_keys(W_ref)
    available = {}
    for j, key in enumerate(cols_ref):
        available.setdefault(key, []).append(j)
    permutation = [None] * W_hat.r
    unmatched_hat = []
    for i, key in enumerate(cols_hat):
        slots = available.get(key)
        if slots:
            permutation[i] = slots.pop(0)
        else:
            unmatched_hat.append(i)
    unmatched_ref = [j for slots in available.values() for j in slots]
    if unmatched_hat:
        return None, (sorted(unmatched_hat), sorted(unmatched_ref))
    return permutation, None


def _column_keys(W: SelectionMatrix):
    dense = W.dense()
    return [tuple(dense[:, j].tolist()) for j in range(W.r)]


def tensor_recover(M: GramMatrix, r: int, k: int,
                   config: RecoverConfig = None) -> RecoveredFactors:
    """Full pipeline: bootstrap tensor, decompose, round, extend, verify.

    Parameter errors propagate; algorithmic failures (rank deficiency,
    degenerate eigenvalues, rounding, inconsistent tensor entries) are
    reported via the failure flag instead of raising, so a corrupted input
    yields a diagnosable report rather than an exception.
    """
    if config is None:
        config = RecoverConfig()
    if r < 1 or k < 1 or k > r:
        raise ParameterError(f"invalid r={r}, k={k}")
    m = M.m
    start = time.perf_counter()
    diagnostics = {}
    table = mu_table(r, k)
    try:
        if config.mode == "full":
            T = build_tensor(M, r, k, mode="full", table=table, clamp=config.clamp)
            indices = list(range(m))
        elif config.mode == "anchored":
            n0 = config.anchors or min(m, max(4 * r, r + 16))
            if n0 < r:
                raise ParameterError(f"anchor count {n0} below r={r}")
            rng = np.random.Generator(
                np.random.Philox(key=split_seed(config.seed, 0x5eed)))
            indices = sorted(rng.choice(m, size=n0, replace=False).tolist())
            T = build_tensor(M, r, k, mode="anchored", anchors=indices,
                             table=table, clamp=config.clamp)
        else:
            raise ParameterError(f"unknown mode {config.mode!r}")

        vectors = jennrich_decompose(
            T, r, seed=config.seed, sv_cutoff=config.sv_cutoff,
            gap_tol=config.gap_tol, retries=config.retries,
            diagnostics=diagnostics)
        columns = [round_boolean(v, tol=config.round_tol) for v in vectors]
        block = np.stack(columns, axis=1)

        if config.mode == "full":
            row_sums = block.sum(axis=1)
            if np.any(row_sums != k):
                bad = int(np.argmin(row_sums == k))
                raise SsbmfError(
                    f"row {bad} of the rounded factor has {int(row_sums[bad])} ones")
            rows = tuple(tuple(int(j) for j in np.flatnonzero(block[a]))
                         for a in range(m))
            W_hat = SelectionMatrix(m=m, r=r, k=k, rows=rows)
        else:
            W_hat = extend_from_anchors(block, indices, M, table, k)
    except (RankDeficiencyError, DegeneracyError, RoundingError, SsbmfError) as exc:
        if isinstance(exc, (ParameterError, DimensionError)):
            raise
        diagnostics["seconds"] = time.perf_counter() - start
        return RecoveredFactors(W_hat=None, success=False, residual=-1,
                                failure=str(exc), diagnostics=diagnostics)

    residual = factorization_error(M, W_hat, "boolean")
    diagnostics["seconds"] = time.perf_counter() - start
    return RecoveredFactors(W_hat=W_hat, success=residual == 0,
                            residual=residual,
                            failure=None if residual == 0 else "verification failed",
                            diagnostics=diagnostics)
