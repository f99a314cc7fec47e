"""Worst-case path: reductions from sparse Boolean matrix factorization to
Max 2-CSP over the alphabet of k-sparse indicator vectors, with exact
enumeration and local-search solvers at desk scale.

Alphabet letters are addressed by colexicographic rank so the C(r, k)
vectors are never materialized.  Constraints live only on u < v (symmetric)
or on the complete bipartite graph (asymmetric); the diagonal is forced and
therefore omitted, so objective identities use off-diagonal counts.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, ParameterError
from .instance import GramMatrix, SelectionMatrix, split_seed


def rank_subset(subset) -> int:
    """Colexicographic rank of a sorted k-subset."""
    return sum(math.comb(a, i + 1) for i, a in enumerate(sorted(subset)))


def unrank_subset(rank: int, r: int, k: int) -> tuple:
    """Inverse of rank_subset over the C(r, k) subsets of [0, r)."""
    if not 0 <= rank < math.comb(r, k):
        raise ParameterError(f"rank {rank} out of range for C({r},{k})")
    out = []
    for i in range(k, 0, -1):
        a = i - 1
        while math.comb(a + 1, i) <= rank:
            a += 1
        out.append(a)
        rank -= math.comb(a, i)
    return tuple(reversed(out))


@dataclass(frozen=True)
class CspInstance:
    r: int
    k: int
    mode: str            # "integer" or "boolean"
    bipartite: bool
    m: int               # vertices per side (total n = m or 2m)
    targets: np.ndarray  # m x m required values

    @property
    def alphabet_size(self) -> int:
        return math.comb(self.r, self.k)

    @property
    def n_vertices(self) -> int:
        return 2 * self.m if self.bipartite else self.m

    @property
    def n_edges(self) -> int:
        return self.m * self.m if self.bipartite else self.m * (self.m - 1) // 2

    def edges(self):
        if self.bipartite:
            return itertools.product(range(self.m), range(self.m))
        return itertools.combinations(range(self.m), 2)

    def to_json(self) -> dict:
        if self.bipartite:
            targets = [int(self.targets[u, v]) for u, v in self.edges()]
        else:
            targets = [int(self.targets[u, v]) for u, v in self.edges()]
        return {"m": self.m, "r": self.r, "k": self.k, "mode": self.mode,
                "bipartite": self.bipartite, "targets": targets}


@dataclass
class Assignment:
    sigma: tuple  # alphabet rank per vertex (length n_vertices)
    value: int


def reduce_symmetric(M: GramMatrix, r: int, k: int,
                     mode: str = "integer") -> CspInstance:
    """Complete-graph instance: edge (u, v) wants <sigma(u), sigma(v)> to hit
    the integer entry, or its positivity indicator in boolean mode."""
    if mode == "integer":
        if M.counts is None:
            raise ParameterError("integer mode needs the integer Gram entries")
        targets = np.asarray(M.counts, dtype=np.int64)
        if targets.min() < 0 or targets.max() > k:
            raise ParameterError("integer entries must lie in {0..k}")
    elif mode == "boolean":
        targets = M.dense().astype(np.int64)
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    if not np.array_equal(targets, targets.T):
        raise ParameterError("symmetric reduction requires a symmetric matrix")
    return CspInstance(r=r, k=k, mode=mode, bipartite=False, m=M.m,
                       targets=targets)


def reduce_asymmetric(M, r: int, k: int) -> CspInstance:
    """Complete-bipartite instance for the two-factor problem M = U V."""
    targets = np.asarray(M, dtype=np.int64)
    if targets.ndim != 2 or targets.shape[0] != targets.shape[1]:
        raise ParameterError("expected a square matrix")
    if targets.min() < 0 or targets.max() > k:
        raise ParameterError("entries must lie in {0..k}")
    return CspInstance(r=r, k=k, mode="integer", bipartite=True,
                       m=targets.shape[0], targets=targets)


def _letters(inst: CspInstance, sigma):
    letters = []
    for rank in sigma:
        if not 0 <= rank < inst.alphabet_size:
            raise ParameterError(f"letter rank {rank} outside the alphabet")
        letters.append(frozenset(unrank_subset(rank, inst.r, inst.k)))
    return letters


def _satisfied(inst: CspInstance, lu, lv, target) -> bool:
    inner = len(lu & lv)
    if inst.mode == "boolean":
        return (inner > 0) == (target > 0)
    return inner == target


def evaluate(inst: CspInstance, sigma) -> int:
    """Number of satisfied edges under the assignment (ranks per vertex)."""
    letters = _letters(inst, sigma)
    if inst.bipartite:
        left, right = letters[: inst.m], letters[inst.m:]
        return int(sum(_satisfied(inst, left[u], right[v], inst.targets[u, v])
                       for u, v in inst.edges()))
    return int(sum(_satisfied(inst, letters[u], letters[v], inst.targets[u, v])
                   for u, v in inst.edges()))


def solve_exact(inst: CspInstance, budget: int = 10 ** 7) -> Assignment:
    """Globally optimal assignment by enumeration of all q^n assignments."""
    q, n = inst.alphabet_size, inst.n_vertices
    if q ** n > budget:
        raise BudgetExceededError(f"{q}^{n} assignments exceed budget {budget}")
    best_sigma, best_value = None, -1
    for sigma in itertools.product(range(q), repeat=n):
        value = evaluate(inst, sigma)
        if value > best_value:
            best_sigma, best_value = sigma, value
    return Assignment(sigma=best_sigma, value=best_value)


def _vertex_value(inst, letters, v, letter):
    """Satisfied edges incident to vertex v if it takes the given letter."""
    total = 0
    if inst.bipartite:
        if v < inst.m:
            for u in range(inst.m):
                total += _satisfied(inst, letter, letters[inst.m + u],
                                    inst.targets[v, u])
        else:
            for u in range(inst.m):
                total += _satisfied(inst, letters[u], letter,
                                    inst.targets[u, v - inst.m])
    else:
        for u in range(inst.m):
            if u != v:
                tgt = inst.targets[min(u, v), max(u, v)]
                total += _satisfied(inst, letter, letters[u], tgt)
    return int(total)


def solve_local(inst: CspInstance, restarts: int = 10, iters: int = 100,
                seed: int = 0) -> Assignment:
    """Random restarts + best-improvement single-vertex moves.

    Each move rescans the full alphabet for one vertex; ties break toward
    the lowest rank for determinism.
    """
    q, n = inst.alphabet_size, inst.n_vertices
    all_letters = [frozenset(unrank_subset(t, inst.r, inst.k)) for t in range(q)]
    best = None
    for restart in range(max(1, restarts)):
        rng = np.random.Generator(
            np.random.Philox(key=split_seed(seed, restart)))
        sigma = [int(x) for x in rng.integers(0, q, size=n)]
        letters = [all_letters[t] for t in sigma]
        value = evaluate(inst, sigma)
        for _ in range(iters):
            improved = False
            for v in range(n):
                current = _vertex_value(inst, letters, v, letters[v])
                best_rank, best_gain = sigma[v], 0
                for t in range(q):
                    if t == sigma[v]:
                        continue
                    gain = _vertex_value(inst, letters, v, all_letters[t]) - current
                    if gain > best_gain or (gain == best_gain and gain > 0
                                            and t < best_rank):
                        best_rank, best_gain = t, gain
                if best_gain > 0:
                    value += best_gain
                    sigma[v] = best_rank
                    letters[v] = all_letters[best_rank]
                    improved = True
            if not improved:
                break
        if best is None or value > best.value:
            best = Assignment(sigma=tuple(sigma), value=value)
    return best


def assignment_to_factors(inst: CspInstance, assignment: Assignment):
    """Read the factor matrices off the assignment letters.

    Symmetric: returns (SelectionMatrix, off-diagonal L0 residual), with the
    identity residual = 2 * (|E| - value).  Asymmetric: returns
    ((U, V) 0/1 arrays, L0 residual) with residual = |E| - value.
    """
    letters = [sorted(unrank_subset(t, inst.r, inst.k)) for t in assignment.sigma]
    if inst.bipartite:
        U = np.zeros((inst.m, inst.r), dtype=np.int64)
        V = np.zeros((inst.r, inst.m), dtype=np.int64)
        for u in range(inst.m):
            U[u, letters[u]] = 1
        for v in range(inst.m):
            V[letters[inst.m + v], v] = 1
        residual = int(np.sum(U @ V != inst.targets))
        return (U, V), residual
    rows = tuple(tuple(letter) for letter in letters)
    W = SelectionMatrix(m=inst.m, r=inst.r, k=inst.k, rows=rows)
    dense = W.dense().astype(np.int64)
    prod = dense @ dense.T
    if inst.mode == "boolean":
        prod = (prod > 0).astype(np.int64)
    diff = prod != inst.targets
    np.fill_diagonal(diff, False)
    return W, int(diff.sum())
