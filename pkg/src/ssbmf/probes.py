"""Exact and empirical probes of the linear-independence theory: binary
Krawtchouk polynomials, parity probabilities, ranks over F2 / Z_p / the
rationals, singularity-frequency experiments, fibre statistics, and
anti-concentration estimates.

All closed-form quantities are computed in exact integer or rational
arithmetic; Monte-Carlo probes report Wilson confidence intervals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ParameterError
from .instance import SelectionMatrix, gen_selection_matrix, sample_k_subset, split_seed

# Fixed pool of 31-bit primes: products of two residues fit in int64, which
# keeps the modular elimination fully vectorized.
_PRIME_POOL = (2147483647, 2147483629, 2147483587, 2147483579, 2147483563,
               2147483549, 2147483543, 2147483497, 2147483489, 2147483477)


def krawtchouk(r: int, k: int, lam: int) -> int:
    """Binary Krawtchouk polynomial K_k^r(lam), exact integer."""
    if not (0 <= lam <= r and 0 <= k <= r):
        raise ParameterError(f"need 0 <= lam, k <= r, got r={r} k={k} lam={lam}")
    return sum((-1) ** i * math.comb(lam, i) * math.comb(r - lam, k - i)
               for i in range(k + 1))


def f2_zero_probability(r: int, k: int, lam: int) -> Fraction:
    """Pr over a uniform k-sparse w that <w, u> is even, |u| = lam.

    Computed as the full even-overlap sum i = 0..k (the identity
    1/2 + K_k^r(lam) / (2 C(r, k)) holds for lam >= 1).
    """
    if not 0 <= lam <= r:
        raise ParameterError(f"need 0 <= lam <= r, got lam={lam} r={r}")
    if not 1 <= k <= r:
        raise ParameterError(f"need 1 <= k <= r, got k={k} r={r}")
    total = sum(math.comb(lam, i) * math.comb(r - lam, k - i)
                for i in range(0, k + 1, 2))
    return Fraction(total, math.comb(r, k))


@dataclass
class RankReport:
    rank_f2: int
    rank_modq: dict
    rank_real: int
    notes: list = field(default_factory=list)


def rank_f2(W: SelectionMatrix) -> int:
    """Column rank over F2 by bit-packed elimination on the r-bit row masks."""
    pivots = []
    rank = 0
    for mask in W.masks:
        row = mask
        for piv in pivots:
            low = piv & -piv
            if row & low:
                row ^= piv
        if row:
            pivots.append(row)
            rank += 1
            if rank == W.r:
                break
    return rank


def rank_modp(matrix: np.ndarray, p: int) -> int:
    """Rank over Z_p by vectorized Gaussian elimination (p < 2^31.5)."""
    A = np.asarray(matrix, dtype=np.int64) % p
    nrow, ncol = A.shape
    rank = 0
    for col in range(ncol):
        nz = np.nonzero(A[rank:, col])[0]
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        A[[rank, piv]] = A[[piv, rank]]
        inv = pow(int(A[rank, col]), p - 2, p)
        A[rank] = A[rank] * inv % p
        rest = np.nonzero(A[rank + 1:, col])[0] + rank + 1
        if rest.size:
            A[rest] = (A[rest] - A[rest, col][:, None] * A[rank][None, :]) % p
        rank += 1
        if rank == nrow:
            break
    return rank


def rank_exact(matrix) -> int:
    """Exact rank over the rationals by fraction-free (Bareiss) elimination."""
    A = [[int(x) for x in row] for row in np.asarray(matrix)]
    nrow = len(A)
    ncol = len(A[0]) if nrow else 0
    rank = 0
    prev = 1
    for col in range(ncol):
        piv = next((i for i in range(rank, nrow) if A[i][col]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for i in range(rank + 1, nrow):
            for j in range(col + 1, ncol):
                A[i][j] = (A[rank][col] * A[i][j] - A[i][col] * A[rank][j]) // prev
            A[i][col] = 0
        prev = A[rank][col]
        rank += 1
        if rank == nrow:
            break
    return rank


def rank_report(W: SelectionMatrix, primes=(), seed: int = 0) -> RankReport:
    """Ranks over F2, each requested prime modulus, and the rationals.

    The rational rank is the max over three random primes from the pool (a
    certified lower bound); when that is not full and r <= 200, it is
    certified exact by fraction-free elimination.
    """
    dense = W.dense()
    f2 = rank_f2(W)
    modq = {int(q): rank_modp(dense, int(q)) for q in primes}
    rng = np.random.Generator(np.random.Philox(key=split_seed(seed, 0xfa11)))
    picks = rng.choice(len(_PRIME_POOL), size=3, replace=False)
    real = max(rank_modp(dense, _PRIME_POOL[int(i)]) for i in picks)
    notes = [f"modular primes: {[_PRIME_POOL[int(i)] for i in picks]}"]
    if real < min(W.m, W.r) and W.r <= 200:
        real = rank_exact(dense)
        notes.append("certified by fraction-free elimination")
    return RankReport(rank_f2=f2, rank_modq=modq, rank_real=real, notes=notes)


def wilson_interval(successes: int, trials: int, z: float = 1.96):
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials
                         + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def singularity_experiment(m: int, r: int, k: int, trials: int,
                           seed: int = 0) -> dict:
    """Fraction of random instances with full column rank, per rank notion."""
    if trials < 1:
        raise ParameterError("need trials >= 1")
    full = min(m, r)
    hits = {"f2": 0, "real": 0}
    for t in range(trials):
        W = gen_selection_matrix(m, r, k, split_seed(seed, t * 0x9e3779b9))
        report = rank_report(W, seed=split_seed(seed, t))
        hits["f2"] += report.rank_f2 == full
        hits["real"] += report.rank_real == full
    out = {"m": m, "r": r, "k": k, "trials": trials}
    for name, count in hits.items():
        low, high = wilson_interval(count, trials)
        out[name] = {"frequency": count / trials, "ci_low": low, "ci_high": high}
    return out


def krawtchouk_bound_check(r: int, k: int) -> dict:
    """Verify |K_k^r(lam)| <= C(r, k) (1 - 2k/r)^lam for all lam <= r/2.

    Exact rational arithmetic; reports the first violating lam if any.
    """
    if k > Fraction(16, 100) * r:
        raise ParameterError(f"precondition k <= 0.16 r violated: k={k} r={r}")
    base = Fraction(r - 2 * k, r)
    bound = Fraction(math.comb(r, k))
    for lam in range(0, r // 2 + 1):
        if abs(krawtchouk(r, k, lam)) > bound:
            return {"r": r, "k": k, "ok": False, "first_violation": lam}
        bound_next = bound * base
        bound = bound_next
    return {"r": r, "k": k, "ok": True, "first_violation": None}


def fibre_stats(x) -> tuple:
    """(largest multiplicity of any value, number of nonzero entries)."""
    x = list(x)
    if not x:
        return 0, 0
    counts = {}
    for v in x:
        counts[v] = counts.get(v, 0) + 1
    return max(counts.values()), sum(1 for v in x if v != 0)


def anticoncentration_estimate(x, r: int, k: int, q="real", samples: int = 10000,
                               seed: int = 0, envelope_const: float = 3.0) -> dict:
    """Monte-Carlo max-atom estimate of <w, x> over uniform k-sparse w.

    ``q`` is a modulus or "real".  Reports whether the estimate stays below
    envelope_const * sqrt(r / (s k)) for the measured non-fibre size s.
    """
    if samples < 1:
        raise ParameterError("need samples >= 1")
    x = np.asarray(x)
    if x.shape != (r,):
        raise ParameterError(f"expected a length-{r} vector")
    rng = np.random.Generator(np.random.Philox(key=split_seed(seed, 0xa7c0)))
    counts = {}
    for _ in range(samples):
        sup = sample_k_subset(rng, r, k)
        val = x[list(sup)].sum()
        if q != "real":
            val = int(val) % int(q)
        else:
            val = round(float(val), 12)
        counts[val] = counts.get(val, 0) + 1
    max_atom = max(counts.values()) / samples
    largest_fibre, _ = fibre_stats(x.tolist())
    s = r - largest_fibre
    envelope = (envelope_const * math.sqrt(r / (s * k))) if s > 0 else 1.0
    return {"max_atom": max_atom, "s": s, "envelope": min(1.0, envelope),
            "within_envelope": max_atom <= min(1.0, envelope) + 1e-12}


def enumerate_zero_probability(r: int, k: int, lam: int) -> Fraction:
    """Brute-force parity probability over all C(r, k) supports (test oracle)."""
    fixed = set(range(lam))
    hits = sum(1 for sup in itertools.combinations(range(r), k)
               if len(fixed.intersection(sup)) % 2 == 0)
    return Fraction(hits, math.comb(r, k))
