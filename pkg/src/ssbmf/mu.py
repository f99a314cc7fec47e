"""Non-intersection probabilities and their inversion.

mu_t is the probability that a fresh uniform k-subset of [r] avoids a fixed
set of size t: mu_t = C(r-t, k) / C(r, k).  The table is kept in exact
rational arithmetic so that inverting an observed zero-fraction back to a
union size has no floating-point ambiguity at decision boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ParameterError
from .instance import GramMatrix


@dataclass(frozen=True)
class MuTable:
    r: int
    k: int
    values: tuple  # Fractions mu_0 .. mu_{t_max}

    @property
    def t_max(self) -> int:
        return len(self.values) - 1

    def gap_lower_bound(self, t: int) -> Fraction:
        """Explicit lower bound on mu_t - mu_{t+1} valid for t <= 3k, r >= 64k^2."""
        r, k = self.r, self.k
        return (Fraction(1) - Fraction((t + 1) * (k - 1), r - k + 2)) * Fraction(k, r - k + 1)

    def to_json(self) -> dict:
        return {"r": self.r, "k": self.k,
                "values": [f"{v.numerator}/{v.denominator}" for v in self.values]}


def mu_table(r: int, k: int, t_max: int = None) -> MuTable:
    """Exact table of mu_0 .. mu_{t_max}; default t_max = min(3k, r - k)."""
    if k < 1 or k > r:
        raise ParameterError(f"need 1 <= k <= r, got r={r} k={k}")
    if t_max is None:
        t_max = min(3 * k, r - k)
    if t_max < 0 or t_max > r:
        raise ParameterError(f"need 0 <= t_max <= r, got {t_max}")
    denom = math.comb(r, k)
    values = tuple(Fraction(math.comb(r - t, k), denom) for t in range(t_max + 1))
    return MuTable(r=r, k=k, values=values)


def invert_fraction(frac, table: MuTable) -> int:
    """Union size whose mu value is closest to ``frac``; ties go to smaller t."""
    frac = Fraction(frac)
    best_t, best_err = 0, None
    for t, mu in enumerate(table.values):
        err = abs(mu - frac)
        if best_err is None or err < best_err:
            best_t, best_err = t, err
    return best_t


def zero_cooccurrence(M: GramMatrix, rows) -> int:
    """Number of columns that are zero in every one of the given rows."""
    full = (1 << M.m) - 1
    acc = full
    for a in rows:
        if not 0 <= a < M.m:
            raise IndexError(f"row {a} out of range for m={M.m}")
        acc &= ~M.bits[a] & full
    return acc.bit_count()


def invert_counts(counts, m: int, table: MuTable) -> np.ndarray:
    """Vectorized inversion of zero-co-occurrence counts to union sizes.

    Equivalent to invert_fraction(count / m) entrywise; ties at midpoints
    resolve toward the smaller union size.
    """
    mids = [float(m * (table.values[t] + table.values[t + 1]) / 2)
            for t in range(table.t_max)]
    counts = np.asarray(counts)
    # mu decreasing: t = number of midpoints strictly above the count
    out = np.zeros(counts.shape, dtype=np.int64)
    for mid in mids:
        out += counts < mid
    return out


def pairwise_union_sizes(M: GramMatrix, table: MuTable) -> np.ndarray:
    """|S_a cup S_b| for every row pair, by mu-inversion; diagonal set to k."""
    m = M.m
    full = (1 << m) - 1
    comps = [~row & full for row in M.bits]
    out = np.zeros((m, m), dtype=np.int64)
    for a in range(m):
        ca = comps[a]
        for b in range(a + 1, m):
            t = invert_fraction(Fraction((ca & comps[b]).bit_count(), m), table)
            out[a, b] = out[b, a] = t
    np.fill_diagonal(out, table.k)
    return out


def union_block(M: GramMatrix, table: MuTable, rows_a, rows_b=None) -> np.ndarray:
    """Union sizes for the row block rows_a x rows_b (default: all rows)."""
    m = M.m
    full = (1 << m) - 1
    if rows_b is None:
        rows_b = range(m)
    rows_b = list(rows_b)
    comps_b = [~M.bits[b] & full for b in rows_b]
    counts = np.zeros((len(rows_a), len(rows_b)), dtype=np.int64)
    for i, a in enumerate(rows_a):
        ca = ~M.bits[a] & full
        counts[i] = [(ca & cb).bit_count() for cb in comps_b]
    return invert_counts(counts, m, table)


def required_sample_size(r: int, k: int, t: int, delta: float, c0: float = 1.0) -> int:
    """Smallest m with m >= c0 * (t^2 r / k) * ln(m^3 / delta), floored at 1.

    The leading constant is exposed as a knob; the default is calibrated by
    the acceptance experiments.
    """
    if not 0 < delta < 1:
        raise ParameterError(f"need 0 < delta < 1, got {delta}")
    if t < 1:
        raise ParameterError(f"need t >= 1, got {t}")
    coef = c0 * t * t * r / k

    def satisfied(m):
        return m >= coef * math.log(m ** 3 / delta)

    hi = 1
    while not satisfied(hi):
        hi *= 2
        if hi > 1 << 60:
            raise ParameterError("sample-size bound does not converge")
    lo = max(1, hi // 2)
    while lo < hi:
        mid = (lo + hi) // 2
        if satisfied(mid):
            hi = mid
        else:
            lo = mid + 1
    return hi
