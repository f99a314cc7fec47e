"""Instance types: selection matrices with exactly-k-sparse rows, their Gram
matrices over the Boolean semiring and over the integers, deterministic
generation, and serialization.

A selection matrix doubles as the incidence matrix of a k-uniform hypergraph
(rows = hyperedges); its Boolean Gram matrix is the adjacency matrix of the
hypergraph's line graph plus self-loops.

Bit conventions used throughout the package:
  - a row support is also stored as an r-bit mask, bit j set <=> column j in
    the support;
  - a Gram row is an m-bit integer, bit j set <=> entry (a, j) = 1.
All intersection kernels reduce to AND + popcount on these integers.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError

_SEED_MASK = (1 << 64) - 1


def split_seed(seed: int, index: int) -> int:
    """Per-unit seed for parallel-safe deterministic generation."""
    return (seed ^ index) & _SEED_MASK


def _rng(seed: int) -> np.random.Generator:
    # Philox is counter-based, so per-row streams are independent.
    return np.random.Generator(np.random.Philox(key=seed & _SEED_MASK))


@dataclass(frozen=True)
class SelectionMatrix:
    """m x r Boolean matrix with exactly k ones per row."""

    m: int
    r: int
    k: int
    rows: tuple  # tuple of m sorted index tuples, each of length k
    masks: tuple = field(default=None)  # r-bit masks, parallel to rows

    def __post_init__(self):
        if self.k < 1 or self.r < 1 or self.m < 1 or self.k > self.r:
            raise ParameterError(
                f"need 1 <= k <= r and m >= 1, got m={self.m} r={self.r} k={self.k}")
        if len(self.rows) != self.m:
            raise DimensionError(f"expected {self.m} rows, got {len(self.rows)}")
        for row in self.rows:
            if len(row) != self.k or len(set(row)) != self.k:
                raise ParameterError(f"row {row} is not a {self.k}-subset")
            if min(row) < 0 or max(row) >= self.r:
                raise ParameterError(f"row {row} has indices outside [0, {self.r})")
        if self.masks is None:
            masks = tuple(sum(1 << j for j in row) for row in self.rows)
            object.__setattr__(self, "masks", masks)

    def dense(self) -> np.ndarray:
        """0/1 array of shape (m, r)."""
        out = np.zeros((self.m, self.r), dtype=np.int8)
        for a, row in enumerate(self.rows):
            out[a, list(row)] = 1
        return out

    def column_masks(self) -> list:
        """m-bit mask per column: bit a set <=> column j belongs to row a."""
        dense = self.dense().astype(bool)
        out = []
        for j in range(self.r):
            packed = np.packbits(dense[:, j], bitorder="little").tobytes()
            out.append(int.from_bytes(packed, "little"))
        return out

    def to_json(self, seed=None) -> dict:
        obj = {"m": self.m, "r": self.r, "k": self.k,
               "rows": [list(row) for row in self.rows]}
        if seed is not None:
            obj["seed"] = int(seed)
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "SelectionMatrix":
        rows = tuple(tuple(sorted(row)) for row in obj["rows"])
        return cls(m=int(obj["m"]), r=int(obj["r"]), k=int(obj["k"]), rows=rows)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in self.dense():
                writer.writerow(row.tolist())


@dataclass(frozen=True)
class GramMatrix:
    """m x m Gram matrix of a selection matrix.

    ``bits`` stores the Boolean-semiring entries (supports intersect), one
    m-bit integer per row.  ``counts``, when present, stores the integer
    entries |S_a cap S_b|.
    """

    m: int
    bits: tuple  # m ints
    counts: np.ndarray = None  # optional (m, m) small ints

    def __post_init__(self):
        if len(self.bits) != self.m:
            raise DimensionError(f"expected {self.m} bit rows, got {len(self.bits)}")

    def entry(self, a: int, b: int) -> int:
        return (self.bits[a] >> b) & 1

    def dense(self) -> np.ndarray:
        """Boolean entries as a 0/1 array of shape (m, m)."""
        nbytes = (self.m + 7) // 8
        raw = b"".join(row.to_bytes(nbytes, "little") for row in self.bits)
        flat = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return flat.reshape(self.m, nbytes * 8)[:, : self.m].astype(np.int8)

    def to_json(self) -> dict:
        nibbles = (self.m + 3) // 4
        return {"m": self.m,
                "hex_rows": [format(row, f"0{nibbles}x") for row in self.bits]}

    @classmethod
    def from_json(cls, obj: dict) -> "GramMatrix":
        bits = tuple(int(s, 16) for s in obj["hex_rows"])
        return cls(m=int(obj["m"]), bits=bits)

    def to_csv(self, path, arithmetic: str = "boolean") -> None:
        data = self.dense() if arithmetic == "boolean" else self.counts
        if data is None:
            raise ParameterError("integer entries were not computed for this matrix")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in data:
                writer.writerow(np.asarray(row).tolist())


def sample_k_subset(rng: np.random.Generator, r: int, k: int) -> tuple:
    """Floyd's algorithm: uniform k-subset of [0, r)."""
    chosen = set()
    for j in range(r - k, r):
        t = int(rng.integers(0, j + 1))
        chosen.add(j if t in chosen else t)
    return tuple(sorted(chosen))


def gen_selection_matrix(m: int, r: int, k: int, seed: int) -> SelectionMatrix:
    """Rows drawn i.i.d. uniformly from the C(r, k) size-k subsets.

    Row i uses its own counter-based stream keyed by ``seed ^ i``, so
    generation is reproducible regardless of evaluation order.
    """
    if k < 1 or r < 1 or m < 1 or k > r:
        raise ParameterError(f"need 1 <= k <= r and m >= 1, got m={m} r={r} k={k}")
    rows = tuple(sample_k_subset(_rng(split_seed(seed, i)), r, k) for i in range(m))
    return SelectionMatrix(m=m, r=r, k=k, rows=rows)


def gram(W: SelectionMatrix, arithmetic: str = "boolean") -> GramMatrix:
    """Gram matrix of W: Boolean (supports intersect) or integer (|S_a cap S_b|).

    Boolean rows are assembled by OR-ing the column masks of the row's
    support, which keeps the cost at m*k word-wide operations.
    """
    if arithmetic not in ("boolean", "integer"):
        raise ParameterError(f"unknown arithmetic {arithmetic!r}")
    colmasks = W.column_masks()
    bits = []
    for row in W.rows:
        acc = 0
        for j in row:
            acc |= colmasks[j]
        bits.append(acc)
    counts = None
    if arithmetic == "integer":
        dense = W.dense().astype(np.int32)
        counts = dense @ dense.T
    return GramMatrix(m=W.m, bits=tuple(bits), counts=counts)


def factorization_error(M: GramMatrix, W: SelectionMatrix,
                        arithmetic: str = "boolean",
                        off_diagonal_only: bool = False) -> int:
    """Number of entries where M differs from gram(W).

    Symmetric disagreements are double-counted (full-matrix L0); pass
    ``off_diagonal_only`` to drop the forced diagonal.
    """
    if M.m != W.m:
        raise DimensionError(f"M is {M.m}x{M.m} but W has {W.m} rows")
    G = gram(W, arithmetic)
    if arithmetic == "boolean":
        total = 0
        for a in range(M.m):
            diff = M.bits[a] ^ G.bits[a]
            if off_diagonal_only:
                diff &= ~(1 << a)
            total += diff.bit_count()
        return total
    if M.counts is None:
        raise ParameterError("M has no integer entries")
    diff = np.asarray(M.counts) != G.counts
    if off_diagonal_only:
        np.fill_diagonal(diff, False)
    return int(diff.sum())


def save_json(obj: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
