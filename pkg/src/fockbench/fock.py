"""Occupation-number basis of a truncated symmetric Fock space.

The truncated space over ``d`` one-particle modes with cutoff ``n_max`` is the
direct sum of the fixed-particle sectors ``n = 0 .. n_max``.  Inside a sector
states are ordered reverse-lexicographically on their occupation vectors, and
sectors are concatenated by increasing ``n``.  That ordering is part of the
file contract (matrix exports and reports depend on it).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

BASIS_ORDER_TAG = "revlex-v1"

# sizes beyond this cannot be indexed with int64 offsets
_MAX_INDEX = np.iinfo(np.int64).max


class SizingError(ValueError):
    """Requested space is too large to index."""


def sector_dimension(d: int, n: int) -> int:
    """Number of ``n``-boson states on ``d`` modes, ``binom(n+d-1, n)``."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    dim = math.comb(n + d - 1, n)
    if dim > _MAX_INDEX:
        raise SizingError(f"sector dimension binom({n + d - 1}, {n}) overflows int64")
    return dim


def _revlex(d: int, n: int) -> Iterator[tuple[int, ...]]:
    if d == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _revlex(d - 1, n - first):
            yield (first,) + rest


def enumerate_sector(d: int, n: int) -> list[tuple[int, ...]]:
    """All occupation vectors with ``d`` entries summing to ``n``, reverse-lex order."""
    sector_dimension(d, n)
    return list(_revlex(d, n))


@dataclass(frozen=True)
class FockSpace:
    """Truncated symmetric Fock space ``⊕_{n <= n_max} (C^d)^{⊗_s n}``.

    Immutable; ladder matrices are cached lazily per instance.
    """

    d: int
    n_max: int
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.n_max < 0:
            raise ValueError(f"n_max must be >= 0, got {self.n_max}")
        total = math.comb(self.n_max + self.d, self.n_max)
        if total > _MAX_INDEX:
            raise SizingError(f"total dimension {total} overflows int64")

    @cached_property
    def dims(self) -> tuple[int, ...]:
        return tuple(sector_dimension(self.d, n) for n in range(self.n_max + 1))

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for dim in self.dims:
            out.append(acc)
            acc += dim
        return tuple(out)

    @property
    def dim(self) -> int:
        return sum(self.dims)

    @cached_property
    def _binom(self) -> np.ndarray:
        top = self.n_max + self.d + 1
        table = np.zeros((top + 1, self.d + 1), dtype=np.int64)
        for a in range(top + 1):
            for b in range(min(a, self.d) + 1):
                table[a, b] = math.comb(a, b)
        return table

    def occupations(self, n: int) -> np.ndarray:
        """Occupation vectors of sector ``n`` as an int array of shape (dim(n), d)."""
        self._check_sector(n)
        key = ("occ", n)
        if key not in self._cache:
            occ = np.array(enumerate_sector(self.d, n), dtype=np.int64).reshape(-1, self.d)
            occ.setflags(write=False)
            self._cache[key] = occ
        return self._cache[key]

    def rank(self, occ: np.ndarray) -> np.ndarray:
        """Position of each occupation row within its own sector (vectorised).

        Uses the combinatorial number system for the reverse-lex order: the
        states preceding ``occ`` whose entry ``i`` is larger number
        ``binom(r - occ_i + d - i - 2, d - i - 1)`` where ``r`` is what remains
        of the particle count before position ``i``.
        """
        occ = np.atleast_2d(np.asarray(occ, dtype=np.int64))
        d = self.d
        remaining = occ.sum(axis=1)
        idx = np.zeros(occ.shape[0], dtype=np.int64)
        for i in range(d - 1):
            top = remaining - occ[:, i] + d - i - 2
            idx += np.where(top >= d - i - 1, self._binom[np.maximum(top, 0), d - i - 1], 0)
            remaining = remaining - occ[:, i]
        return idx

    def state_index(self, occ: Sequence[int]) -> tuple[int, int]:
        """``(sector, position)`` of an occupation vector."""
        occ = tuple(int(c) for c in occ)
        if len(occ) != self.d:
            raise ValueError(f"occupation has {len(occ)} entries, space has d={self.d}")
        if any(c < 0 for c in occ):
            raise ValueError(f"negative occupation in {occ}")
        n = sum(occ)
        if n > self.n_max:
            raise ValueError(f"occupation {occ} has {n} particles, above cutoff {self.n_max}")
        return n, int(self.rank(np.array([occ]))[0])

    def occupation_at(self, n: int, position: int) -> tuple[int, ...]:
        self._check_sector(n)
        if not 0 <= position < self.dims[n]:
            raise IndexError(f"position {position} outside sector {n} of size {self.dims[n]}")
        return tuple(int(c) for c in self.occupations(n)[position])

    def flat_index(self, occ: Sequence[int]) -> int:
        n, pos = self.state_index(occ)
        return self.offsets[n] + pos

    def _check_sector(self, n: int) -> None:
        if not 0 <= n <= self.n_max:
            raise ValueError(f"sector {n} outside 0..{self.n_max}")
