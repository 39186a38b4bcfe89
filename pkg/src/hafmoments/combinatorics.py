"""Exact combinatorics shared by the moment calculations.

Everything here works on Python integers and :class:`fractions.Fraction`, so
results are exact at any size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapExceededError

DEFAULT_MATCHING_CAP = 8

#: A perfect matching on labels 1..2n: pairs (a, b) with a < b, sorted by a.
Matching = tuple[tuple[int, int], ...]


def double_factorial(x: int) -> int:
    """Return x(x-2)(x-4)..., with (-1)!! = 0!! = 1."""
    if x < -1:
        raise ValueError(f"double factorial undefined for {x} < -1")
    if x <= 0:
        return 1
    return math.prod(range(x, 0, -2))


def num_matchings(n_pairs: int) -> int:
    return double_factorial(2 * n_pairs - 1)


def _check_cap(n_pairs: int, cap: int | None) -> None:
    if n_pairs < 0:
        raise ValueError("n_pairs must be non-negative")
    if cap is not None and n_pairs > cap:
        raise CapExceededError(
            f"matching enumeration with {n_pairs} pairs exceeds cap {cap} "
            f"({num_matchings(n_pairs)} matchings); raise the cap explicitly"
        )


def _pairings(labels: list[int]) -> Iterator[list[tuple[int, int]]]:
    if not labels:
        yield []
        return
    first = labels[0]
    rest = labels[1:]
    for i, partner in enumerate(rest):
        remaining = rest[:i] + rest[i + 1 :]
        for tail in _pairings(remaining):
            yield [(first, partner)] + tail


def enumerate_matchings(
    n_pairs: int,
    *,
    cap: int | None = DEFAULT_MATCHING_CAP,
    chunk: tuple[int, int] | None = None,
) -> Iterator[Matching]:
    """Yield every perfect matching of 1..2*n_pairs in canonical order.

    The smallest unpaired label is paired with each larger unpaired label in
    ascending order, recursively. ``chunk=(i, c)`` restricts the stream to the
    i-th of c contiguous rank ranges; the c chunks are disjoint and their
    concatenation in order is the full stream.
    """
    _check_cap(n_pairs, cap)
    if chunk is None:
        for pairs in _pairings(list(range(1, 2 * n_pairs + 1))):
            yield tuple(pairs)
        return
    index, count = chunk
    if count < 1 or not 0 <= index < count:
        raise ValueError(f"invalid chunk {chunk!r}")
    start, stop = chunk_bounds(num_matchings(n_pairs), index, count)
    for rank in range(start, stop):
        yield matching_from_rank(n_pairs, rank)


def chunk_bounds(total: int, index: int, count: int) -> tuple[int, int]:
    """Contiguous [start, stop) of the index-th of ``count`` near-equal parts."""
    return total * index // count, total * (index + 1) // count


def matching_from_rank(n_pairs: int, rank: int) -> Matching:
    """Inverse of :func:`matching_rank` for the canonical enumeration order."""
    total = num_matchings(n_pairs)
    if not 0 <= rank < total:
        raise ValueError(f"rank {rank} out of range for {n_pairs} pairs")
    labels = list(range(1, 2 * n_pairs + 1))
    pairs = []
    block = total
    while labels:
        choices = len(labels) - 1
        block //= choices
        digit, rank = divmod(rank, block)
        first = labels.pop(0)
        partner = labels.pop(digit)
        pairs.append((first, partner))
    return tuple(pairs)


def matching_rank(matching: Matching) -> int:
    n_pairs = len(matching)
    labels = list(range(1, 2 * n_pairs + 1))
    block = num_matchings(n_pairs)
    rank = 0
    for first, partner in matching:
        choices = len(labels) - 1
        block //= choices
        if labels[0] != first:
            raise ValueError(f"{matching!r} is not in canonical form")
        labels.pop(0)
        rank += labels.index(partner) * block
        labels.remove(partner)
    return rank


def is_canonical_matching(pairs: Sequence[tuple[int, int]], n_pairs: int) -> bool:
    labels = [x for pair in pairs for x in pair]
    if sorted(labels) != list(range(1, 2 * n_pairs + 1)):
        return False
    if any(a >= b for a, b in pairs):
        return False
    firsts = [a for a, _ in pairs]
    return firsts == sorted(firsts)


def matchings_array(n_pairs: int, *, cap: int | None = DEFAULT_MATCHING_CAP) -> np.ndarray:
    """All canonical matchings as an int array of shape (M, n_pairs, 2), 0-based labels."""
    _check_cap(n_pairs, cap)
    out = np.empty((num_matchings(n_pairs), n_pairs, 2), dtype=np.int64)
    for idx, m in enumerate(enumerate_matchings(n_pairs, cap=None)):
        out[idx] = m
    out -= 1
    return out


@dataclass(frozen=True)
class HalfInteger:
    """The number ``twice_value / 2``, held exactly."""

    twice_value: int

    @classmethod
    def of(cls, value: int | Fraction) -> "HalfInteger":
        twice = Fraction(value) * 2
        if twice.denominator != 1:
            raise ValueError(f"{value} is not a multiple of 1/2")
        return cls(int(twice))

    def as_fraction(self) -> Fraction:
        return Fraction(self.twice_value, 2)

    def __str__(self) -> str:
        return str(self.as_fraction())


def binom_half(x: HalfInteger | int | Fraction, n: int) -> Fraction:
    """Generalized binomial x(x-1)...(x-n+1)/n! evaluated over the rationals."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if not isinstance(x, HalfInteger):
        x = HalfInteger.of(x)
    # work with doubled factors to stay in integers until the final division
    t = x.twice_value
    numerator = math.prod(t - 2 * i for i in range(n))
    return Fraction(numerator, 2**n * math.factorial(n))


class DisjointSet:
    """Union-find over 1..size with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size + 1))
        self.size = [1] * (size + 1)
        self.components = size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        return True

    def component_sizes(self) -> list[int]:
        return [self.size[v] for v in range(1, len(self.parent)) if self.find(v) == v]


def count_components(num_vertices: int, edges: Iterable[tuple[int, int]]) -> int:
    """Number of connected components of the graph on vertices 1..num_vertices."""
    ds = DisjointSet(num_vertices)
    for a, b in edges:
        if not (1 <= a <= num_vertices and 1 <= b <= num_vertices):
            raise ValueError(f"edge ({a}, {b}) outside 1..{num_vertices}")
        ds.union(a, b)
    return ds.components
