"""Exact first and second moments of |Haf(X^T X)|^2 as polynomials in k.

The first moment sums k^C(G) over graphs on 2n vertices made of a fixed
"black" matching (2j-1, 2j) and an arbitrary "red" matching. The second
moment does the same over graphs on 6n vertices laid out as three rows
(O, P, Q) of 2n columns: each column pair j carries one of four black-edge
patterns and each row carries its own red matching.

Vertex labels are row-major and 1-based: O_i = i, P_i = 2n + i, Q_i = 4n + i.
"""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numba
import numpy as np

from .combinatorics import (
    DisjointSet,
    Matching,
    chunk_bounds,
    count_components,
    double_factorial,
    enumerate_matchings,
    matchings_array,
    num_matchings,
)
from .errors import CapExceededError

log = logging.getLogger(__name__)

FIRST_MOMENT_CAP = 6
SECOND_MOMENT_CAP = 3
SECOND_MOMENT_LONG_CAP = 4


@dataclass(frozen=True)
class MomentPolynomial:
    """Exact coefficients of sum_G k^C(G); ``coeffs[i]`` multiplies k^i."""

    n: int
    family: str  # "G1" (first moment) or "G2" (second moment)
    coeffs: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.family not in ("G1", "G2"):
            raise ValueError(f"unknown graph family {self.family!r}")
        coeffs = tuple(int(c) for c in self.coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coeffs", coeffs)
        if any(c < 0 for c in coeffs):
            raise ValueError("graph-count coefficients cannot be negative")
        if coeffs and coeffs[0] != 0:
            raise ValueError("c_0 must vanish: every graph has a component")
        max_degree = self.n if self.family == "G1" else 2 * self.n
        if self.degree > max_degree:
            raise ValueError(f"degree {self.degree} exceeds {max_degree} for {self.family}")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def total(self) -> int:
        """Number of graphs in the family (the polynomial at k = 1)."""
        return sum(self.coeffs)

    def __call__(self, k: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * k + c
        return acc

    def to_dict(self) -> dict:
        return {"n": self.n, "family": self.family, "coeffs": [str(c) for c in self.coeffs]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "MomentPolynomial":
        return cls(n=int(data["n"]), family=data["family"], coeffs=tuple(int(c) for c in data["coeffs"]))

    @classmethod
    def from_json(cls, text: str) -> "MomentPolynomial":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# first moment


def first_moment_product_coeffs(n: int) -> tuple[int, ...]:
    """Coefficients of k(k+2)...(k+2n-2), expanded by repeated multiplication."""
    coeffs = [1]
    for j in range(1, n + 1):
        shift = 2 * j - 2
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] += c
            nxt[i] += shift * c
        coeffs = nxt
    return tuple(coeffs)


def first_moment_graph_edges(n: int, red: Matching) -> list[tuple[int, int]]:
    black = [(2 * j - 1, 2 * j) for j in range(1, n + 1)]
    return black + list(red)


def first_moment_poly(n: int, *, cap: int = FIRST_MOMENT_CAP) -> MomentPolynomial:
    """Enumerate the (2n-1)!! first-moment graphs and tally k^C(G)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > cap:
        raise CapExceededError(f"first-moment enumeration n={n} exceeds cap {cap}")
    coeffs = [0] * (n + 1)
    for red in enumerate_matchings(n, cap=None):
        coeffs[count_components(2 * n, first_moment_graph_edges(n, red))] += 1
    return MomentPolynomial(n, "G1", tuple(coeffs))


def first_moment_closed(k: int, n: int) -> int:
    """M_1(k, n) = (2n-1)!! (k+2n-2)!! / (k-2)!!.

    The double-factorial ratio telescopes to k(k+2)...(k+2n-2), which keeps
    the cost independent of k.
    """
    if k < 1 or n < 0:
        raise ValueError("need k >= 1 and n >= 0")
    return double_factorial(2 * n - 1) * math.prod(k + 2 * j - 2 for j in range(1, n + 1))


# ---------------------------------------------------------------------------
# second moment graphs


def encode_z(types: Sequence[int]) -> int:
    """Pattern index z in 1..4^n; column pair 1 is the most significant digit."""
    z = 0
    for t in types:
        if t not in (1, 2, 3, 4):
            raise ValueError(f"black-edge type must be 1..4, got {t}")
        z = 4 * z + (t - 1)
    return z + 1


def decode_z(z: int, n: int) -> tuple[int, ...]:
    if not 1 <= z <= 4**n:
        raise ValueError(f"z={z} outside 1..{4 ** n}")
    z -= 1
    digits = []
    for _ in range(n):
        z, d = divmod(z, 4)
        digits.append(d + 1)
    return tuple(reversed(digits))


def black_edge_pattern(t: int, j: int, n: int) -> tuple[tuple[int, int], ...]:
    """Black edges of type t on column pair j (columns 2j-1, 2j)."""
    a, b = 2 * j - 1, 2 * j

    def O(c):
        return c

    def P(c):
        return 2 * n + c

    def Q(c):
        return 4 * n + c

    if t == 1:
        return ((O(a), O(b)), (P(a), Q(a)), (P(b), Q(b)))
    if t == 2:
        return ((O(a), Q(b)), (P(a), Q(a)), (O(b), P(b)))
    if t == 3:
        return ((O(b), Q(a)), (P(a), O(a)), (P(b), Q(b)))
    if t == 4:
        return ((O(a), P(a)), (O(b), P(b)), (Q(a), Q(b)))
    raise ValueError(f"black-edge type must be 1..4, got {t}")


def black_edges(z: int, n: int) -> list[tuple[int, int]]:
    edges = []
    for j, t in enumerate(decode_z(z, n), start=1):
        edges.extend(black_edge_pattern(t, j, n))
    return edges


@dataclass(frozen=True)
class SecondMomentGraph:
    n: int
    z: int
    red_O: Matching
    red_P: Matching
    red_Q: Matching

    @property
    def num_vertices(self) -> int:
        return 6 * self.n

    def black_edges(self) -> list[tuple[int, int]]:
        return black_edges(self.z, self.n)

    def red_edges(self) -> list[tuple[int, int]]:
        edges = []
        for row, red in enumerate((self.red_O, self.red_P, self.red_Q)):
            off = 2 * self.n * row
            edges.extend((a + off, b + off) for a, b in red)
        return edges

    def edges(self) -> list[tuple[int, int]]:
        return self.black_edges() + self.red_edges()

    def disjoint_set(self) -> DisjointSet:
        ds = DisjointSet(self.num_vertices)
        for a, b in self.edges():
            ds.union(a, b)
        return ds

    def components(self) -> int:
        return count_components(self.num_vertices, self.edges())


def iter_second_moment_graphs(n: int) -> Iterator[SecondMomentGraph]:
    reds = list(enumerate_matchings(n, cap=None))
    for z in range(1, 4**n + 1):
        for ro in reds:
            for rp in reds:
                for rq in reds:
                    yield SecondMomentGraph(n, z, ro, rp, rq)


def second_moment_graph_count(n: int) -> int:
    return 4**n * num_matchings(n) ** 3


@dataclass(frozen=True)
class EnumerationReport:
    poly: MomentPolynomial
    graphs: int
    odd_components: int


def second_moment_coeffs_reference(n: int) -> EnumerationReport:
    """Pure-Python enumeration; slow, used to cross-check the compiled kernel."""
    coeffs = [0] * (2 * n + 1)
    graphs = odd = 0
    for g in iter_second_moment_graphs(n):
        ds = g.disjoint_set()
        coeffs[ds.components] += 1
        odd += sum(1 for s in ds.component_sizes() if s % 2)
        graphs += 1
    return EnumerationReport(MomentPolynomial(n, "G2", tuple(coeffs)), graphs, odd)


@lru_cache(maxsize=None)
def _black_table(n: int) -> np.ndarray:
    table = np.empty((4**n, 3 * n, 2), dtype=np.int64)
    for z in range(1, 4**n + 1):
        table[z - 1] = black_edges(z, n)
    table -= 1
    table.setflags(write=False)
    return table


@numba.njit(cache=True, nogil=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@numba.njit(cache=True, nogil=True)
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return 0
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    return 1


@numba.njit(cache=True, nogil=True)
def _enumerate_chunk(n, black, match, start, stop, coeffs):
    """Tally components for work items [start, stop) of (z, red_O) pairs.

    Returns the number of odd-sized components seen (zero for valid input).
    """
    nv = 6 * n
    row = 2 * n
    n_match = match.shape[0]
    par0 = np.empty(nv, np.int64)
    siz0 = np.empty(nv, np.int64)
    par1 = np.empty(nv, np.int64)
    siz1 = np.empty(nv, np.int64)
    par2 = np.empty(nv, np.int64)
    siz2 = np.empty(nv, np.int64)
    odd = 0
    for w in range(start, stop):
        z = w // n_match
        o = w % n_match
        comps0 = nv
        for v in range(nv):
            par0[v] = v
            siz0[v] = 1
        for e in range(black.shape[1]):
            comps0 -= _union(par0, siz0, black[z, e, 0], black[z, e, 1])
        for e in range(n):
            comps0 -= _union(par0, siz0, match[o, e, 0], match[o, e, 1])
        for p in range(n_match):
            comps1 = comps0
            for v in range(nv):
                par1[v] = par0[v]
                siz1[v] = siz0[v]
            for e in range(n):
                comps1 -= _union(par1, siz1, match[p, e, 0] + row, match[p, e, 1] + row)
            for q in range(n_match):
                comps = comps1
                for v in range(nv):
                    par2[v] = par1[v]
                    siz2[v] = siz1[v]
                for e in range(n):
                    comps -= _union(par2, siz2, match[q, e, 0] + 2 * row, match[q, e, 1] + 2 * row)
                coeffs[comps] += 1
                for v in range(nv):
                    if par2[v] == v and siz2[v] % 2 == 1:
                        odd += 1
    return odd


def _check_second_moment_cap(n: int, allow_long: bool) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    cap = SECOND_MOMENT_LONG_CAP if allow_long else SECOND_MOMENT_CAP
    if n > cap:
        hint = "" if allow_long or n > SECOND_MOMENT_LONG_CAP else " (n=4 needs the long-run flag)"
        raise CapExceededError(f"second-moment enumeration n={n} exceeds cap {cap}{hint}")


def enumerate_second_moment(
    n: int,
    *,
    jobs: int = 1,
    allow_long: bool = False,
    chunks: int | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> EnumerationReport:
    """Count all 4^n ((2n-1)!!)^3 second-moment graphs by components.

    Work is split into contiguous chunks of (z, red_O) pairs; each chunk
    yields an exact integer tally and tallies are summed in chunk order, so
    the result does not depend on ``jobs``.
    """
    _check_second_moment_cap(n, allow_long)
    black = _black_table(n)
    match = matchings_array(n, cap=None)
    items = black.shape[0] * match.shape[0]
    if chunks is None:
        chunks = min(items, max(4 * jobs, 16))
    width = 6 * n + 1

    def run(index: int) -> tuple[np.ndarray, int]:
        start, stop = chunk_bounds(items, index, chunks)
        tally = np.zeros(width, dtype=np.int64)
        odd = _enumerate_chunk(n, black, match, start, stop, tally)
        return tally, odd

    results: list[tuple[np.ndarray, int]] = []
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        for done, res in enumerate(pool.map(run, range(chunks)), start=1):
            results.append(res)
            if progress is not None:
                progress(done, chunks)
    coeffs = [0] * width
    odd = 0
    for tally, chunk_odd in results:
        for i, c in enumerate(tally.tolist()):
            coeffs[i] += c
        odd += chunk_odd
    graphs = sum(coeffs)
    expected = second_moment_graph_count(n)
    if graphs != expected:
        raise RuntimeError(f"enumerated {graphs} graphs, expected {expected}")
    return EnumerationReport(MomentPolynomial(n, "G2", tuple(coeffs)), graphs, odd)


@lru_cache(maxsize=8)
def _cached_coeffs(n: int, allow_long: bool) -> MomentPolynomial:
    return enumerate_second_moment(n, allow_long=allow_long).poly


def second_moment_coeffs(n: int, *, jobs: int = 1, allow_long: bool = False) -> MomentPolynomial:
    """The c_i of M_2(k, n) = (2n-1)!! sum_i c_i k^i, by full enumeration."""
    _check_second_moment_cap(n, allow_long)
    if jobs <= 1:
        return _cached_coeffs(n, allow_long)
    return enumerate_second_moment(n, jobs=jobs, allow_long=allow_long).poly


def second_moment_eval(k: int, n: int, poly: MomentPolynomial) -> int:
    if poly.family != "G2" or poly.n != n:
        raise ValueError(f"polynomial is for {poly.family} n={poly.n}, not G2 n={n}")
    return double_factorial(2 * n - 1) * poly(k)


def second_moment_k1(n: int) -> int:
    """M_2(1, n) = ((2n-1)!!)^4 4^n."""
    return double_factorial(2 * n - 1) ** 4 * 4**n


def leading_coefficient(n: int) -> int:
    """c_{2n} = (2n)!!."""
    return double_factorial(2 * n)
