"""Small-scale Gaussian Boson Sampling: outcome probabilities and sector sums.

k of the m modes carry single-mode squeezed vacuum with squeezing r (phase
0); the state passes a unitary U and is measured in the Fock basis.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .combinatorics import DEFAULT_MATCHING_CAP, HalfInteger, binom_half
from .errors import CapExceededError
from .hafnian import hafnian_sym_product

CONVOLUTION_MAX_N = 6
CONVOLUTION_MAX_K = 8


@dataclass(frozen=True)
class GbsConfig:
    m: int
    k: int
    r: float

    def __post_init__(self):
        if not 1 <= self.k <= self.m:
            raise ValueError(f"need 1 <= k <= m, got k={self.k}, m={self.m}")
        if self.r < 0:
            raise ValueError(f"squeezing must be non-negative, got r={self.r}")


def sample_haar_unitary(m: int, seed: int | np.random.Generator) -> np.ndarray:
    """Haar-random m x m unitary: QR of a complex Ginibre matrix, with the
    phases of R's diagonal folded back into Q."""
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def unitary_to_json(U) -> str:
    U = np.asarray(U, dtype=complex)
    rows = [[[float(x.real), float(x.imag)] for x in row] for row in U]
    return json.dumps(rows)


def unitary_from_json(text: str) -> np.ndarray:
    rows = json.loads(text)
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def outcome_columns(outcome: Sequence[int]) -> list[int]:
    """Mode indices with mode i repeated n_i times (0-based)."""
    cols = []
    for i, count in enumerate(outcome):
        if count < 0:
            raise ValueError(f"negative photon count in {outcome!r}")
        cols.extend([i] * count)
    return cols


def gbs_probability(
    U, config: GbsConfig, outcome: Sequence[int], *, cap: int | None = DEFAULT_MATCHING_CAP
) -> float:
    """Probability of the photon-count vector ``outcome``.

    tanh^{2n}(r)/cosh^k(r) * |Haf(B^T B)|^2 / prod(n_i!), where B holds the
    first k rows of U and column i repeated n_i times. The 1/prod(n_i!)
    factor is 1 on collision-free outcomes.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (config.m, config.m):
        raise ValueError(f"unitary shape {U.shape} does not match m={config.m}")
    if len(outcome) != config.m:
        raise ValueError(f"outcome has {len(outcome)} modes, expected {config.m}")
    cols = outcome_columns(outcome)
    total = len(cols)
    if total % 2:
        raise ValueError(f"total photon count {total} is odd; squeezed light gives even totals")
    n = total // 2
    if cap is not None and n > cap:
        raise CapExceededError(f"{total} photons exceeds hafnian cap 2*{cap}")
    prefactor = math.tanh(config.r) ** total / math.cosh(config.r) ** config.k
    if n == 0:
        return prefactor
    B = U[: config.k][:, cols]
    weight = math.prod(math.factorial(c) for c in outcome)
    return prefactor * abs(hafnian_sym_product(B, cap=None)) ** 2 / weight


def outcomes_in_sector(m: int, n: int) -> Iterator[tuple[int, ...]]:
    """All count vectors over m modes with total 2n (collisions included)."""
    for modes in itertools.combinations_with_replacement(range(m), 2 * n):
        counts = [0] * m
        for i in modes:
            counts[i] += 1
        yield tuple(counts)


def sector_sum(U, config: GbsConfig, n: int) -> float:
    """Sum of gbs_probability over every outcome with 2n photons."""
    return math.fsum(gbs_probability(U, config, o) for o in outcomes_in_sector(config.m, n))


def sector_probability_exact_factor(k: int, n: int) -> Fraction:
    """binom(n - 1 + k/2, n), the combinatorial factor in P(2n)."""
    return binom_half(HalfInteger(2 * n - 2 + k), n)


def sector_probability(config: GbsConfig, n: int) -> float:
    """P(2n) = tanh^{2n}(r)/cosh^k(r) * binom(n - 1 + k/2, n)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    factor = sector_probability_exact_factor(config.k, n)
    return math.tanh(config.r) ** (2 * n) / math.cosh(config.r) ** config.k * float(factor)


def sector_sum_deviation(
    config: GbsConfig, n: int, trials: int, seed: int
) -> list[float]:
    """|sum of outcome probabilities - P(2n)| for ``trials`` seeded Haar unitaries."""
    rng = np.random.default_rng(seed)
    target = sector_probability(config, n)
    out = []
    for _ in range(trials):
        U = sample_haar_unitary(config.m, rng)
        out.append(abs(sector_sum(U, config, n) - target))
    return out


def _compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def convolution_lhs(n: int, k: int) -> int:
    """sum over l_1 + ... + l_k = n of prod_i binom(2 l_i, l_i), by brute force."""
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    if n > CONVOLUTION_MAX_N or k > CONVOLUTION_MAX_K:
        raise CapExceededError(
            f"convolution brute force capped at n <= {CONVOLUTION_MAX_N}, k <= {CONVOLUTION_MAX_K}"
        )
    return sum(math.prod(math.comb(2 * l, l) for l in c) for c in _compositions(n, k))


def convolution_rhs(n: int, k: int) -> Fraction:
    """4^n binom(n - 1 + k/2, n), exact."""
    return 4**n * sector_probability_exact_factor(k, n)


def sample_space_size(m: int, n: int) -> int:
    """Number of collision-free outcomes with 2n photons in m modes."""
    if n < 0 or 2 * n > m:
        raise ValueError(f"need 0 <= 2n <= m, got n={n}, m={m}")
    return math.comb(m, 2 * n)


class PhotonEstimate(NamedTuple):
    mean: float
    #: heuristic E[2n] <= sqrt(m)/10 stand-in for the asymptotic o(sqrt(m)) condition
    collision_free: bool


def expected_photons(config: GbsConfig) -> PhotonEstimate:
    mean = config.k * math.sinh(config.r) ** 2
    return PhotonEstimate(mean, mean <= math.sqrt(config.m) / 10)


def sbs_collision_probability(n: float, k: int) -> float:
    """Heralding-collision probability for k two-mode squeezers averaging n photons."""
    if k < 1 or n < 0:
        raise ValueError("need k >= 1 and n >= 0")
    x = (n / k) / (1 + n / k)
    return 1.0 - (1.0 - x * x) ** k
