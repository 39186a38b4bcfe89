"""Monte Carlo estimates of M_t(k, n) = E|Haf(X^T X)|^{2t}.

Each batch draws from its own Philox stream keyed by (seed, batch index),
so a batch's contribution is fixed no matter which worker computes it.
Batch means are combined in batch order.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .combinatorics import DEFAULT_MATCHING_CAP
from .errors import CapExceededError
from .hafnian import hafnian_sym_product_batch

DEFAULT_BATCHES = 100
MIN_BATCHES = 10
# samples per vectorized draw inside one batch
_DRAW_BLOCK = 20_000


@dataclass(frozen=True)
class MCEstimate:
    t: int
    k: int
    n: int
    mean: float
    stderr: float
    samples: int
    batches: int
    seed: int
    estimator: str = "mean"

    def to_dict(self) -> dict:
        data = asdict(self)
        if self.estimator == "mean":
            del data["estimator"]
        return data

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "MCEstimate":
        return cls(**data)


def batch_stream(seed: int, batch: int) -> np.random.Generator:
    """Counter-based generator for one batch; independent of scheduling."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(batch,))
    return np.random.Generator(np.random.Philox(ss))


def gaussian_matrices(rng: np.random.Generator, count: int, k: int, n: int) -> np.ndarray:
    """``count`` i.i.d. k x 2n standard complex Gaussian matrices, E|x|^2 = 1."""
    z = rng.standard_normal((count, k, 2 * n, 2))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def sample_gaussian_matrix(k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    return gaussian_matrices(rng, 1, k, n)[0]


def _validate(k, n, samples, batches, cap):
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    if cap is not None and n > cap:
        raise CapExceededError(f"Monte Carlo with n={n} exceeds hafnian cap {cap}")
    if batches < MIN_BATCHES:
        raise ValueError(f"need at least {MIN_BATCHES} batches, got {batches}")
    if samples < batches:
        raise ValueError(f"samples ({samples}) < batches ({batches})")
    if samples % batches:
        raise ValueError(f"samples ({samples}) must be a multiple of batches ({batches})")


def batch_moment_means(
    k: int,
    n: int,
    samples: int,
    batches: int,
    seed: int,
    *,
    jobs: int = 1,
    cap: int | None = DEFAULT_MATCHING_CAP,
) -> np.ndarray:
    """Per-batch means of |Haf|^2 and |Haf|^4, shape (batches, 2).

    Both moments come from the same draws, so their batch means carry the
    covariance needed for ratio estimates.
    """
    _validate(k, n, samples, batches, cap)
    per_batch = samples // batches

    def run(batch: int) -> np.ndarray:
        rng = batch_stream(seed, batch)
        acc = np.zeros(2)
        done = 0
        while done < per_batch:
            count = min(_DRAW_BLOCK, per_batch - done)
            X = gaussian_matrices(rng, count, k, n)
            sq = np.abs(hafnian_sym_product_batch(X, cap=None)) ** 2
            acc[0] += sq.sum()
            acc[1] += (sq * sq).sum()
            done += count
        return acc / per_batch

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        rows = list(pool.map(run, range(batches)))
    return np.array(rows)


def _summarize(values: np.ndarray, estimator: str) -> tuple[float, float]:
    b = values.shape[0]
    spread = float(np.std(values, ddof=1)) / math.sqrt(b)
    if estimator == "mean":
        return float(np.mean(values)), spread
    if estimator == "median-of-means":
        # asymptotic efficiency of the median relative to the mean: sqrt(pi/2)
        return float(np.median(values)), spread * math.sqrt(math.pi / 2)
    raise ValueError(f"unknown estimator {estimator!r}")


def estimate_moment(
    t: int,
    k: int,
    n: int,
    samples: int,
    batches: int = DEFAULT_BATCHES,
    seed: int = 0,
    *,
    jobs: int = 1,
    estimator: str = "mean",
    cap: int | None = DEFAULT_MATCHING_CAP,
) -> MCEstimate:
    """Estimate E|Haf(X^T X)|^{2t} with a batch-means standard error."""
    if t not in (1, 2):
        raise ValueError(f"moment order must be 1 or 2, got {t}")
    if estimator == "median-of-means" and t != 2:
        raise ValueError("median-of-means is only offered for t=2")
    means = batch_moment_means(k, n, samples, batches, seed, jobs=jobs, cap=cap)
    mean, stderr = _summarize(means[:, t - 1], estimator)
    return MCEstimate(t, k, n, mean, stderr, samples, batches, seed, estimator)
