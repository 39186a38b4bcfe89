"""Hafnians by direct summation over perfect matchings.

Only the strict upper triangle of the input is read; the diagonal never
enters (this is the hafnian, not the loop hafnian).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .combinatorics import DEFAULT_MATCHING_CAP, matchings_array
from .errors import CapExceededError

# bound on (matrices x matchings) gathered at once by the batched path
_GATHER_BUDGET = 1 << 21


@lru_cache(maxsize=None)
def _pair_index(n_pairs: int) -> tuple[np.ndarray, np.ndarray]:
    m = matchings_array(n_pairs, cap=None)
    rows, cols = m[:, :, 0].copy(), m[:, :, 1].copy()
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def _half_dimension(shape: tuple[int, ...], cap: int | None) -> int:
    if len(shape) < 2 or shape[-1] != shape[-2]:
        raise ValueError(f"expected square matrices, got shape {shape}")
    dim = shape[-1]
    if dim % 2:
        raise ValueError(f"hafnian needs an even dimension, got {dim}")
    n = dim // 2
    if cap is not None and n > cap:
        raise CapExceededError(f"hafnian of dimension {dim} exceeds cap 2*{cap}")
    return n


def hafnian(A, *, cap: int | None = DEFAULT_MATCHING_CAP) -> complex:
    """Hafnian of a symmetric 2n x 2n matrix.

    The sum runs over the (2n-1)!! canonical matchings, each matching standing
    for the 2^n n! permutations that induce it.

    >>> hafnian([[0, 2.0], [2.0, 0]])
    (2+0j)
    """
    A = np.asarray(A, dtype=complex)
    return complex(hafnian_batch(A[None], cap=cap)[0])


def hafnian_batch(A, *, cap: int | None = DEFAULT_MATCHING_CAP) -> np.ndarray:
    """Hafnians of a stack of matrices with shape (B, 2n, 2n)."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 3:
        raise ValueError(f"expected a (B, 2n, 2n) stack, got shape {A.shape}")
    n = _half_dimension(A.shape, cap)
    count = A.shape[0]
    if n == 0:
        return np.ones(count, dtype=complex)
    rows, cols = _pair_index(n)
    n_match = rows.shape[0]
    out = np.empty(count, dtype=complex)
    step = max(1, _GATHER_BUDGET // n_match)
    for start in range(0, count, step):
        block = A[start : start + step]
        # (b, M, n) products, then summed over matchings in canonical order
        terms = block[:, rows, cols].prod(axis=-1)
        out[start : start + step] = terms.sum(axis=-1)
    return out


def symmetric_product(X) -> np.ndarray:
    """X^T X (plain transpose, no conjugation), for one matrix or a stack."""
    X = np.asarray(X, dtype=complex)
    return np.swapaxes(X, -1, -2) @ X


def hafnian_sym_product(X, *, cap: int | None = DEFAULT_MATCHING_CAP) -> complex:
    """Haf(X^T X) for a k x 2n matrix X."""
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2:
        raise ValueError(f"expected a k x 2n matrix, got shape {X.shape}")
    return hafnian(symmetric_product(X), cap=cap)


def hafnian_sym_product_batch(X, *, cap: int | None = DEFAULT_MATCHING_CAP) -> np.ndarray:
    """Haf(X_b^T X_b) for a stack X of shape (B, k, 2n)."""
    return hafnian_batch(symmetric_product(X), cap=cap)
