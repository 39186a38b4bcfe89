import numpy as np
import pytest

from hafmoments.combinatorics import double_factorial
from hafmoments.errors import CapExceededError
from hafmoments.hafnian import (
    hafnian,
    hafnian_batch,
    hafnian_sym_product,
    hafnian_sym_product_batch,
    symmetric_product,
)

from oracles import hafnian_by_permutations, permanent_brute


def random_symmetric(rng, dim):
    B = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return B + B.T


def rel(a, b):
    return abs(a - b) / abs(b)


def test_two_by_two():
    assert hafnian([[7, 3.5], [3.5, -1]]) == 3.5


def test_four_by_four_three_terms():
    A = np.zeros((4, 4))
    for (i, j), v in {(0, 1): 1, (2, 3): 2, (0, 2): 3, (1, 3): 4, (0, 3): 5, (1, 2): 6}.items():
        A[i, j] = A[j, i] = v
    assert hafnian(A) == 44


def test_block_embedding_gives_permanent():
    W = np.array([[1, 2], [3, 4]])
    A = np.block([[np.zeros((2, 2)), W], [W.T, np.zeros((2, 2))]])
    assert hafnian(A) == pytest.approx(10)


def test_diagonal_is_ignored():
    rng = np.random.default_rng(3)
    A = random_symmetric(rng, 6)
    B = A.copy()
    np.fill_diagonal(B, 17.0)
    assert hafnian(A) == hafnian(B)


def test_empty_matrix_has_unit_hafnian():
    assert hafnian(np.zeros((0, 0))) == 1


def test_rejects_odd_and_capped_dimensions():
    with pytest.raises(ValueError):
        hafnian(np.zeros((3, 3)))
    with pytest.raises(CapExceededError):
        hafnian(np.zeros((18, 18)))


@pytest.mark.parametrize("dim", [2, 4, 6])
def test_matches_permutation_definition(dim):
    rng = np.random.default_rng(dim)
    A = random_symmetric(rng, dim)
    assert rel(hafnian(A), hafnian_by_permutations(A)) < 1e-12


def test_permutation_invariance_and_scaling_on_corpus():
    rng = np.random.default_rng(11)
    for trial in range(100):
        dim = 2 * (1 + trial % 4)
        A = random_symmetric(rng, dim)
        P = np.eye(dim)[rng.permutation(dim)]
        c = complex(rng.standard_normal(), rng.standard_normal())
        ref = hafnian(A)
        assert rel(hafnian(P @ A @ P.T), ref) < 1e-10
        assert rel(hafnian(c * A), c ** (dim // 2) * ref) < 1e-10


@pytest.mark.parametrize("size", [3, 4])
def test_permanent_identity_random(size):
    rng = np.random.default_rng(size)
    for _ in range(5):
        W = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        Z = np.zeros((size, size))
        A = np.block([[Z, W], [W.T, Z]])
        assert rel(hafnian(A), permanent_brute(W)) < 1e-10


def test_sym_product_row_vector_and_ones():
    a, b = 2 - 1j, 0.5 + 3j
    assert hafnian_sym_product(np.array([[a, b]])) == pytest.approx(a * b)
    for k in (1, 3, 7):
        assert hafnian_sym_product(np.ones((k, 2))) == pytest.approx(k)


def test_sym_product_equals_hafnian_of_product():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    assert rel(hafnian_sym_product(X), hafnian(X.T @ X)) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_rank_one_product_factorizes(n):
    rng = np.random.default_rng(n)
    x = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
    expected = double_factorial(2 * n - 1) * np.prod(x)
    assert rel(hafnian_sym_product(x[None, :]), expected) < 1e-10


def test_uses_plain_transpose():
    X = np.array([[1j, 1j]])
    # (X^T X)_12 = (1j)(1j) = -1, whereas the conjugate product would give +1
    assert symmetric_product(X)[0, 1] == -1
    assert hafnian_sym_product(X) == -1


def test_batch_matches_single():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((50, 3, 6)) + 1j * rng.standard_normal((50, 3, 6))
    batch = hafnian_sym_product_batch(X)
    single = np.array([hafnian_sym_product(x) for x in X])
    np.testing.assert_allclose(batch, single, rtol=1e-13)
    assert hafnian_batch(symmetric_product(X)).shape == (50,)
