import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hafmoments.combinatorics import (
    HalfInteger,
    binom_half,
    count_components,
    double_factorial,
    enumerate_matchings,
    is_canonical_matching,
    matching_from_rank,
    matching_rank,
    matchings_array,
)
from hafmoments.errors import CapExceededError

from oracles import all_pairings, falling_factorial


@pytest.mark.parametrize("x, expected", [(-1, 1), (0, 1), (1, 1), (5, 15), (8, 384)])
def test_double_factorial_values(x, expected):
    assert double_factorial(x) == expected


def test_double_factorial_rejects_below_minus_one():
    with pytest.raises(ValueError):
        double_factorial(-2)


@pytest.mark.parametrize("n", range(1, 21))
def test_double_factorials_multiply_to_factorial(n):
    assert double_factorial(2 * n) * double_factorial(2 * n - 1) == math.factorial(2 * n)


def test_matchings_small_cases():
    assert list(enumerate_matchings(1)) == [((1, 2),)]
    assert list(enumerate_matchings(2)) == [
        ((1, 2), (3, 4)),
        ((1, 3), (2, 4)),
        ((1, 4), (2, 3)),
    ]


@pytest.mark.parametrize("n", range(1, 7))
def test_matching_count_distinct_and_canonical(n):
    ms = list(enumerate_matchings(n))
    assert len(ms) == double_factorial(2 * n - 1)
    assert len(set(ms)) == len(ms)
    assert all(is_canonical_matching(m, n) for m in ms)


def test_five_pairs_against_independent_pairing_generator():
    ours = set(enumerate_matchings(5))
    theirs = {tuple(sorted((a + 1, b + 1) for a, b in p)) for p in all_pairings(range(10))}
    assert len(ours) == 945
    assert ours == theirs


@pytest.mark.parametrize("n", [3, 4])
@pytest.mark.parametrize("count", [1, 2, 5, 7])
def test_chunks_partition_the_stream(n, count):
    full = list(enumerate_matchings(n))
    pieces = [list(enumerate_matchings(n, chunk=(i, count))) for i in range(count)]
    assert sum(pieces, []) == full


def test_rank_round_trip():
    for rank, m in enumerate(enumerate_matchings(4)):
        assert matching_rank(m) == rank
        assert matching_from_rank(4, rank) == m


def test_matching_cap():
    with pytest.raises(CapExceededError):
        next(enumerate_matchings(9))
    assert next(enumerate_matchings(9, cap=9)) == tuple((2 * i - 1, 2 * i) for i in range(1, 10))


def test_matchings_array_is_zero_based():
    arr = matchings_array(2)
    assert arr.shape == (3, 2, 2)
    assert arr[0].tolist() == [[0, 1], [2, 3]]


@pytest.mark.parametrize(
    "x, n, expected",
    [(Fraction(1, 2), 1, Fraction(1, 2)), (1, 1, Fraction(1)), (3, 2, Fraction(3)), (Fraction(3, 2), 2, Fraction(3, 8))],
)
def test_binom_half_values(x, n, expected):
    assert binom_half(x, n) == expected


def test_binom_half_rejects_non_half_integers():
    with pytest.raises(ValueError):
        binom_half(Fraction(1, 3), 2)


@settings(max_examples=200, deadline=None)
@given(st.integers(-40, 40), st.integers(0, 10))
def test_binom_half_times_factorial_is_falling_factorial(twice, n):
    x = HalfInteger(twice)
    assert binom_half(x, n) * math.factorial(n) == falling_factorial(Fraction(twice, 2), n)


def test_binom_half_matches_integer_binomial():
    for x in range(0, 12):
        for n in range(0, 12):
            assert binom_half(x, n) == math.comb(x, n)


@pytest.mark.parametrize(
    "nv, edges, expected",
    [
        (4, [(1, 2), (3, 4)], 2),
        (4, [(1, 2), (3, 4), (1, 2)], 2),
        (8, [(1, 2), (3, 4), (5, 6), (7, 8), (1, 4), (2, 3), (5, 8), (6, 7)], 2),
        (3, [], 3),
    ],
)
def test_count_components(nv, edges, expected):
    assert count_components(nv, edges) == expected


def test_count_components_rejects_bad_labels():
    with pytest.raises(ValueError):
        count_components(3, [(1, 4)])
    with pytest.raises(ValueError):
        count_components(3, [(0, 1)])


edge_lists = st.lists(st.tuples(st.integers(1, 10), st.integers(1, 10)), max_size=20)


@given(edge_lists, st.randoms(use_true_random=False))
def test_count_components_invariant_under_permutation_and_duplication(edges, rnd):
    base = count_components(10, edges)
    shuffled = edges + edges[: len(edges) // 2]
    rnd.shuffle(shuffled)
    assert count_components(10, shuffled) == base
