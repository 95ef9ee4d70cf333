from math import comb

import pytest
from hypothesis import given, strategies as st

from anongame.errors import InvalidArgument
from anongame.partitions import enumerate_partitions, num_partitions, partition_array, rank, unrank


def test_small_lattices():
    assert enumerate_partitions(2, 2) == [(0, 2), (1, 1), (2, 0)]
    assert enumerate_partitions(0, 3) == [(0, 0, 0)]
    assert len(enumerate_partitions(3, 3)) == 10


def test_k_zero_rejected():
    with pytest.raises(InvalidArgument):
        enumerate_partitions(3, 0)


def test_single_part():
    assert enumerate_partitions(4, 1) == [(4,)]


@pytest.mark.parametrize("m,k", [(0, 1), (5, 2), (4, 3), (6, 4), (3, 5)])
def test_order_is_lexicographic_and_complete(m, k):
    parts = enumerate_partitions(m, k)
    assert parts == sorted(parts)
    assert len(parts) == len(set(parts)) == comb(m + k - 1, k - 1) == num_partitions(m, k)
    assert all(sum(p) == m and min(p) >= 0 for p in parts)
    assert partition_array(m, k).shape == (len(parts), k)


@given(st.integers(0, 12), st.integers(1, 5), st.data())
def test_rank_unrank_round_trip(m, k, data):
    parts = enumerate_partitions(m, k)
    r = data.draw(st.integers(0, len(parts) - 1))
    assert rank(parts[r]) == r
    assert unrank(r, m, k) == parts[r]
