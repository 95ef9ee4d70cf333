"""Canonical enumeration of the partition lattice.

A partition of ``m`` into ``k`` parts is a k-tuple of nonnegative integers
summing to ``m``.  All tables in the package (payoffs, pmfs) are indexed by the
rank of a partition in ascending lexicographic order.

Because the last coordinate is determined by the first ``k - 1``, ascending
lexicographic order is exactly C-order over the dense cube
``[0, m]^(k-1)`` restricted to points with coordinate sum at most ``m``.  The
pmf code uses that fact to work on dense tensors and gather at the end.
"""

from functools import lru_cache
from math import comb

import numpy as np

from .errors import InvalidArgument


def num_partitions(m, k):
    """Number of partitions of ``m`` into ``k`` nonnegative parts."""
    if k < 1:
        raise InvalidArgument("k must be at least 1")
    if m < 0:
        raise InvalidArgument("m must be nonnegative")
    return comb(m + k - 1, k - 1)


@lru_cache(maxsize=256)
def _simplex_flat_index(m, k):
    # flat C-order positions (in the (m+1)^(k-1) cube) of points with sum <= m
    if k == 1:
        return np.zeros(1, dtype=np.int64)
    coords = np.indices((m + 1,) * (k - 1)).reshape(k - 1, -1)
    flat = np.flatnonzero(coords.sum(axis=0) <= m)
    flat.setflags(write=False)
    return flat


@lru_cache(maxsize=256)
def partition_array(m, k):
    """All partitions as a read-only ``(P, k)`` int array in canonical order."""
    num_partitions(m, k)
    if k == 1:
        out = np.array([[m]], dtype=np.int64)
    else:
        flat = _simplex_flat_index(m, k)
        head = np.stack(np.unravel_index(flat, (m + 1,) * (k - 1)), axis=1)
        out = np.concatenate([head, m - head.sum(axis=1, keepdims=True)], axis=1)
        out = out.astype(np.int64)
    out.setflags(write=False)
    return out


def enumerate_partitions(m, k):
    """List of partition tuples of ``m`` into ``k`` parts, ascending lex order.

    >>> enumerate_partitions(2, 2)
    [(0, 2), (1, 1), (2, 0)]
    """
    return [tuple(int(v) for v in row) for row in partition_array(m, k)]


def rank(x):
    """Index of partition ``x`` in the canonical order of its lattice."""
    x = [int(v) for v in x]
    k = len(x)
    if k < 1 or any(v < 0 for v in x):
        raise InvalidArgument(f"not a partition: {x}")
    remaining = sum(x)
    r = 0
    for j in range(k - 1):
        parts_left = k - j - 1
        for v in range(x[j]):
            r += comb(remaining - v + parts_left - 1, parts_left - 1)
        remaining -= x[j]
    return r


def unrank(r, m, k):
    """Inverse of :func:`rank` for the lattice of ``m`` into ``k`` parts."""
    total = num_partitions(m, k)
    if not 0 <= r < total:
        raise InvalidArgument(f"rank {r} out of range for ({m}, {k})")
    x = []
    remaining = m
    for j in range(k - 1):
        parts_left = k - j - 1
        v = 0
        while True:
            block = comb(remaining - v + parts_left - 1, parts_left - 1)
            if r < block:
                break
            r -= block
            v += 1
        x.append(v)
        remaining -= v
    x.append(remaining)
    return tuple(x)


@lru_cache(maxsize=64)
def rank_lookup(m, k):
    """Dict from partition tuple to rank; handy for sparse neighbour queries."""
    return {p: i for i, p in enumerate(enumerate_partitions(m, k))}
