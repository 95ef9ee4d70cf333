"""Equilibrium search over a cover of quantized moment data.

Every grid CRV gets an integer data vector (its low-degree parameter moments,
rounded to a fixed unit, filed under its maximal component).  The data of a
profile is the sum over its players, so the set of reachable data values can
be built one player at a time, keeping one witness profile per value.  The
search walks that cover; for each data value it admits, per player, the grid
strategies that are near-best responses to a witness of the remaining
players' data, and asks whether the admitted strategies can still reach the
same data value.
"""

import logging
import time
from dataclasses import dataclass, field
from math import ceil

import numpy as np

from . import partitions
from .errors import InternalConsistencyError, InvalidArgument, ResourceLimitError
from .game import VERIFY_ATOL, max_regret
from .pmd import (
    DataVector,
    as_crvs,
    data_matrix,
    data_unit,
    default_moment_degree,
    moment_indices,
    pmd_pmf,
)

log = logging.getLogger(__name__)

GRID_WARN_SIZE = 1_000_000
DEFAULT_MAX_GRID = 5_000
DEFAULT_MAX_COVER = 2_000_000


class SearchFailed(InternalConsistencyError):
    """The cover was exhausted without a verified equilibrium."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats or {}


# -- strategy grid -------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Grid of CRVs: probabilities are multiples of ``step``, each >= ``floor_prob``.

    ``1 / step`` must be an integer so grid CRVs sum to exactly one.
    """

    n: int
    k: int
    eps: float
    step: float
    floor_prob: float

    def __post_init__(self):
        if self.step <= 0:
            raise InvalidArgument("step must be positive")
        if abs(self.resolution * self.step - 1) > 1e-9:
            raise InvalidArgument(f"1/step must be an integer, got step={self.step}")
        if self.floor_prob * self.k > 1 + 1e-12:
            raise InvalidArgument(
                f"infeasible grid: k * floor_prob = {self.k * self.floor_prob} > 1"
            )

    @property
    def resolution(self):
        return int(round(1 / self.step))

    @property
    def floor_units(self):
        return int(ceil(self.floor_prob * self.resolution - 1e-9))

    @classmethod
    def for_game(cls, n, k, c=None, eps=None, coarsen=1.0):
        """Grid with step ``eps / (20 k n)`` (times ``coarsen``) and floor ``eps / (10 k)``.

        The step is shrunk to the nearest reciprocal of an integer.
        """
        if eps is None:
            if c is None:
                raise InvalidArgument("give c or eps")
            eps = n ** (-c)
        if coarsen < 1:
            raise InvalidArgument("coarsen factor must be >= 1")
        raw = eps / (20 * k * n) * coarsen
        resolution = max(k, int(ceil(1 / raw - 1e-9)))
        return cls(n, k, eps, 1.0 / resolution, eps / (10 * k))


def grid_size(spec):
    free = spec.resolution - spec.k * spec.floor_units
    return 0 if free < 0 else partitions.num_partitions(free, spec.k)


def strategy_grid(spec):
    """All grid CRVs in ascending lexicographic order of their probabilities."""
    free = spec.resolution - spec.k * spec.floor_units
    if free < 0:
        raise InvalidArgument(
            f"infeasible grid: {spec.k} x floor {spec.floor_prob} exceeds 1 at step {spec.step}"
        )
    size = partitions.num_partitions(free, spec.k)
    if size > GRID_WARN_SIZE:
        log.warning("strategy grid has %d CRVs", size)
    units = partitions.partition_array(free, spec.k) + spec.floor_units
    return units / spec.resolution


def round_profile_to_grid(profile, spec):
    """Round every coordinate but the last down to a multiple of ``step``.

    The last coordinate takes up the residual.  Each player moves by less than
    ``(k - 1) * step`` in total variation.
    """
    probs = as_crvs(profile, spec.k)
    if probs.size and probs.min() < spec.floor_prob - 1e-12:
        raise InvalidArgument(
            f"every probability must be >= floor_prob={spec.floor_prob}, got {probs.min()}"
        )
    head = np.floor(probs[:, :-1] * spec.resolution + 1e-9)
    units = np.concatenate([head, spec.resolution - head.sum(axis=1, keepdims=True)], axis=1)
    out = units / spec.resolution
    tv = 0.5 * np.abs(out - probs).sum(axis=1)
    bound = (spec.k - 1) * spec.step
    if tv.size and tv.max() > bound + 1e-12:
        raise InternalConsistencyError(f"rounding moved a player by {tv.max()} > {bound}")
    return out


# -- cover construction --------------------------------------------------------


def _void(rows):
    rows = np.ascontiguousarray(rows)
    return rows.view(np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))).ravel()


def _first_unique(rows):
    """Indices of the first occurrence of each distinct row, in original order."""
    if len(rows) == 0:
        return np.zeros(0, dtype=np.int64)
    _, idx = np.unique(_void(rows), return_index=True)
    return np.sort(idx)


@dataclass(frozen=True)
class CoverEntry:
    data: DataVector
    witness: np.ndarray


class CoverTable:
    """Distinct data values reachable at one level, each with a witness profile.

    Rows are kept in insertion order.  Row ``r`` at level ``l`` extends row
    ``parent_rows[r]`` of the previous level with the CRV ``crvs[r]``.
    """

    def __init__(self, level, keys, parent=None, parent_rows=None, crvs=None, meta=None):
        self.level = level
        self.keys = keys
        self.parent = parent
        self.parent_rows = parent_rows
        self.crvs = crvs
        self.meta = meta or {}
        self._sorted = None

    def __len__(self):
        return len(self.keys)

    def _sorted_view(self):
        if self._sorted is None:
            v = _void(self.keys)
            order = np.argsort(v, kind="stable")
            self._sorted = (v[order], order)
        return self._sorted

    def lookup_many(self, rows):
        """Row index for each query row, ``-1`` where absent."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.keys.shape[1])
        if len(self.keys) == 0:
            return np.full(len(rows), -1, dtype=np.int64)
        sv, order = self._sorted_view()
        q = _void(rows)
        pos = np.searchsorted(sv, q)
        pos = np.minimum(pos, len(sv) - 1)
        hit = sv[pos] == q
        return np.where(hit, order[pos], -1)

    def lookup(self, key):
        if isinstance(key, DataVector):
            key = key.as_array()
        return int(self.lookup_many(np.asarray(key)[None, :])[0])

    def __contains__(self, key):
        return self.lookup(key) >= 0

    def witness(self, row):
        """Witness CRVs (one per level) for the data value in ``row``."""
        out = []
        table = self
        while table is not None and table.level > 0:
            out.append(table.crvs[row])
            row = table.parent_rows[row]
            table = table.parent
        if not out:
            return np.zeros((0, self.meta.get("k", 0)))
        return np.array(out[::-1])

    def entry(self, row):
        m = self.meta
        data = DataVector(m.get("c"), m.get("L"), m.get("unit"), tuple(int(v) for v in self.keys[row]))
        return CoverEntry(data, self.witness(row))

    def entries(self):
        for r in range(len(self)):
            yield self.entry(r)


CHUNK_CELLS = 4_000_000  # candidate rows x entries held in memory at once


def _unique_data(crvs, data):
    first = _first_unique(data)
    return data[first], crvs[first]


def _candidate_chunks(table, uniq, target=None):
    """Yield ``(keys, flat_index)`` of new candidates, parent-major, in chunks."""
    n_new = len(uniq)
    width = max(1, uniq.shape[1])
    per_chunk = max(1, CHUNK_CELLS // max(1, n_new * width))
    for lo in range(0, len(table), per_chunk):
        hi = min(len(table), lo + per_chunk)
        cand = (table.keys[lo:hi, None, :] + uniq[None, :, :]).reshape((hi - lo) * n_new, -1)
        flat = np.arange(lo * n_new, hi * n_new)
        if target is not None:
            ok = np.all(cand <= target, axis=1)
            cand, flat = cand[ok], flat[ok]
        keep = _first_unique(cand)
        yield cand[keep], flat[keep]


def _extend(table, crvs, data, target=None, max_cover=None):
    """One level of cover construction: every old value plus every new CRV's data."""
    uniq, reps = _unique_data(crvs, data)
    n_new = len(uniq)
    keys = np.zeros((0, table.keys.shape[1]), dtype=np.int64)
    flat = np.zeros(0, dtype=np.int64)
    pending_k, pending_f, pending = [], [], 0

    def merge():
        # flat indices grow chunk by chunk, so first occurrences stay first
        ks = np.concatenate([keys] + pending_k)
        fs = np.concatenate([flat] + pending_f)
        keep = _first_unique(ks)
        ks, fs = ks[keep], fs[keep]
        if max_cover is not None and len(ks) > max_cover:
            raise ResourceLimitError(
                f"cover level {table.level + 1} has over {max_cover} values (cap {max_cover})"
            )
        return ks, fs

    merge_at = max(CHUNK_CELLS // max(1, keys.shape[1]), 2 * (max_cover or 0))
    for ck, cf in _candidate_chunks(table, uniq, target):
        pending_k.append(ck)
        pending_f.append(cf)
        pending += len(ck)
        if pending >= merge_at:
            keys, flat = merge()
            pending_k, pending_f, pending = [], [], 0
    keys, src = merge()
    return CoverTable(
        table.level + 1, keys, table, src // n_new, reps[src % n_new], dict(table.meta)
    )


def _iter_next_level(table, uniq):
    """Data values of the next level in insertion order, without storing them all."""
    seen = set()
    for keys, _ in _candidate_chunks(table, uniq):
        for row in keys:
            b = row.tobytes()
            if b not in seen:
                seen.add(b)
                yield row


def _empty_table(width, meta):
    return CoverTable(0, np.zeros((1, width), dtype=np.int64), meta=meta)


def generate_data(allowed, n, c, L=None, unit=None, target=None, max_cover=None):
    """Cover of all data values ``D(X_1 + ... + X_l)`` with ``X_i`` from ``allowed[i]``.

    ``n`` and ``c`` fix the quantization unit ``n^-c / n`` unless ``unit`` is
    given.  With ``target``, partial sums that exceed it in any coordinate are
    dropped (data entries are nonnegative, so they can never reach it).
    """
    L = default_moment_degree(c) if L is None else L
    unit = data_unit(n, c) if unit is None else unit
    allowed = [as_crvs(s) for s in allowed]
    if not allowed or any(len(s) == 0 for s in allowed):
        raise InvalidArgument("every player needs a nonempty strategy set")
    k = allowed[0].shape[1]
    indices = moment_indices(k, L)
    target = None if target is None else np.asarray(
        target.as_array() if isinstance(target, DataVector) else target, dtype=np.int64
    )
    table = _empty_table(len(indices), {"c": c, "L": L, "unit": unit, "k": k})
    for s in allowed:
        table = _extend(table, s, data_matrix(s, indices, unit), target, max_cover)
    return table


# -- the search ----------------------------------------------------------------


@dataclass
class _Prepared:
    grid: np.ndarray
    data: np.ndarray
    uniq: np.ndarray
    group_of: np.ndarray
    cover: CoverTable


_PREPARED = {}
_PREPARED_MAX = 4


def _prepared_cover(spec, L, unit, c, max_cover):
    """Grid, its distinct data and the (n-1)-player cover; depends only on the grid."""
    key = (spec, L, unit)
    if key in _PREPARED:
        return _PREPARED[key]
    grid = strategy_grid(spec)
    indices = moment_indices(spec.k, L)
    data = data_matrix(grid, indices, unit)
    uniq, _ = _unique_data(grid, data)
    group_of = CoverTable(1, uniq).lookup_many(data)
    table = _empty_table(len(indices), {"c": c, "L": L, "unit": unit, "k": spec.k})
    for _ in range(spec.n - 1):
        table = _extend(table, grid, data, max_cover=max_cover)
    prep = _Prepared(grid, data, uniq, group_of, table)
    if len(_PREPARED) >= _PREPARED_MAX:
        _PREPARED.pop(next(iter(_PREPARED)))
    _PREPARED[key] = prep
    return prep


@dataclass
class MomentSearchResult:
    profile: np.ndarray
    eps: float
    regret: float
    spec: GridSpec
    moment_degree: int
    grid_size: int
    cover_sizes: dict = field(default_factory=dict)
    examined: int = 0
    rejected: int = 0
    timings: dict = field(default_factory=dict)


def moment_search(
    game,
    c,
    coarsen=1.0,
    moment_degree=None,
    cover_fraction=0.2,
    response_fraction=0.6,
    max_grid=DEFAULT_MAX_GRID,
    max_cover=DEFAULT_MAX_COVER,
    strict=False,
):
    """Approximate equilibrium with regret at most ``n^-c``.

    ``cover_fraction`` sets the moment quantization to ``cover_fraction * eps / n``
    and ``response_fraction * eps`` is the best-response slack used when
    admitting strategies.  Every returned profile has been re-verified; a
    candidate that fails verification is skipped (or raises when ``strict``).
    """
    if not 0 < c < 1:
        raise InvalidArgument("c must lie in (0, 1)")
    n, k = game.n, game.k
    eps = n ** (-c)
    t0 = time.perf_counter()
    if k == 1:
        profile = np.ones((n, 1))
        spec = GridSpec(n, 1, eps, 1.0, 0.0)
        return MomentSearchResult(profile, eps, 0.0, spec, 0, 1)

    spec = GridSpec.for_game(n, k, eps=eps, coarsen=coarsen)
    size = grid_size(spec)
    if size > max_grid:
        raise ResourceLimitError(
            f"strategy grid has {size} CRVs (cap {max_grid}); raise the grid coarsening factor"
        )
    L = default_moment_degree(c) if moment_degree is None else moment_degree
    unit = cover_fraction * eps / n
    prep = _prepared_cover(spec, L, unit, c, max_cover)
    grid, uniq, group_of, cover_prev = prep.grid, prep.uniq, prep.group_of, prep.cover
    width = uniq.shape[1]
    meta = cover_prev.meta
    t1 = time.perf_counter()
    log.info("cover built: |D_n-1|=%d grid=%d distinct data=%d", len(cover_prev), len(grid), len(uniq))

    flat_payoffs = game.payoffs.reshape(n * k, -1)
    pay_cache = {}

    def payoffs_against(row):
        if row not in pay_cache:
            mass = pmd_pmf(cover_prev.witness(row), k=k).mass
            pay_cache[row] = (flat_payoffs @ mass).reshape(n, k)
        return pay_cache[row]

    slack = response_fraction * eps
    rejected = 0
    examined = 0
    for key in _iter_next_level(cover_prev, uniq):
        examined += 1
        rows = cover_prev.lookup_many(key[None, :] - uniq)
        found = rows >= 0
        if not found.any():
            continue
        pay = np.zeros((len(uniq), n, k))
        for g in np.flatnonzero(found):
            pay[g] = payoffs_against(int(rows[g]))
        per_crv = pay[group_of]  # (S, n, k)
        value = np.einsum("sk,snk->sn", grid, per_crv)
        admitted = (value >= per_crv.max(axis=2) - slack - VERIFY_ATOL) & found[group_of][:, None]
        if not admitted.any(axis=0).all():
            continue
        restricted = _empty_table(width, meta)
        for i in range(n):
            mask = admitted[:, i]
            restricted = _extend(restricted, grid[mask], prep.data[mask], key)
            if len(restricted) == 0:
                break
        row = restricted.lookup(key) if len(restricted) else -1
        if row < 0:
            continue
        profile = restricted.witness(row)
        reg = max_regret(game, profile)
        if reg <= eps + VERIFY_ATOL:
            t2 = time.perf_counter()
            return MomentSearchResult(
                profile, eps, reg, spec, L, len(grid),
                {"n-1": len(cover_prev), "n_examined": examined},
                examined, rejected,
                {"cover_s": t1 - t0, "search_s": t2 - t1},
            )
        rejected += 1
        if strict:
            raise InternalConsistencyError(
                f"candidate for cover value #{examined} has regret {reg} > eps {eps}"
            )
    stats = {"examined": examined, "rejected": rejected, "grid": len(grid)}
    raise SearchFailed(
        f"no verified {eps:.4g}-equilibrium in a cover of {examined} values "
        f"({rejected} candidates failed verification)",
        stats,
    )
