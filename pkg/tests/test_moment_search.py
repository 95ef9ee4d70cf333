import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anongame.errors import InvalidArgument, ResourceLimitError
from anongame.game import generate_game, max_regret
from anongame.moment_search import (
    GridSpec,
    generate_data,
    grid_size,
    moment_search,
    round_profile_to_grid,
    strategy_grid,
)
from anongame.pmd import data_matrix, data_unit, data_vector, data_vector_sum, default_moment_degree, moment_indices

from conftest import random_crvs


# -- grid ----------------------------------------------------------------------


def test_grid_by_hand():
    spec = GridSpec(1, 2, 0.5, 0.25, 0.25)
    assert strategy_grid(spec).tolist() == [[0.25, 0.75], [0.5, 0.5], [0.75, 0.25]]


def test_grid_infeasible():
    with pytest.raises(InvalidArgument):
        GridSpec(1, 2, 0.5, 0.1, 0.6)


def test_grid_count():
    spec = GridSpec(1, 3, 0.5, 1 / 8, 1 / 8)
    assert grid_size(spec) == len(strategy_grid(spec)) == 21


def test_grid_for_game():
    spec = GridSpec.for_game(4, 2, c=0.5)
    assert spec.eps == 0.5
    assert spec.step <= 0.5 / (20 * 2 * 4) and spec.floor_prob == 0.5 / 20
    grid = strategy_grid(spec)
    assert np.all(grid >= spec.floor_prob - 1e-12)
    assert np.allclose(grid.sum(1), 1, atol=1e-12)
    assert np.allclose(grid * spec.resolution, np.round(grid * spec.resolution))
    assert grid.tolist() == sorted(grid.tolist())


# -- cover construction --------------------------------------------------------


S3 = np.array([[0.2, 0.8], [0.5, 0.5], [0.9, 0.1]])


def brute_keys(allowed, n, c):
    keys = set()
    for combo in itertools.product(*allowed):
        dv = data_vector_sum([data_vector(x, n, c) for x in combo])
        keys.add(dv.entries)
    return keys


def table_keys(table):
    return {tuple(int(v) for v in row) for row in table.keys}


def test_base_case():
    table = generate_data([S3[:2]], 1, 0.5)
    assert len(table) == 2


def test_singleton_sets():
    w = S3[1]
    table = generate_data([[w], [w]], 2, 0.5)
    assert len(table) == 1
    assert table.entry(0).data.entries == (data_vector(w, 2, 0.5) + data_vector(w, 2, 0.5)).entries


def test_three_players_match_brute_force():
    table = generate_data([S3] * 3, 3, 0.5)
    assert table_keys(table) == brute_keys([S3] * 3, 3, 0.5)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 4), st.integers(2, 3), st.integers(1, 6), st.integers(0, 10_000))
def test_cover_is_sound_and_complete(n, k, size, seed):
    rng = np.random.default_rng(seed)
    allowed = [random_crvs(rng, size, k) for _ in range(n)]
    table = generate_data(allowed, n, 0.5)
    assert table_keys(table) == brute_keys(allowed, n, 0.5)
    idx = moment_indices(k, default_moment_degree(0.5))
    unit = data_unit(n, 0.5)
    for r, entry in enumerate(table.entries()):
        assert len(entry.witness) == n
        assert np.array_equal(data_matrix(entry.witness, idx, unit).sum(0), table.keys[r])
        # each witness CRV comes from its own player's set
        for i, x in enumerate(entry.witness):
            assert any(np.array_equal(x, s) for s in allowed[i])


def test_target_pruning_keeps_reachable_values():
    rng = np.random.default_rng(1)
    allowed = [random_crvs(rng, 4, 2) for _ in range(3)]
    full = generate_data(allowed, 3, 0.5)
    for r in range(0, len(full), 7):
        target = full.keys[r]
        pruned = generate_data(allowed, 3, 0.5, target=target)
        assert target.tobytes() in {row.tobytes() for row in pruned.keys}
        assert table_keys(pruned) <= table_keys(full)


def test_empty_strategy_set_rejected():
    with pytest.raises(InvalidArgument):
        generate_data([S3, []], 2, 0.5)


def test_cover_cap():
    with pytest.raises(ResourceLimitError):
        generate_data([S3] * 4, 4, 0.5, max_cover=5)


# -- the search ----------------------------------------------------------------


def test_dominant_game():
    g = generate_game(3, 2, "dominant", 0)
    res = moment_search(g, 0.5)
    assert max_regret(g, res.profile) <= 3 ** -0.5 + 1e-9


def test_constant_game_first_value():
    res = moment_search(generate_game(3, 3, "constant", 0), 0.5, coarsen=16)
    assert res.examined == 1 and res.regret == 0.0


def test_seeded_game():
    g = generate_game(4, 2, "uniform-random", 11)
    res = moment_search(g, 0.5)
    assert res.regret <= 0.5
    assert max_regret(g, res.profile) == pytest.approx(res.regret, abs=1e-15)
    assert res.cover_sizes["n-1"] > 0 and res.grid_size == grid_size(res.spec)


def test_deterministic():
    g = generate_game(3, 2, "uniform-random", 5)
    a, b = moment_search(g, 0.5), moment_search(g, 0.5)
    assert np.array_equal(a.profile, b.profile)


def test_profile_on_grid():
    g = generate_game(3, 2, "uniform-random", 6)
    res = moment_search(g, 0.5)
    units = res.profile * res.spec.resolution
    assert np.allclose(units, np.round(units), atol=1e-9)
    assert res.profile.min() >= res.spec.floor_prob - 1e-12


def test_grid_guardrail():
    with pytest.raises(ResourceLimitError, match="coarsening"):
        moment_search(generate_game(50, 2, "constant", 0), 0.5)


def test_bad_c():
    with pytest.raises(InvalidArgument):
        moment_search(generate_game(3, 2, "constant", 0), 1.0)


def test_single_strategy():
    assert moment_search(generate_game(3, 1, "uniform-random", 0), 0.5).regret == 0.0


# -- rounding ------------------------------------------------------------------


def test_round_fixed_point():
    spec = GridSpec.for_game(4, 3, c=0.5)
    grid = strategy_grid(spec)
    prof = grid[[0, 5, 17, len(grid) - 1]]
    assert np.array_equal(round_profile_to_grid(prof, spec), prof)


def test_round_by_hand():
    out = round_profile_to_grid([[0.57, 0.43]], GridSpec(1, 2, 0.5, 0.1, 0.1))
    assert out == pytest.approx(np.array([[0.5, 0.5]]), abs=1e-15)


def test_round_precondition():
    with pytest.raises(InvalidArgument):
        round_profile_to_grid([[0.01, 0.99]], GridSpec.for_game(4, 2, c=0.5))


@pytest.mark.parametrize("n,k", [(4, 2), (5, 3), (10, 4)])
def test_round_tv_bound(n, k, rng):
    spec = GridSpec.for_game(n, k, c=0.5)
    prof = random_crvs(rng, 100, k, floor=spec.floor_prob)
    out = round_profile_to_grid(prof, spec)
    tv = 0.5 * np.abs(out - prof).sum(1)
    assert tv.max() <= spec.eps / (20 * n) * (k - 1)
