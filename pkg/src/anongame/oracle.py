"""Brute-force ground truth for small games.

Nothing here touches the PMD convolution: payoffs are summed over every pure
outcome of the opponents, which keeps this module an independent check on
``game.expected_payoff``.
"""

import itertools
from math import prod

import numpy as np

from . import partitions
from .errors import InvalidArgument, ResourceLimitError
from .game import VERIFY_ATOL, expected_payoffs, others, player_regret

MAX_BRUTE_FORCE_PLAYERS = 12
MAX_GRID_PROFILES = 2_000_000


def brute_force_pmf(crvs, k):
    """Dict partition -> probability by enumerating every pure outcome."""
    crvs = [list(map(float, c)) for c in crvs]
    out = {}
    for outcome in itertools.product(range(k), repeat=len(crvs)):
        p = prod(c[a] for c, a in zip(crvs, outcome))
        if p == 0.0:
            continue
        counts = [0] * k
        for a in outcome:
            counts[a] += 1
        key = tuple(counts)
        out[key] = out.get(key, 0.0) + p
    return out


def brute_force_payoff(game, i, a, others_profile):
    """``E[u^i_a]`` by summing over all ``k^(n-1)`` opponent outcomes."""
    if game.n > MAX_BRUTE_FORCE_PLAYERS:
        raise ResourceLimitError(
            f"brute force over {game.k}^{game.n - 1} outcomes refused (n > {MAX_BRUTE_FORCE_PLAYERS})"
        )
    others_profile = [list(map(float, row)) for row in others_profile]
    if len(others_profile) != game.n - 1:
        raise InvalidArgument(f"need {game.n - 1} opponents")
    total = 0.0
    for outcome in itertools.product(range(game.k), repeat=game.n - 1):
        p = prod(row[b] for row, b in zip(others_profile, outcome))
        if p == 0.0:
            continue
        counts = [0] * game.k
        for b in outcome:
            counts[b] += 1
        total += p * game.payoffs[i, a, partitions.rank(counts)]
    return float(total)


def grid_strategies(k, grid_step):
    """All k-CRVs whose probabilities are multiples of ``grid_step``."""
    units = round(1.0 / grid_step)
    if units < 1 or abs(units * grid_step - 1.0) > 1e-9:
        raise InvalidArgument(f"1/grid_step must be an integer, got step {grid_step}")
    return partitions.partition_array(units, k)[::-1] / units


def grid_profile_search(game, grid_step, eps, well_supported=False, max_profiles=MAX_GRID_PROFILES):
    """First grid profile (canonical order) that is an ``eps``-equilibrium.

    With ``well_supported`` the test is the well-supported condition instead.
    Returns ``None`` when the grid holds no such profile.
    """
    grid = grid_strategies(game.k, grid_step)
    count = len(grid) ** game.n
    if count > max_profiles:
        raise ResourceLimitError(
            f"{len(grid)}^{game.n} = {count} grid profiles exceeds the cap {max_profiles}"
        )
    for combo in itertools.product(range(len(grid)), repeat=game.n):
        profile = grid[list(combo)]
        if all(_player_ok(game, profile, i, eps, well_supported) for i in range(game.n)):
            return profile
    return None


def _player_ok(game, profile, i, eps, well_supported):
    v = expected_payoffs(game, i, others(profile, i))
    if well_supported:
        played = profile[i] > 0
        return bool(np.all(v[played] >= v.max() - eps - VERIFY_ATOL))
    return player_regret(v, profile[i]) <= eps + VERIFY_ATOL




def refining_grid_search(game, eps, well_supported=False, max_profiles=MAX_GRID_PROFILES):
    """Grid search on steps 1, 1/2, 1/4, ... until a profile is found.

    Raises :class:`ResourceLimitError` once the next grid would exceed
    ``max_profiles`` without a hit.
    """
    units = 1
    while True:
        size = partitions.num_partitions(units, game.k) ** game.n
        if size > max_profiles:
            raise ResourceLimitError(
                f"no {eps}-equilibrium on grids up to step 1/{units // 2}; "
                f"step 1/{units} needs {size} profiles (cap {max_profiles})"
            )
        found = grid_profile_search(game, 1.0 / units, eps, well_supported, max_profiles)
        if found is not None:
            return found
        units *= 2
