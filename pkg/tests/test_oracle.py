import numpy as np
import pytest

from anongame import partitions
from anongame.errors import InvalidArgument, ResourceLimitError
from anongame.game import AnonymousGame, generate_game, max_regret, pure_profile, verify_well_supported
from anongame.oracle import brute_force_payoff, brute_force_pmf, grid_profile_search, grid_strategies


def anti_coordination():
    # payoff 1 iff the other player is on the other strategy
    parts = partitions.enumerate_partitions(1, 2)
    row = lambda a: [float(x[a] == 0) for x in parts]
    return AnonymousGame(2, 2, [[row(0), row(1)]] * 2)


def test_constant_payoff():
    g = AnonymousGame(3, 2, np.full((3, 2, 3), 0.7))
    assert brute_force_payoff(g, 1, 0, [[0.2, 0.8], [0.5, 0.5]]) == pytest.approx(0.7)


def test_deterministic_others():
    g = generate_game(4, 3, "uniform-random", 1)
    others_ = pure_profile([2, 0, 2], 3)
    assert brute_force_payoff(g, 0, 1, others_) == g.payoff(0, 1, (1, 0, 2))


def test_guardrail():
    g = generate_game(13, 2, "constant", 0)
    with pytest.raises(ResourceLimitError):
        brute_force_payoff(g, 0, 0, np.full((12, 2), 0.5))
    with pytest.raises(ResourceLimitError):
        grid_profile_search(generate_game(8, 3, "constant", 0), 0.05, 0.0)


def test_brute_force_pmf_small():
    assert brute_force_pmf([[0.5, 0.5], [0.5, 0.5]], 2) == {(0, 2): 0.25, (1, 1): 0.5, (2, 0): 0.25}


def test_grid_strategies():
    strategies = grid_strategies(2, 0.5)
    assert strategies.tolist() == [[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]]
    assert len(grid_strategies(3, 0.25)) == 15
    with pytest.raises(InvalidArgument):
        grid_strategies(2, 0.3)


def test_dominant_found_first():
    prof = grid_profile_search(generate_game(3, 2, "dominant", 0), 0.5, 0.0)
    assert prof.tolist() == [[1.0, 0.0]] * 3


def test_constant_returns_first_profile():
    prof = grid_profile_search(generate_game(3, 3, "constant", 0), 0.25, 0.0)
    assert prof.tolist() == [[1.0, 0.0, 0.0]] * 3


def test_anti_coordination():
    g = anti_coordination()
    prof = grid_profile_search(g, 0.5, 0.0)
    assert max_regret(g, prof) == 0.0
    # exhaustive check over the 9 grid profiles
    zero = []
    for a in grid_strategies(2, 0.5):
        for b in grid_strategies(2, 0.5):
            if max_regret(g, [a, b]) == 0:
                zero.append((tuple(a), tuple(b)))
    assert zero == [((1.0, 0.0), (0.0, 1.0)), ((0.5, 0.5), (0.5, 0.5)), ((0.0, 1.0), (1.0, 0.0))]
    assert (tuple(prof[0]), tuple(prof[1])) == zero[0]


def test_not_found_and_well_supported():
    g = anti_coordination()
    assert grid_profile_search(g, 1.0, 0.0) is not None
    g2 = generate_game(3, 2, "uniform-random", 4)
    prof = grid_profile_search(g2, 0.25, 0.1, well_supported=True)
    if prof is not None:
        assert verify_well_supported(g2, prof, 0.1)[0]


@pytest.mark.parametrize("seed", range(5))
def test_returned_profiles_verify(seed):
    g = generate_game(3, 2, "uniform-random", seed)
    prof = grid_profile_search(g, 0.1, 0.05)
    assert prof is not None and max_regret(g, prof) <= 0.05 + 1e-9
