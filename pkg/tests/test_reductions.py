import numpy as np
import pytest

from anongame import partitions
from anongame.errors import PreconditionError, ResourceLimitError
from anongame.game import expected_payoffs, generate_game, max_regret, others, pure_profile, regret, verify_well_supported
from anongame.moment_search import moment_search
from anongame.oracle import grid_profile_search, refining_grid_search
from anongame.reductions import ane2wsne, fptas_pipeline, pad_game, unpad_profile


def oracle_solver(game, target):
    return refining_grid_search(game, target)


def test_exact_equilibrium_unchanged():
    g = generate_game(3, 2, "dominant", 0)
    prof = pure_profile([0, 0, 0], 2)
    assert np.array_equal(ane2wsne(g, prof, 0.1), prof)


def test_small_dominated_mass_is_moved():
    g = generate_game(2, 2, "dominant", 0)
    prof = np.array([[0.999, 0.001], [1.0, 0.0]])
    out = ane2wsne(g, prof, 0.2)
    assert out.tolist() == [[1.0, 0.0], [1.0, 0.0]]


def test_precondition_checked():
    g = generate_game(2, 2, "dominant", 0)
    with pytest.raises(PreconditionError):
        ane2wsne(g, [[0.9, 0.1], [1.0, 0.0]], 0.2)


def near_equilibrium(g, seed):
    """An oracle profile with small regret, plus the eps it certifies."""
    prof = refining_grid_search(g, 0.02, max_profiles=200_000)
    r = max_regret(g, prof)
    eps = max(np.sqrt(4 * g.n * r) * 1.01, 1e-3)
    return prof, eps


@pytest.mark.parametrize("seed", range(10))
def test_converted_profiles_are_well_supported(seed):
    g = generate_game(3, 2, "uniform-random", seed)
    prof, eps = near_equilibrium(g, seed)
    if eps >= 1:
        pytest.skip("oracle profile too coarse for this game")
    out = ane2wsne(g, prof, eps)
    assert verify_well_supported(g, out, eps)[0]


@pytest.mark.parametrize("kind,seed", [("uniform-random", 8)])
def test_moment_search_output_converts(kind, seed):
    # eps is the smallest value the measured regret certifies
    g = generate_game(3, 2, kind, seed)
    res = moment_search(g, 0.5)
    eps = np.sqrt(4 * g.n * max(res.regret, 1e-12)) * 1.01
    assert eps < 1
    out = ane2wsne(g, res.profile, eps)
    assert verify_well_supported(g, out, eps)[0]


def test_pad_identity():
    g = generate_game(3, 2, "uniform-random", 0)
    padded = pad_game(g, 3)
    assert padded.game == g and padded.shift == 0


def test_pad_tables():
    g = generate_game(2, 2, "uniform-random", 9)
    padded = pad_game(g, 4)
    assert padded.phi((3, 0)) == (1, 0)
    for r, x in enumerate(partitions.enumerate_partitions(3, 2)):
        for i in range(2):
            for a in range(2):
                want = g.payoff(i, a, padded.phi(x)) if x[0] >= 2 else 0.0
                assert padded.game.payoffs[i, a, r] == want
    dummy = padded.game.payoffs[2:]
    assert np.all(dummy[:, 0] == 1) and np.all(dummy[:, 1] == 0)
    prof = np.vstack([np.full((2, 2), 0.5), pure_profile([0, 0], 2)])
    assert regret(padded.game, prof, 3) == 0.0


def test_padding_preserves_payoffs_of_real_players():
    g = generate_game(2, 3, "uniform-random", 1)
    padded = pad_game(g, 5)
    rng = np.random.default_rng(0)
    real = rng.dirichlet(np.ones(3), size=2)
    full = np.vstack([real, pure_profile([0, 0, 0], 3)])
    for i in range(2):
        assert np.allclose(expected_payoffs(padded.game, i, others(full, i)), expected_payoffs(g, i, others(real, i)))


def test_unpad_identity_and_dummy_check():
    g = generate_game(2, 2, "dominant", 0)
    prof = pure_profile([0, 0], 2)
    assert np.array_equal(unpad_profile(pad_game(g, 2), prof, 0.1), prof)
    padded = pad_game(generate_game(2, 2, "constant", 0), 3)
    with pytest.raises(PreconditionError):
        unpad_profile(padded, [[0.5, 0.5], [0.5, 0.5], [0.9, 0.1]], 0.5)


def test_padded_dominant_round_trip():
    g = generate_game(2, 2, "dominant", 0)
    padded = pad_game(g, 4)
    prof = grid_profile_search(padded.game, 0.5, 0.0, well_supported=True)
    assert unpad_profile(padded, prof, 0.0).tolist() == [[1.0, 0.0], [1.0, 0.0]]


@pytest.mark.parametrize("seed", range(10))
def test_seeded_round_trip(seed):
    g = generate_game(2, 2, "uniform-random", seed)
    padded = pad_game(g, 3)
    prof = refining_grid_search(padded.game, 0.2, well_supported=True)
    out = unpad_profile(padded, prof, 0.2)
    assert verify_well_supported(g, out, 0.2)[0]


def test_pipeline_no_padding_branch():
    g = generate_game(4, 2, "dominant", 0)
    calls = []

    def solver(game, target):
        calls.append(game.n)
        return oracle_solver(game, target)

    out = fptas_pipeline(g, 0.5, solver, 1.0)
    assert calls == [4]
    assert verify_well_supported(g, out, 0.5)[0]


def test_pipeline_pads_tiny_game():
    g = generate_game(1, 2, "uniform-random", 0)
    calls = []

    def solver(game, target):
        calls.append((game.n, target))
        return oracle_solver(game, target)

    out = fptas_pipeline(g, 0.5, solver, 1.0)
    assert calls == [(2, 0.25 / 8)]
    assert verify_well_supported(g, out, 0.5)[0]


def test_pipeline_resource_cap():
    g = generate_game(2, 2, "constant", 0)
    with pytest.raises(ResourceLimitError, match="n'=1000000"):
        fptas_pipeline(g, 1e-3, oracle_solver, 0.5)
