import numpy as np
import pytest

from anongame.errors import ParseError
from anongame.game import generate_game
from anongame.io import dumps_game, dumps_profile, load_game, load_profile, loads_game, loads_profile, save_game, save_profile


@pytest.mark.parametrize("kind", ["uniform-random", "congestion", "dominant", "constant"])
def test_game_round_trip(kind, tmp_path):
    g = generate_game(4, 3, kind, seed=3)
    path = tmp_path / "g.game"
    save_game(g, path)
    assert load_game(path) == g


def test_game_text_layout():
    g = generate_game(2, 2, "constant", 0)
    assert dumps_game(g).splitlines() == ["anongame v1", "2 2", "0.5 0.5", "0.5 0.5", "0.5 0.5", "0.5 0.5"]


def test_profile_round_trip(tmp_path):
    prof = np.random.default_rng(0).dirichlet(np.ones(3), size=5)
    save_profile(prof, tmp_path / "p.txt")
    assert np.array_equal(load_profile(tmp_path / "p.txt"), prof)
    assert dumps_profile(prof).splitlines()[:2] == ["profile v1", "5 3"]


def parse_error(text, loader=loads_game):
    with pytest.raises(ParseError) as info:
        loader(text)
    return info.value


def test_payoff_out_of_range():
    err = parse_error("anongame v1\n2 2\n0.5 0.5\n0.5 1.5\n0.5 0.5\n0.5 0.5\n")
    assert err.line == 4 and "outside" in str(err)


def test_missing_final_line():
    text = dumps_game(generate_game(2, 2, "constant", 0))
    err = parse_error(text.rsplit("\n", 2)[0] + "\n")
    assert err.line == 6 and "end of file" in str(err)


def test_bad_header_and_counts():
    assert parse_error("anongame v2\n1 1\n0.5\n").line == 1
    assert parse_error("anongame v1\n2\n").line == 2
    assert parse_error("anongame v1\n2 2\n0.5\n").line == 3
    assert parse_error("anongame v1\n2 2\n0.5 x\n").line == 3
    assert parse_error("").line == 1
    text = dumps_game(generate_game(2, 2, "constant", 0)) + "0.5\n"
    assert parse_error(text).line == 7


def test_profile_errors():
    assert parse_error("profile v1\n1 2\n0.5 0.6\n", loads_profile).line == 3
    assert parse_error("profile v1\n1 2\n-0.5 1.5\n", loads_profile).line == 3
    assert parse_error("anongame v1\n1 2\n0.5 0.5\n", loads_profile).line == 1
