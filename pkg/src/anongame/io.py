"""Plain-text game and profile files.

Game file::

    anongame v1
    <n> <k>
    one line per (player, strategy): the payoffs in canonical partition order

Profile file::

    profile v1
    <n> <k>
    one line of k probabilities per player
"""

import numpy as np

from . import partitions
from .errors import ParseError
from .game import AnonymousGame

GAME_HEADER = "anongame v1"
PROFILE_HEADER = "profile v1"


def _fmt(x):
    return repr(float(x))


def dumps_game(game):
    lines = [GAME_HEADER, f"{game.n} {game.k}"]
    for i in range(game.n):
        for a in range(game.k):
            lines.append(" ".join(_fmt(v) for v in game.payoffs[i, a]))
    return "\n".join(lines) + "\n"


def dumps_profile(profile):
    profile = np.asarray(profile, dtype=float)
    lines = [PROFILE_HEADER, f"{profile.shape[0]} {profile.shape[1]}"]
    lines += [" ".join(_fmt(v) for v in row) for row in profile]
    return "\n".join(lines) + "\n"


def save_game(game, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_game(game))


def save_profile(profile, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_profile(profile))


def _header(lines, expected):
    if not lines:
        raise ParseError(1, "empty file")
    if lines[0].strip() != expected:
        raise ParseError(1, f"expected header {expected!r}, got {lines[0].strip()!r}")
    if len(lines) < 2:
        raise ParseError(2, "missing '<n> <k>' line (EOF)")
    parts = lines[1].split()
    try:
        n, k = (int(v) for v in parts)
    except ValueError:
        raise ParseError(2, f"expected '<n> <k>', got {lines[1].strip()!r}") from None
    if n < 1 or k < 1:
        raise ParseError(2, "n and k must be positive")
    return n, k


def _row(lines, lineno, width):
    # lineno is 1-based
    if lineno > len(lines):
        raise ParseError(lineno, "unexpected end of file")
    fields = lines[lineno - 1].split()
    if len(fields) != width:
        raise ParseError(lineno, f"expected {width} values, found {len(fields)}")
    try:
        return [float(v) for v in fields]
    except ValueError as exc:
        raise ParseError(lineno, str(exc)) from None


def _trailing(lines, used):
    for extra in range(used, len(lines)):
        if lines[extra].strip():
            raise ParseError(extra + 1, "unexpected trailing content")


def loads_game(text):
    lines = text.splitlines()
    n, k = _header(lines, GAME_HEADER)
    width = partitions.num_partitions(n - 1, k)
    table = np.empty((n, k, width))
    lineno = 3
    for i in range(n):
        for a in range(k):
            row = _row(lines, lineno, width)
            bad = [v for v in row if not 0.0 <= v <= 1.0]
            if bad:
                raise ParseError(lineno, f"payoff {bad[0]!r} outside [0, 1]")
            table[i, a] = row
            lineno += 1
    _trailing(lines, lineno - 1)
    return AnonymousGame(n, k, table)


def loads_profile(text):
    lines = text.splitlines()
    n, k = _header(lines, PROFILE_HEADER)
    rows = []
    for i in range(n):
        lineno = 3 + i
        row = _row(lines, lineno, k)
        if min(row) < 0 or abs(sum(row) - 1) > 1e-9:
            raise ParseError(lineno, "not a probability vector")
        total = sum(row)
        # rows already summing to 1 within rounding are kept bit-exact
        rows.append(np.array(row) if abs(total - 1) <= 1e-12 else np.array(row) / total)
    _trailing(lines, 2 + n)
    return np.array(rows)


def load_game(path):
    with open(path, encoding="utf-8") as fh:
        return loads_game(fh.read())


def load_profile(path):
    with open(path, encoding="utf-8") as fh:
        return loads_profile(fh.read())

