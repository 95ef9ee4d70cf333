"""Conversions between equilibrium notions and the dummy-player padding.

``ane2wsne`` moves the mass a player puts on poor strategies onto a best
response, turning a sufficiently good approximate equilibrium into a
well-supported one.  ``pad_game`` adds players who always want strategy 0 and
shifts the real players' payoffs so those dummies are invisible to them.
"""

from dataclasses import dataclass, field
from math import ceil

import numpy as np

from . import partitions
from .errors import InternalConsistencyError, InvalidArgument, PreconditionError, ResourceLimitError
from .game import (
    AnonymousGame,
    VERIFY_ATOL,
    as_profile,
    expected_payoffs,
    others,
    player_regret,
    verify_well_supported,
)

MAX_PADDED_PLAYERS = 10_000


def ane2wsne(game, profile, eps, atol=VERIFY_ATOL):
    """Turn an ``eps^2 / 4n``-approximate equilibrium into an ``eps``-well-supported one.

    Raises :class:`PreconditionError` when the input is not approximate enough.
    """
    if eps <= 0:
        raise InvalidArgument("eps must be positive")
    profile = as_profile(profile, game.n, game.k)
    budget = eps * eps / (4 * game.n)
    values = [expected_payoffs(game, i, others(profile, i)) for i in range(game.n)]
    for i, v in enumerate(values):
        r = player_regret(v, profile[i])
        if r > budget + atol:
            raise PreconditionError(
                f"player {i} has regret {r:.3g} > eps^2/4n = {budget:.3g}"
            )
    out = profile.copy()
    for i, v in enumerate(values):
        bad = v < v.max() - eps / 2
        moved = out[i, bad].sum()
        # regret >= moved * eps/2, so moved <= eps/2n up to the tolerance slack
        if moved > eps / (2 * game.n) + 2 * atol / eps + 1e-12:
            raise InternalConsistencyError(f"player {i} had {moved} mass on bad strategies")
        out[i, bad] = 0.0
        best = int(np.argmax(v))
        out[i, best] = 0.0
        out[i, best] = 1.0 - out[i].sum()
    ok, violations = verify_well_supported(game, out, eps)
    if not ok:
        raise InternalConsistencyError(f"converted profile is not well supported: {violations[:3]}")
    return out


@dataclass(frozen=True, eq=False)
class PaddedGame:
    game: AnonymousGame = field(repr=False)
    original_n: int

    @property
    def n_prime(self):
        return self.game.n

    @property
    def shift(self):
        """Number of dummies, subtracted from coordinate 0 by the shift map."""
        return self.game.n - self.original_n

    def phi(self, x):
        return (x[0] - self.shift,) + tuple(x[1:])


def pad_game(game, n_prime):
    """Add ``n_prime - n`` dummy players who always prefer strategy 0."""
    n, k = game.n, game.k
    if n_prime < n:
        raise InvalidArgument(f"n_prime={n_prime} is smaller than n={n}")
    extra = n_prime - n
    parts = partitions.partition_array(n_prime - 1, k)
    table = np.zeros((n_prime, k, len(parts)))
    visible = parts[:, 0] >= extra
    shifted = parts[visible].copy()
    shifted[:, 0] -= extra
    src = [partitions.rank(x) for x in shifted]
    table[:n][:, :, visible] = game.payoffs[:, :, src]
    table[n:, 0, :] = 1.0
    return PaddedGame(AnonymousGame(n_prime, k, table), n)


def unpad_profile(padded, profile, eps):
    """Drop the dummies from an ``eps``-well-supported profile of the padded game."""
    g = padded.game
    profile = as_profile(profile, g.n, g.k)
    ok, violations = verify_well_supported(g, profile, eps)
    if not ok:
        raise PreconditionError(f"profile is not {eps}-well-supported in the padded game")
    dummies = profile[padded.original_n:]
    if len(dummies) and np.any(dummies[:, 1:] > 0):
        raise PreconditionError("a dummy player is not pure on strategy 0")
    return profile[: padded.original_n].copy()


def fptas_pipeline(game, eps, base_solver, gamma, max_players=MAX_PADDED_PLAYERS):
    """Compute an ``eps``-well-supported equilibrium from a polynomial-precision solver.

    ``base_solver(game, target)`` must return a profile with regret at most
    ``target``.  When ``n^-gamma > eps`` the game is first padded to
    ``n' = ceil((1/eps)^(1/gamma))`` players.
    """
    if not 0 < eps < 1:
        raise InvalidArgument("eps must lie in (0, 1)")
    if gamma <= 0:
        raise InvalidArgument("gamma must be positive")
    n = game.n
    if n ** (-gamma) <= eps:
        approx = base_solver(game, eps * eps / (4 * n))
        result = ane2wsne(game, approx, eps)
    else:
        n_prime = max(n, ceil((1 / eps) ** (1 / gamma) - 1e-9))
        if n_prime > max_players:
            raise ResourceLimitError(f"padding needs n'={n_prime} players (cap {max_players})")
        padded = pad_game(game, n_prime)
        approx = base_solver(padded.game, eps * eps / (4 * n_prime))
        ws = ane2wsne(padded.game, approx, eps)
        result = unpad_profile(padded, ws, eps)
    ok, violations = verify_well_supported(game, result, eps)
    if not ok:
        raise InternalConsistencyError(f"pipeline output fails verification: {violations[:3]}")
    return result
