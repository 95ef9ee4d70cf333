"""Anonymous games: payoff tables, expected payoffs, regret and verification.

Strategies are 0-based throughout.  ``payoffs[i, a, r]`` is player ``i``'s
payoff for strategy ``a`` when the other ``n - 1`` players form the partition
of canonical rank ``r``.  Profiles are ``(n, k)`` arrays, one mixed strategy
per row.
"""

from dataclasses import dataclass, field

import numpy as np

from . import partitions
from .errors import InvalidArgument
from .pmd import PROB_ATOL, as_crvs, pmd_pmf

VERIFY_ATOL = 1e-9
GAME_KINDS = ("uniform-random", "congestion", "dominant", "constant")


@dataclass(frozen=True, eq=False)
class AnonymousGame:
    n: int
    k: int
    payoffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise InvalidArgument("need n >= 1 and k >= 1")
        table = np.array(self.payoffs, dtype=float)
        shape = (self.n, self.k, partitions.num_partitions(self.n - 1, self.k))
        if table.shape != shape:
            raise InvalidArgument(f"payoff table has shape {table.shape}, expected {shape}")
        if not np.all(np.isfinite(table)) or table.min() < 0 or table.max() > 1:
            raise InvalidArgument("payoffs must lie in [0, 1]")
        table.setflags(write=False)
        object.__setattr__(self, "payoffs", table)

    @property
    def num_cells(self):
        return self.payoffs.size

    def payoff(self, i, a, x):
        """Payoff of player ``i`` on strategy ``a`` facing partition ``x``."""
        return float(self.payoffs[i, a, partitions.rank(x)])

    def __eq__(self, other):
        if not isinstance(other, AnonymousGame):
            return NotImplemented
        return (self.n, self.k) == (other.n, other.k) and np.array_equal(
            self.payoffs, other.payoffs
        )

    __hash__ = None


def as_profile(profile, n, k):
    """Validate and return a profile as an ``(n, k)`` float array."""
    arr = as_crvs(profile, k) if len(profile) else np.zeros((0, k))
    if arr.shape != (n, k):
        raise InvalidArgument(f"profile has shape {arr.shape}, expected {(n, k)}")
    return arr


def others(profile, i):
    """Rows of ``profile`` for every player except ``i``."""
    return np.delete(np.asarray(profile, dtype=float), i, axis=0)


def expected_payoffs(game, i, others_profile):
    """Vector over strategies of ``E[u^i_a(X_-i)]`` against the other players."""
    dist = pmd_pmf(as_crvs(others_profile, game.k) if len(others_profile) else [], k=game.k)
    if dist.m != game.n - 1:
        raise InvalidArgument(f"expected {game.n - 1} opponents, got {dist.m}")
    return game.payoffs[i] @ dist.mass


def expected_payoff(game, i, a, others_profile):
    return float(expected_payoffs(game, i, others_profile)[a])


def player_regret(payoff_vector, strategy):
    """Best deviation value minus the value of ``strategy`` (clipped at 0)."""
    v = np.asarray(payoff_vector, dtype=float)
    return max(0.0, float(v.max() - np.asarray(strategy, dtype=float) @ v))


def regret(game, profile, i):
    profile = as_profile(profile, game.n, game.k)
    return player_regret(expected_payoffs(game, i, others(profile, i)), profile[i])


def regrets(game, profile):
    profile = as_profile(profile, game.n, game.k)
    return np.array(
        [player_regret(expected_payoffs(game, i, others(profile, i)), profile[i])
         for i in range(game.n)]
    )


def max_regret(game, profile):
    return float(regrets(game, profile).max())


def is_approximate_equilibrium(game, profile, eps, atol=VERIFY_ATOL):
    return max_regret(game, profile) <= eps + atol


@dataclass(frozen=True)
class Violation:
    player: int
    strategy: int
    probability: float
    shortfall: float  # how far below the best response value


def verify_well_supported(game, profile, eps, atol=VERIFY_ATOL):
    """Check every played strategy is an ``eps``-best response.

    Returns ``(ok, violations)``.
    """
    if eps < 0:
        raise InvalidArgument("eps must be nonnegative")
    profile = as_profile(profile, game.n, game.k)
    bad = []
    for i in range(game.n):
        v = expected_payoffs(game, i, others(profile, i))
        best = v.max()
        for a in np.flatnonzero(profile[i] > 0):
            if v[a] < best - eps - atol:
                bad.append(Violation(i, int(a), float(profile[i, a]), float(best - v[a])))
    return not bad, bad


def generate_game(n, k, kind="uniform-random", seed=0):
    """Deterministic test games.

    ``congestion`` sets ``u^i_a(x) = 1 - (x_a + 1) / n``; ``dominant`` pays 1 on
    strategy 0 and 0 elsewhere; ``constant`` pays 0.5 everywhere.
    """
    if n < 1 or k < 1:
        raise InvalidArgument("need n >= 1 and k >= 1")
    size = partitions.num_partitions(n - 1, k)
    if kind == "uniform-random":
        table = np.random.default_rng(seed).random((n, k, size))
    elif kind == "congestion":
        parts = partitions.partition_array(n - 1, k)
        per_a = 1.0 - (parts.T + 1) / n
        table = np.broadcast_to(per_a, (n, k, size)).copy()
    elif kind == "dominant":
        table = np.zeros((n, k, size))
        table[:, 0, :] = 1.0
    elif kind == "constant":
        table = np.full((n, k, size), 0.5)
    else:
        raise InvalidArgument(f"unknown game kind {kind!r}; choose from {GAME_KINDS}")
    return AnonymousGame(n, k, table)


def pure_profile(assignment, k):
    """One-hot profile from a list of strategy indices."""
    assignment = np.asarray(assignment, dtype=int)
    out = np.zeros((len(assignment), k))
    out[np.arange(len(assignment)), assignment] = 1.0
    return out


def check_strategy(probs, k=None):
    """Validate a single mixed strategy (non-negative, sums to 1 within 1e-12)."""
    p = np.asarray(probs, dtype=float).ravel()
    if k is not None and len(p) != k:
        raise InvalidArgument(f"strategy has {len(p)} entries, expected {k}")
    if np.any(p < 0) or abs(p.sum() - 1) > PROB_ATOL:
        raise InvalidArgument(f"not a probability vector: {p}")
    return p
