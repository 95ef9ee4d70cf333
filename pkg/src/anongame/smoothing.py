"""Simple approximate equilibria via the delta-perturbed game.

Every pure strategy ``j`` of the perturbed game is executed in the original
game as the CRV that plays ``j`` with probability ``1 - delta`` and each other
strategy with probability ``delta / (k - 1)``.  The perturbed game is
Lipschitz, so an approximate pure equilibrium exists; it is found by trying
every opponent count vector and matching players to strategies with a
max-flow, then mapped back to a mixed profile of the original game.
"""

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import partitions
from .errors import InternalConsistencyError, InvalidArgument
from .game import AnonymousGame, VERIFY_ATOL, max_regret, pure_profile
from .pmd import pmd_pmf

log = logging.getLogger(__name__)


def perturbed_crv(j, delta, k):
    """Play ``j`` with probability ``1 - delta``, the rest uniformly."""
    if not 0 <= delta <= 1:
        raise InvalidArgument("delta must lie in [0, 1]")
    if k == 1:
        if delta > 0:
            raise InvalidArgument("cannot perturb a one-strategy game")
        return np.ones(1)
    p = np.full(k, delta / (k - 1))
    p[j] = 1.0 - delta
    return p


def perturb_profile(profile, delta):
    """Image of a mixed profile of the perturbed game in the original game."""
    profile = np.asarray(profile, dtype=float)
    k = profile.shape[1]
    if k == 1:
        return profile.copy()
    return (1 - delta - delta / (k - 1)) * profile + delta / (k - 1)


def perturbed_outcome_pmf(x, delta):
    """Exact pmf of ``sum_j x_j`` copies of the perturbed CRV for ``j``."""
    k = len(x)
    crvs = [perturbed_crv(j, delta, k) for j in range(k) for _ in range(int(x[j]))]
    return pmd_pmf(crvs, k=k)


@dataclass(frozen=True, eq=False)
class PerturbedGame:
    base: AnonymousGame
    delta: float
    payoffs: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.base.n

    @property
    def k(self):
        return self.base.k

    def as_game(self):
        return AnonymousGame(self.n, self.k, np.clip(self.payoffs, 0.0, 1.0))


def build_perturbed_game(game, delta):
    """Payoff tables of the perturbed game.

    For each opponent partition ``x`` the pmf of the perturbed outcome is
    computed once and shared by every ``(i, a)`` cell.
    """
    if not 0 <= delta < 1:
        raise InvalidArgument("delta must lie in [0, 1)")
    n, k = game.n, game.k
    if k == 1 or delta == 0:
        if k == 1 and delta > 0:
            raise InvalidArgument("cannot perturb a one-strategy game")
        return PerturbedGame(game, float(delta), game.payoffs.copy())
    parts = partitions.partition_array(n - 1, k)
    out = np.empty_like(game.payoffs)
    for r, x in enumerate(parts):
        mass = perturbed_outcome_pmf(x, delta).mass
        e = game.payoffs @ mass  # (n, k)
        others_sum = e.sum(axis=1, keepdims=True) - e
        out[:, :, r] = (1 - delta) * e + delta / (k - 1) * others_sum
    out.setflags(write=False)
    return PerturbedGame(game, float(delta), out)


def adjacent_pairs(m, k):
    """Rank pairs of partitions that differ by moving one unit between two parts."""
    lookup = partitions.rank_lookup(m, k)
    left, right = [], []
    for x, r in lookup.items():
        for j in range(k):
            if x[j] == 0:
                continue
            for l in range(k):
                if l == j:
                    continue
                y = list(x)
                y[j] -= 1
                y[l] += 1
                s = lookup[tuple(y)]
                if r < s:
                    left.append(r)
                    right.append(s)
    return np.array(left, dtype=np.int64), np.array(right, dtype=np.int64)


def empirical_lipschitz(pg):
    """Exact Lipschitz constant of the payoff tables w.r.t. the l1 norm.

    Adjacent partitions are at l1 distance 2 and any two partitions are joined
    by a path of adjacent steps, so the maximum adjacent slope is the constant.
    """
    left, right = adjacent_pairs(pg.n - 1, pg.k)
    if len(left) == 0:
        return 0.0
    diff = np.abs(pg.payoffs[:, :, left] - pg.payoffs[:, :, right])
    return float(diff.max()) / 2.0


@dataclass(frozen=True)
class PureProfile:
    assignment: tuple
    induced_partition: tuple


def _saturating_assignment(allowed, capacity):
    """Assign every player to an allowed strategy within capacity, or None.

    Unit-capacity players on one side, strategies with ``capacity[a]`` on the
    other; each player is inserted with a BFS augmenting path that may move
    already-assigned players to other allowed strategies.
    """
    assign = [-1] * len(allowed)
    holders = [[] for _ in capacity]
    for start in range(len(allowed)):
        parent = {start: None}  # player -> (player who displaces it, strategy)
        seen = set()
        queue = deque([start])
        end = None
        while queue and end is None:
            p = queue.popleft()
            for a in allowed[p]:
                if a in seen:
                    continue
                seen.add(a)
                if len(holders[a]) < capacity[a]:
                    end = (p, a)
                    break
                for q in holders[a]:
                    if q not in parent:
                        parent[q] = (p, a)
                        queue.append(q)
        if end is None:
            return None
        p, a = end
        while p is not None:
            if assign[p] >= 0:
                holders[assign[p]].remove(p)
            assign[p] = a
            holders[a].append(p)
            p, a = parent[p] if parent[p] is not None else (None, None)
    return assign


def pure_eq_search(pg, tau):
    """First partition (canonical order) admitting a ``tau``-pure equilibrium.

    Player ``i`` may take strategy ``a`` in partition ``x`` when ``a`` is a
    ``tau``-best response against the others' counts ``x - e_a``.  Returns a
    :class:`PureProfile` or ``None``.
    """
    if tau < 0:
        raise InvalidArgument("tau must be nonnegative")
    n, k = pg.n, pg.k
    table = pg.payoffs
    best = table.max(axis=1)  # (n, P)
    lookup = partitions.rank_lookup(n - 1, k)
    for x in partitions.enumerate_partitions(n, k):
        residual_rank = {}
        for a in range(k):
            if x[a]:
                y = list(x)
                y[a] -= 1
                residual_rank[a] = lookup[tuple(y)]
        allowed = [
            [a for a, r in residual_rank.items()
             if table[i, a, r] >= best[i, r] - tau - VERIFY_ATOL]
            for i in range(n)
        ]
        if any(not opts for opts in allowed):
            continue
        assign = _saturating_assignment(allowed, list(x))
        if assign is None:
            continue
        worst = pure_regret(pg, assign)
        if worst > tau + VERIFY_ATOL:
            raise InternalConsistencyError(
                f"matched profile has pure regret {worst} above tau {tau}"
            )
        return PureProfile(tuple(assign), tuple(x))
    return None


def pure_regret(pg, assignment):
    """Largest gain any player has from a unilateral pure deviation."""
    k = pg.k
    counts = np.bincount(assignment, minlength=k)
    lookup = partitions.rank_lookup(pg.n - 1, k)
    worst = 0.0
    for i, a in enumerate(assignment):
        y = counts.copy()
        y[a] -= 1
        col = pg.payoffs[i, :, lookup[tuple(int(v) for v in y)]]
        worst = max(worst, float(col.max() - col[a]))
    return worst


def default_delta(n, k):
    """``min(0.5, k^(11/3) n^(-1/3))``."""
    return min(0.5, k ** (11 / 3) * n ** (-1 / 3))


@dataclass
class SmoothResult:
    profile: np.ndarray
    pure: PureProfile
    delta: float
    lipschitz: float
    tau: float
    regret: float

    @property
    def bound(self):
        return self.delta + self.tau


def solve_smooth(game, delta=None):
    """Perturb, find a pure equilibrium of the perturbed game, map it back.

    The emitted profile's regret in ``game`` is recomputed independently and
    must not exceed ``delta + 2 k lambda``.
    """
    if game.k == 1:
        profile = np.ones((game.n, 1))
        return SmoothResult(profile, PureProfile((0,) * game.n, (game.n,)), 0.0, 0.0, 0.0, 0.0)
    delta = default_delta(game.n, game.k) if delta is None else float(delta)
    pg = build_perturbed_game(game, delta)
    lam = empirical_lipschitz(pg)
    tau = 2 * game.k * lam
    pure = pure_eq_search(pg, tau)
    if pure is None:
        raise InternalConsistencyError(
            f"no {tau}-approximate pure equilibrium found although the game is {lam}-Lipschitz"
        )
    profile = perturb_profile(pure_profile(pure.assignment, game.k), delta)
    reg = max_regret(game, profile)
    if reg > delta + tau + VERIFY_ATOL:
        raise InternalConsistencyError(f"regret {reg} exceeds delta + 2k*lambda = {delta + tau}")
    log.debug("smooth: delta=%g lambda=%g regret=%g", delta, lam, reg)
    return SmoothResult(profile, pure, delta, lam, tau, reg)


def crv_direction_variance(j, delta, k, v):
    """Exact variance of ``v . X`` for the perturbed CRV on ``j``.

    ``v`` must be a unit vector orthogonal to the all-ones vector.
    """
    v = np.asarray(v, dtype=float)
    if len(v) != k or abs(v.sum()) > 1e-9 or abs(np.linalg.norm(v) - 1) > 1e-9:
        raise InvalidArgument("v must be a unit vector orthogonal to (1, ..., 1)")
    p = perturbed_crv(j, delta, k)
    return float(p @ v**2 - (p @ v) ** 2)
