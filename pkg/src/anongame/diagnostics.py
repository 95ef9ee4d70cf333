"""Numerical checks of the structural facts the solvers rely on.

Each function returns plain rows (dicts) so the CLI can tabulate and plot
them and the tests can assert on them.
"""

import numpy as np

from .game import expected_payoffs, generate_game, player_regret
from .moment_search import GridSpec, strategy_grid
from .pmd import (
    component_decomposition,
    covariance,
    data_matrix,
    data_unit,
    default_moment_degree,
    discretized_gaussian_pmf,
    fourier_at,
    fourier_of_pmf,
    min_orthogonal_eigenvalue,
    moment_indices,
    parameter_moment,
    pmd_pmf,
    tv_distance,
)
from .smoothing import (
    build_perturbed_game,
    crv_direction_variance,
    default_delta,
    empirical_lipschitz,
    perturbed_crv,
    perturbed_outcome_pmf,
)


def _floored_crvs(rng, m, k, floor):
    return floor + (1 - k * floor) * rng.dirichlet(np.ones(k), size=m)


def representative_pairs(n, c=0.5, pairs=20, seed=0):
    """Pairs of grid PMDs with equal data: exact TV and largest moment gap.

    ``X`` draws each CRV uniformly from the grid; ``Y`` swaps each CRV for a
    random grid CRV with the same data vector, so ``D(X) = D(Y)``.
    """
    rng = np.random.default_rng(seed)
    k = 2
    spec = GridSpec.for_game(n, k, c=c)
    grid = strategy_grid(spec)
    L = default_moment_degree(c)
    idx = moment_indices(k, L)
    unit = data_unit(n, c)
    data = data_matrix(grid, idx, unit)
    _, group, counts = np.unique(data, axis=0, return_inverse=True, return_counts=True)
    group = group.ravel()
    order = np.argsort(group, kind="stable")
    starts = np.concatenate([[0], np.cumsum(counts)])
    rows = []
    for p in range(pairs):
        xi = rng.integers(len(grid), size=n)
        g = group[xi]
        yi = order[starts[g] + rng.integers(counts[g])]
        x, y = grid[xi], grid[yi]
        if not np.array_equal(data[xi].sum(0), data[yi].sum(0)):
            raise AssertionError("paired PMDs have different data")
        gx, gy = component_decomposition(x), component_decomposition(y)
        gap = max(abs(parameter_moment(gx[t], m) - parameter_moment(gy[t], m)) for t, m in idx)
        rows.append({
            "n": n,
            "pair": p,
            "tv": tv_distance(pmd_pmf(x), pmd_pmf(y)),
            "moment_gap": gap,
            "eps": n ** (-c),
            "changed": int(np.sum(xi != yi)),
        })
    return rows


def eigenvalue_sweep(ns=(10, 50), ks=(2, 3), epss=(0.05, 0.2), seeds=100, seed=0):
    """Slack of ``lambda_min(Sigma restricted to 1-perp) - n eps / (k - 1)``."""
    rng = np.random.default_rng(seed)
    rows = []
    for n in ns:
        for k in ks:
            for eps in epss:
                slack = []
                for _ in range(seeds):
                    crvs = _floored_crvs(rng, n, k, eps / (k - 1))
                    lam = min_orthogonal_eigenvalue(covariance(crvs))
                    slack.append(lam - n * eps / (k - 1))
                rows.append({"n": n, "k": k, "eps": eps, "min_slack": float(min(slack))})
    return rows


def _unit_orthogonal(rng, k):
    while True:
        v = rng.normal(size=k)
        v -= v.mean()
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            return v / norm


def variance_sweep(samples=1000, max_k=5, max_delta=0.5, seed=0):
    """Variance of ``v . X`` for perturbed CRVs against the ``delta / (k - 1)`` floor."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(samples):
        k = int(rng.integers(2, max_k + 1))
        delta = float(rng.uniform(0, max_delta))
        j = int(rng.integers(k))
        var = crv_direction_variance(j, delta, k, _unit_orthogonal(rng, k))
        rows.append({"k": k, "delta": delta, "j": j, "var": var, "slack": var - delta / (k - 1)})
    return rows


def fourier_checks(pmds=20, points=100, seed=0):
    """Worst deviations of the Fourier product formula from the DFT of the pmf."""
    rng = np.random.default_rng(seed)
    rows = []
    for p in range(pmds):
        k = int(rng.integers(2, 4))
        m = int(rng.integers(1, 9))
        crvs = rng.dirichlet(np.ones(k), size=m)
        dist = pmd_pmf(crvs)
        zero = abs(fourier_at(crvs, np.zeros(k)) - 1)
        worst_abs, worst_diff = 0.0, 0.0
        for xi in rng.uniform(0, 1, size=(points, k)):
            val = fourier_at(crvs, xi)
            worst_abs = max(worst_abs, abs(val))
            worst_diff = max(worst_diff, abs(val - fourier_of_pmf(dist, xi)))
        rows.append({"pmd": p, "k": k, "m": m, "zero_err": zero, "max_abs": worst_abs, "max_diff": worst_diff})
    return rows


def transfer_checks(pairs=50, n=5, k=3, seed=0):
    """Regret of a fixed strategy against two nearby opponent distributions.

    The regret against ``X`` is the premise ``delta``; the exact TV between
    the two opponent PMDs is ``eps``; the regret against ``Y`` must stay
    within ``delta + 2 eps``.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for p in range(pairs):
        game = generate_game(n, k, "uniform-random", int(rng.integers(2**31)))
        x = rng.dirichlet(np.ones(k), size=n - 1)
        scale = rng.choice([0.005, 0.02, 0.1])
        y = np.clip(x + rng.normal(scale=scale, size=x.shape), 1e-3, None)
        y /= y.sum(1, keepdims=True)
        s = rng.dirichlet(np.ones(k) * 0.5)
        delta = player_regret(expected_payoffs(game, 0, x), s)
        eps = tv_distance(pmd_pmf(x), pmd_pmf(y))
        after = player_regret(expected_payoffs(game, 0, y), s)
        rows.append({"pair": p, "delta": delta, "eps": eps, "regret_y": after, "bound": delta + 2 * eps})
    return rows


def gaussian_tv(ns=(20, 50, 100), k=3, delta=0.2):
    """TV between the perturbed outcome of a balanced partition and its discretized Gaussian.

    Both are compared on the first ``k - 1`` coordinates, which determine the
    last one.
    """
    rows = []
    for n in ns:
        x = np.full(k, n // k)
        x[: n - x.sum()] += 1
        dist = perturbed_outcome_pmf(x, delta)
        crvs = np.array([perturbed_crv(j, delta, k) for j in range(k) for _ in range(x[j])])
        mean = crvs.sum(0)[:-1]
        sigma = covariance(crvs).sigma[:-1, :-1]
        box = [(0, n)] * (k - 1)
        table, outside = discretized_gaussian_pmf(mean, sigma, box)
        proj = dist.projection()
        tv = 0.5 * (np.abs(proj - table).sum() + outside)
        rows.append({"n": n, "k": k, "delta": delta, "tv": float(tv)})
    return rows


def lipschitz_trend(ns=(10, 20, 40), k=2, seed=0, delta=None):
    """Measured Lipschitz constant of the perturbed game as ``n`` grows."""
    rows = []
    for n in ns:
        d = default_delta(n, k) if delta is None else delta
        pg = build_perturbed_game(generate_game(n, k, "uniform-random", seed), d)
        rows.append({"n": n, "k": k, "delta": d, "lipschitz": empirical_lipschitz(pg)})
    return rows
