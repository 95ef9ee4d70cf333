"""Exact Poisson multinomial distribution (PMD) machinery.

A k-CRV is a random basis vector of R^k with probabilities ``p``; a PMD of
order ``m`` is the sum of ``m`` independent k-CRVs and lives on the partition
lattice of ``m`` into ``k`` parts.  Mixed strategies and k-CRVs are the same
object here: a length-k probability vector.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import floor

import numpy as np
from scipy.signal import fftconvolve

from . import partitions
from .errors import InvalidArgument

PROB_ATOL = 1e-12
MASS_ATOL = 1e-9


def as_crvs(crvs, k=None):
    """Coerce a collection of k-CRVs into a float array of shape ``(m, k)``."""
    if isinstance(crvs, np.ndarray) and crvs.ndim == 2:
        arr = np.asarray(crvs, dtype=float)
    else:
        rows = [np.asarray(c, dtype=float).ravel() for c in crvs]
        if not rows:
            if k is None:
                raise InvalidArgument("empty CRV collection needs an explicit k")
            return np.zeros((0, k))
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise InvalidArgument(f"CRVs of mixed dimensions {sorted(widths)}")
        arr = np.stack(rows)
    if k is not None and arr.shape[1] != k:
        raise InvalidArgument(f"expected {k}-CRVs, got width {arr.shape[1]}")
    if arr.shape[1] < 1:
        raise InvalidArgument("CRVs need at least one outcome")
    if np.any(arr < -PROB_ATOL) or np.any(np.abs(arr.sum(axis=1) - 1) > PROB_ATOL):
        raise InvalidArgument("each CRV must be a probability vector")
    return arr


@dataclass(frozen=True)
class LatticeDistribution:
    """Dense pmf over the partitions of ``m`` into ``k`` parts (canonical order)."""

    m: int
    k: int
    mass: np.ndarray = field(repr=False)

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if mass.shape != (partitions.num_partitions(self.m, self.k),):
            raise InvalidArgument("mass length does not match the lattice size")
        if np.any(mass < -1e-15):
            raise InvalidArgument("negative mass")
        if abs(mass.sum() - 1.0) > MASS_ATOL:
            raise InvalidArgument(f"mass sums to {mass.sum()!r}, not 1")
        mass = np.clip(mass, 0.0, None)
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @property
    def support(self):
        return partitions.partition_array(self.m, self.k)

    def prob(self, x):
        return float(self.mass[partitions.rank(x)])

    def projection(self):
        """Pmf of the first ``k - 1`` coordinates as a dense ``(m+1)^(k-1)`` cube."""
        if self.k == 1:
            return np.ones(())
        cube = np.zeros((self.m + 1) ** (self.k - 1))
        cube[partitions._simplex_flat_index(self.m, self.k)] = self.mass
        return cube.reshape((self.m + 1,) * (self.k - 1))

    def mean(self):
        return self.mass @ self.support

    def as_dict(self):
        return {tuple(int(v) for v in x): float(p) for x, p in zip(self.support, self.mass)}


FFT_MIN_VOLUME = 1_000_000


def _pmf_cube(probs):
    """Fold CRVs one at a time into a dense cube over the first k-1 coordinates."""
    m, k = probs.shape
    if k == 1:
        return np.ones(())
    if (m + 1) ** (k - 1) > FFT_MIN_VOLUME:
        return _pmf_cube_fft(probs)
    cube = np.ones((1,) * (k - 1))
    for t, p in enumerate(probs):
        new = np.zeros((t + 2,) * (k - 1))
        old = (slice(0, t + 1),) * (k - 1)
        new[old] += p[-1] * cube
        for j in range(k - 1):
            idx = list(old)
            idx[j] = slice(1, t + 2)
            new[tuple(idx)] += p[j] * cube
        cube = new
    return cube


def _pmf_cube_fft(probs):
    # balanced product tree; absolute error ~1e-16, only used for huge lattices
    m, k = probs.shape
    cubes = []
    for p in probs:
        c = np.zeros((2,) * (k - 1))
        c[(0,) * (k - 1)] = p[-1]
        for j in range(k - 1):
            idx = [0] * (k - 1)
            idx[j] = 1
            c[tuple(idx)] = p[j]
        cubes.append(c)
    while len(cubes) > 1:
        paired = [fftconvolve(a, b) for a, b in zip(cubes[::2], cubes[1::2])]
        if len(cubes) % 2:
            paired.append(cubes[-1])
        cubes = paired
    return np.clip(cubes[0], 0.0, None)


def pmd_pmf(crvs, k=None):
    """Exact pmf of the sum of independent k-CRVs.

    Starts from the point mass at the zero partition and convolves in one CRV
    at a time.  Pass ``k`` when ``crvs`` may be empty.
    """
    probs = as_crvs(crvs, k)
    m, k = probs.shape
    cube = _pmf_cube(probs)
    mass = cube.ravel()[partitions._simplex_flat_index(m, k)]
    return LatticeDistribution(m, k, mass)


def tv_distance(p, q):
    """Total variation distance: half the l1 distance between two pmfs."""
    if (p.m, p.k) != (q.m, q.k):
        raise InvalidArgument(f"shape mismatch: ({p.m},{p.k}) vs ({q.m},{q.k})")
    return 0.5 * float(np.abs(p.mass - q.mass).sum())


def parameter_moment(crvs, m):
    """``sum_i prod_j p_ij ** m_j`` over the CRVs; zero for an empty collection."""
    m = np.asarray(m, dtype=int)
    probs = np.asarray(crvs, dtype=float).reshape(-1, len(m))
    if np.any(m < 0):
        raise InvalidArgument("moment exponents must be nonnegative")
    return float(np.prod(probs ** m, axis=1).sum())


def maximal_index(crv):
    """Most likely outcome, smallest index on ties (0-based)."""
    return int(np.argmax(np.asarray(crv, dtype=float)))


def component_decomposition(crvs):
    """Split CRVs into ``k`` groups by maximal index, preserving order."""
    probs = np.asarray(crvs, dtype=float)
    k = probs.shape[1]
    groups = [[] for _ in range(k)]
    for p in probs:
        groups[maximal_index(p)].append(p)
    return [np.array(g).reshape(-1, k) for g in groups]


def default_moment_degree(c):
    """Largest degree searched for exponent ``c``: floor((2 + 2c) / (1 - c))."""
    if not 0 < c < 1:
        raise InvalidArgument("c must lie in (0, 1)")
    return int(floor((2 + 2 * c) / (1 - c) + 1e-12))


@lru_cache(maxsize=64)
def moment_indices(k, L):
    """Canonical ``(t, m)`` list: t ascending, then m lexicographic.

    Only indices with ``m[t] == 0`` and degree between 1 and ``L`` are kept.
    """
    if L < 1:
        raise InvalidArgument("moment degree L must be at least 1")
    all_m = sorted(
        m for d in range(1, L + 1) for m in partitions.enumerate_partitions(d, k)
    )
    return tuple((t, m) for t in range(k) for m in all_m if m[t] == 0)


@dataclass(frozen=True)
class DataVector:
    """Quantized low-degree moments; entry ``e`` stands for the value ``e * unit``."""

    c: float
    L: int
    unit: float
    entries: tuple

    def __add__(self, other):
        if (self.L, self.unit, len(self.entries)) != (other.L, other.unit, len(other.entries)):
            raise InvalidArgument("cannot add data vectors built on different grids")
        return DataVector(
            self.c, self.L, self.unit, tuple(a + b for a, b in zip(self.entries, other.entries))
        )

    def __sub__(self, other):
        if (self.L, self.unit, len(self.entries)) != (other.L, other.unit, len(other.entries)):
            raise InvalidArgument("cannot subtract data vectors built on different grids")
        return DataVector(
            self.c, self.L, self.unit, tuple(a - b for a, b in zip(self.entries, other.entries))
        )

    def as_array(self):
        return np.array(self.entries, dtype=np.int64)


def data_unit(n, c):
    """Grid unit ``n**-c / n`` of the moment quantization."""
    return n ** (-c) / n


def data_matrix(crvs, indices, unit):
    """Integer data of each CRV (rows) over the given moment indices (columns).

    A CRV contributes only to the indices of its own maximal component; each
    moment is rounded half-up to the nearest multiple of ``unit``.
    """
    probs = np.asarray(crvs, dtype=float)
    out = np.zeros((len(probs), len(indices)), dtype=np.int64)
    if len(probs) == 0:
        return out
    owner = np.argmax(probs, axis=1)
    for col, (t, m) in enumerate(indices):
        rows = owner == t
        if not rows.any():
            continue
        vals = np.prod(probs[rows] ** np.asarray(m), axis=1)
        out[rows, col] = np.floor(vals / unit + 0.5).astype(np.int64)
    return out


def data_vector(crv, n, c, L=None, unit=None):
    """Data of a single k-CRV for an ``n``-player instance with exponent ``c``."""
    crv = as_crvs([crv])
    L = default_moment_degree(c) if L is None else L
    unit = data_unit(n, c) if unit is None else unit
    row = data_matrix(crv, moment_indices(crv.shape[1], L), unit)[0]
    return DataVector(c, L, unit, tuple(int(v) for v in row))


def data_vector_sum(vectors):
    """Entrywise integer sum; the data of a PMD is the sum over its CRVs."""
    vectors = list(vectors)
    if not vectors:
        raise InvalidArgument("need at least one data vector")
    total = vectors[0]
    for v in vectors[1:]:
        total = total + v
    return total


# -- covariance ----------------------------------------------------------------


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues ascending, eigenvectors as columns)``.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgument("need a square matrix")
    if not np.allclose(a, a.T, atol=1e-12):
        raise InvalidArgument("matrix is not symmetric")
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.abs(a).max(), 1.0)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1))
                if theta == 0:
                    t = 1.0
                cs = 1 / np.sqrt(t * t + 1)
                sn = t * cs
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = cs
                rot[p, q] = sn
                rot[q, p] = -sn
                a = rot.T @ a @ rot
                v = v @ rot
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


@dataclass(frozen=True)
class CovarianceSummary:
    sigma: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def covariance(crvs):
    """Covariance ``sum_i diag(p_i) - p_i p_i^T`` of the PMD and its spectrum."""
    probs = as_crvs(crvs)
    sigma = np.diag(probs.sum(axis=0)) - probs.T @ probs
    sigma = 0.5 * (sigma + sigma.T)
    w, v = jacobi_eigh(sigma)
    return CovarianceSummary(sigma, w, v)


def min_orthogonal_eigenvalue(summary):
    """Smallest eigenvalue once the eigenvector best aligned with ``1`` is dropped."""
    k = summary.sigma.shape[0]
    if k < 2:
        raise InvalidArgument("need k >= 2")
    ones = np.ones(k) / np.sqrt(k)
    align = np.abs(ones @ summary.eigenvectors)
    keep = np.ones(k, dtype=bool)
    keep[int(np.argmax(align))] = False
    return float(summary.eigenvalues[keep].min())


# -- Fourier -------------------------------------------------------------------


def fourier_at(crvs, xi):
    """``prod_i sum_j e(xi_j) p_ij`` with ``e(x) = exp(-2 pi i x)``."""
    probs = np.asarray(crvs, dtype=float)
    phase = np.exp(-2j * np.pi * np.asarray(xi, dtype=float))
    if len(probs) == 0:
        return complex(1.0)
    return complex(np.prod(probs @ phase))


def fourier_of_pmf(dist, xi):
    """Direct transform ``sum_x e(xi . x) pmf(x)`` of a lattice distribution."""
    phase = np.exp(-2j * np.pi * (dist.support @ np.asarray(xi, dtype=float)))
    return complex(phase @ dist.mass)


# -- discretized Gaussian ------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def discretized_gaussian_pmf(mu, sigma, box):
    """Gaussian mass of each unit cube centred on the integer points of ``box``.

    ``box`` is a sequence of ``(lo, hi)`` integer pairs, one per axis.  Each
    cube is integrated with an 8-point Gauss-Legendre rule per axis.  Returns
    ``(table, truncated_mass)`` where ``table`` has one axis per box dimension
    and ``truncated_mass`` is the Gaussian mass falling outside the box.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    d = len(mu)
    if sigma.shape != (d, d) or len(box) != d:
        raise InvalidArgument("mu, sigma and box dimensions disagree")
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise InvalidArgument("sigma is not positive definite") from None
    prec = np.linalg.inv(sigma)
    norm = 1.0 / np.sqrt((2 * np.pi) ** d) / np.prod(np.diag(chol))

    axes = [np.arange(lo, hi + 1) for lo, hi in box]
    # quadrature offsets inside one cube
    offs = np.stack(np.meshgrid(*([_GL_NODES / 2] * d), indexing="ij"), axis=-1).reshape(-1, d)
    wts = np.prod(
        np.stack(np.meshgrid(*([_GL_WEIGHTS / 2] * d), indexing="ij"), axis=-1).reshape(-1, d),
        axis=1,
    )
    centres = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    table = np.empty(len(centres))
    chunk = max(1, 200_000 // len(offs))
    for s in range(0, len(centres), chunk):
        pts = centres[s : s + chunk, None, :] + offs[None, :, :] - mu
        q = np.einsum("cqi,ij,cqj->cq", pts, prec, pts)
        table[s : s + chunk] = norm * (np.exp(-0.5 * q) @ wts)
    table = table.reshape([len(a) for a in axes])
    return table, max(0.0, 1.0 - float(table.sum()))
