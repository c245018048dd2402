"""Per-component weight solvers for the dual-norm penalties.

Each solver maps the covariance vector ``z = X_m' y`` of the current deflation
step to a weight vector ``w`` maximising ``z'w`` under ``Omega(w) = 1`` for its
penalty ``Omega``, with the sparsity level fixed through a shrink ratio: the
fraction of coordinates to zero.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateThreshold, EmptyGrid
from .linalg import SPDFactor, gram, norm_l1, norm_l2

GRID_SIZE = 10
GRID_TIE_RTOL = 1e-12
MAX_GRID_POINTS = 10**7


@dataclass(frozen=True)
class ThresholdLog:
    """Threshold bookkeeping of one weight computation.

    ``nu`` is the soft threshold, ``mu`` the Lagrange normaliser and ``lam`` the
    resulting penalty weight, ``lam * mu == nu``. ``lam2`` is only set by the
    ridge solver (weight of the ``||Xw||_2`` term).
    """

    nu: float
    mu: float
    lam: float
    lam2: float | None = None

    def as_dict(self):
        d = {"nu": self.nu, "mu": self.mu, "lambda": self.lam}
        if self.lam2 is not None:
            d["lambda2"] = self.lam2
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(nu=d["nu"], mu=d["mu"], lam=d["lambda"], lam2=d.get("lambda2"))


@dataclass(frozen=True)
class GroupPartition:
    """Assignment of each of the P variables to a group id in ``1..G``."""

    group_of: np.ndarray
    n_groups: int = field(init=False)

    def __post_init__(self):
        g = np.asarray(self.group_of)
        if g.ndim != 1 or g.size == 0 or not np.issubdtype(g.dtype, np.integer):
            raise ValueError("group_of must be a non-empty 1-D integer array")
        ids = np.unique(g)
        if ids[0] != 1 or not np.array_equal(ids, np.arange(1, ids[-1] + 1)):
            raise ValueError("group ids must be contiguous from 1 with no empty group")
        object.__setattr__(self, "group_of", g.astype(np.int64))
        object.__setattr__(self, "n_groups", int(ids[-1]))

    @classmethod
    def contiguous(cls, n_vars, n_groups):
        """Split ``n_vars`` variables into ``n_groups`` contiguous bands of near-equal width."""
        if not 1 <= n_groups <= n_vars:
            raise ValueError(f"need 1 <= n_groups <= n_vars, got {n_groups} and {n_vars}")
        bounds = np.linspace(0, n_vars, n_groups + 1).round().astype(int)
        return cls(np.repeat(np.arange(1, n_groups + 1), np.diff(bounds)))

    def indices(self, g):
        return np.flatnonzero(self.group_of == g)

    def __len__(self):
        return self.group_of.size

    def __eq__(self, other):
        if not isinstance(other, GroupPartition):
            return NotImplemented
        return np.array_equal(self.group_of, other.group_of)

    def __hash__(self):
        return hash(self.group_of.tobytes())


@dataclass(frozen=True)
class CalibrationContext:
    """Current deflated matrix and centered response, used to score grid candidates."""

    X: np.ndarray
    y: np.ndarray


def check_shrink(varsigma):
    v = float(varsigma)
    if not 0.0 <= v < 1.0:
        raise ValueError(f"shrink ratio must lie in [0, 1), got {varsigma}")
    return v


def n_zeroed(n, varsigma):
    """Number of coordinates a shrink ratio asks to zero, ``ceil(varsigma * n)``."""
    # rounding first keeps products like 0.29 * 100 = 28.999999999999996 at 29
    return math.ceil(round(check_shrink(varsigma) * n, 9))


def adaptive_threshold(z_abs, varsigma):
    """Threshold at the ``ceil(varsigma * P)``-th smallest magnitude.

    This is the first abscissa at which the empirical CDF of ``z_abs`` reaches
    ``varsigma``; 0 when no coordinate is to be zeroed.
    """
    a = np.asarray(z_abs, dtype=np.float64).reshape(-1)
    if a.size == 0:
        raise ValueError("empty magnitude vector")
    if np.any(a < 0):
        raise ValueError("magnitudes must be nonnegative")
    if not np.any(a > 0):
        raise DegenerateThreshold("all magnitudes are zero; no direction to recover")
    k = n_zeroed(a.size, varsigma)
    if k == 0:
        return 0.0
    return float(np.partition(a, k - 1)[k - 1])


def soft_threshold(z, nu):
    if nu < 0:
        raise ValueError(f"threshold must be nonnegative, got {nu}")
    z = np.asarray(z, dtype=np.float64)
    return np.sign(z) * np.maximum(np.abs(z) - nu, 0.0)


def _thresholded(v, varsigma, what="z"):
    nu = adaptive_threshold(np.abs(v), varsigma)
    zn = soft_threshold(v, nu)
    if not np.any(zn):
        raise DegenerateThreshold(
            f"shrink ratio {varsigma} zeroes every coordinate of {what} (threshold {nu:.6g})"
        )
    return nu, zn


def lasso_weight(z, varsigma):
    """Pseudo-lasso weight for ``Omega(w) = lam ||w||_1 + ||w||_2``.

    Soft-thresholds ``z`` at the adaptive threshold ``nu`` and rescales so that
    ``Omega(w) = 1`` with ``lam = nu / mu``, ``mu = ||z_nu||_2``.
    """
    z = np.asarray(z, dtype=np.float64)
    nu, zn = _thresholded(z, varsigma)
    mu = norm_l2(zn)
    # divide through by mu so tiny magnitudes do not underflow mu * mu
    w = zn / (nu * (norm_l1(zn) / mu) + mu)
    return w, ThresholdLog(nu=nu, mu=mu, lam=nu / mu)


def lasso_norm(w, lam):
    return lam * norm_l1(w) + norm_l2(w)


def group_norm(w, partition, alphas, lams):
    """``sum_g alpha_g (||w_g||_2 + lam_g ||w_g||_1)``."""
    w = np.asarray(w, dtype=np.float64)
    total = 0.0
    for g in range(1, partition.n_groups + 1):
        a = alphas[g - 1]
        if a == 0.0:
            continue
        wg = w[partition.indices(g)]
        total += a * (norm_l2(wg) + lams[g - 1] * norm_l1(wg))
    return total


def _per_group_shrink(varsigma, n_groups):
    if np.ndim(varsigma) == 0:
        return [check_shrink(varsigma)] * n_groups
    out = [check_shrink(v) for v in varsigma]
    if len(out) != n_groups:
        raise ValueError(f"got {len(out)} shrink ratios for {n_groups} groups")
    return out


def select_grid_point(sse, yy):
    """Index of the first grid point within ``GRID_TIE_RTOL * yy`` of the smallest SSE."""
    best = float(np.min(sse))
    if not np.isfinite(best):
        raise EmptyGrid("every grid combination yields a zero score vector")
    return int(np.argmax(sse <= best + GRID_TIE_RTOL * yy))


def group_lasso_weight(z, partition, varsigma, context, n_grid=GRID_SIZE):
    """Pseudo-group-lasso weight.

    Every group is soft-thresholded with its own adaptive threshold. The group
    magnitudes ``||w_g||_2`` are picked by exhaustive search over ``n_grid``
    equispaced values in ``[0, ||w_g||_2^max]`` per group, keeping the
    combination whose one-score regression of ``context.y`` on
    ``context.X @ w`` has the smallest residual sum of squares. The winner is
    rescaled to unit group norm.

    Returns
    -------
    w : ndarray of shape (P,)
    logs : list of ThresholdLog, one per group
        For group g, ``mu`` is ``||z_nu_g||_2 = alpha_g * mu`` so that
        ``lam * mu == nu`` still holds. Groups with ``z_g == 0`` are inactive
        and logged with zeros.
    """
    z = np.asarray(z, dtype=np.float64)
    if len(partition) != z.size:
        raise ValueError(f"partition covers {len(partition)} variables, z has {z.size}")
    G = partition.n_groups
    shrinks = _per_group_shrink(varsigma, G)

    zn = np.zeros_like(z)
    nus = np.zeros(G)
    norms = np.zeros(G)
    for g in range(1, G + 1):
        idx = partition.indices(g)
        zg = z[idx]
        if not np.any(zg):
            continue
        nus[g - 1], zn[idx] = _thresholded(zg, shrinks[g - 1], what=f"group {g}")
        norms[g - 1] = norm_l2(zn[idx])
    active = np.flatnonzero(norms > 0)
    if active.size == 0:
        raise DegenerateThreshold("every group is zero; no direction to recover")
    if float(n_grid) ** active.size > MAX_GRID_POINTS:
        raise ValueError(f"{n_grid}^{active.size} grid points exceed {MAX_GRID_POINTS}")

    mu = float(norms.sum())
    alphas = norms / mu
    lams = np.zeros(G)
    lams[active] = nus[active] / norms[active]
    l1 = np.array([norm_l1(zn[partition.indices(g + 1)]) for g in range(G)])

    # ||w_g||^max = mu / Omega_g(z_nu_g) with Omega_g(v) = ||v||_2 + lam_g ||v||_1
    wmax = mu / (norms[active] + lams[active] * l1[active])
    grid_norms = np.linspace(0.0, 1.0, n_grid)[None, :] * wmax[:, None]
    coef_grid = grid_norms / norms[active][:, None]

    X = np.asarray(context.X, dtype=np.float64)
    y = np.asarray(context.y, dtype=np.float64)
    U = np.column_stack([X[:, partition.indices(g + 1)] @ zn[partition.indices(g + 1)] for g in active])
    yy = float(y @ y)
    sse = _kernels.grid_sse(gram(U), U.T @ y, yy, np.ascontiguousarray(coef_grid))
    k = select_grid_point(sse, yy)
    digits = np.unravel_index(k, (n_grid,) * active.size)

    w = np.zeros_like(z)
    for j, g in enumerate(active):
        idx = partition.indices(g + 1)
        w[idx] = coef_grid[j, digits[j]] * zn[idx]
    if not np.any(w):
        raise EmptyGrid("selected grid combination zeroes every group")
    w /= group_norm(w, partition, alphas, lams)

    logs = [
        ThresholdLog(nu=float(nus[g]), mu=float(norms[g]), lam=float(lams[g])) for g in range(G)
    ]
    return w, logs


def ls_weight(X, z, varsigma, factor=None):
    """Pseudo-least-squares weight: threshold ``(X'X)^-1 z`` and normalise to unit l2 norm.

    ``factor`` may carry a precomputed ``SPDFactor`` of ``X'X``.
    """
    if factor is None:
        factor = SPDFactor(gram(X))
    beta_ls = factor.solve(np.asarray(z, dtype=np.float64))
    nu, zn = _thresholded(beta_ls, varsigma, what="the least-squares coefficients")
    mu = norm_l2(zn)
    return zn / mu, ThresholdLog(nu=nu, mu=mu, lam=nu / mu)


def ridge_factor(X, nu2):
    X = np.asarray(X, dtype=np.float64)
    A = nu2 * gram(X)
    A[np.diag_indices_from(A)] += 1.0
    return SPDFactor(A)


def ridge_weight(X, z, varsigma, nu2, factor=None):
    """Pseudo-ridge weight for ``Omega(w) = lam ||w||_1 + lam2 ||Xw||_2 + ||w||_2``.

    Thresholds ``(nu2 X'X + I)^-1 z`` adaptively and scales the result by
    ``mu / (nu ||z_nu||_1 + nu2 ||X z_nu||_2^2 + mu^2)``; ``factor`` may carry a
    precomputed ``SPDFactor`` of ``nu2 X'X + I``.
    """
    if nu2 < 0 or not np.isfinite(nu2):
        raise ValueError(f"nu2 must be finite and nonnegative, got {nu2}")
    X = np.asarray(X, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if nu2 == 0.0:
        zx = z
    else:
        if factor is None:
            factor = ridge_factor(X, nu2)
        zx = factor.solve(z)
    nu, zn = _thresholded(zx, varsigma, what="the ridge-filtered covariance")
    mu = norm_l2(zn)
    xz = norm_l2(X @ zn) if nu2 else 0.0
    w = zn / (nu * (norm_l1(zn) / mu) + nu2 * xz * (xz / mu) + mu)
    return w, ThresholdLog(nu=nu, mu=mu, lam=nu / mu, lam2=nu2 * xz / mu)


def ridge_norm(w, X, lam, lam2):
    return lam * norm_l1(w) + lam2 * norm_l2(np.asarray(X) @ w) + norm_l2(w)


@dataclass(frozen=True)
class DualGapReport:
    """Largest ``z'u - z'w`` over sampled feasible ``u``; nonpositive means no better direction found."""

    max_gap: float
    n_trials: int
    best_u: np.ndarray

    def certified(self, tol=1e-9):
        return self.max_gap <= tol


def check_dual_optimality(z, w, norm, trials=10_000, rng=None):
    """Monte-Carlo probe of ``w = argmax {z'u : Omega(u) = 1}``.

    Draws ``trials`` directions in the orthant of ``z`` with random supports,
    rescales each to ``norm(u) = 1`` and reports the best improvement over
    ``z'w``. ``norm`` is the penalty as a callable.
    """
    z = np.asarray(z, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    rng = np.random.default_rng(rng)
    P = z.size
    signs = np.sign(z)
    if not np.any(signs):
        raise ValueError("z is zero; every feasible direction ties")
    base = float(z @ w)
    best_gap = -np.inf
    best_u = None
    done = 0
    while done < trials:
        u = np.abs(rng.standard_normal(P)) * signs
        u *= rng.random(P) < rng.uniform(0.2, 1.0)
        if not np.any(u):
            continue
        u /= norm(u)
        gap = float(z @ u) - base
        if gap > best_gap:
            best_gap, best_u = gap, u
        done += 1
    return DualGapReport(max_gap=best_gap, n_trials=trials, best_u=best_u)
