"""Inner loops that dominate runtime, in two interchangeable flavours.

Every kernel exists as a numba ``@njit`` loop and as a plain numpy routine with
the same signature and the same results (up to floating point summation order).
The numba path is used when numba imports and ``DUALSPLS_DISABLE_NUMBA`` is not
set to a truthy value; the choice is made once, at import time.

Both flavours stay importable as ``numpy_impl`` and ``jit_impl`` so tests and
``benchmarks/bench_kernels.py`` can pit one against the other.
"""

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

_TRUTHY = {"1", "true", "yes", "on"}
USE_NUMBA = HAS_NUMBA and os.environ.get("DUALSPLS_DISABLE_NUMBA", "").strip().lower() not in _TRUTHY


# ---------------------------------------------------------------- numpy path


def _cd_sweep_np(XT, resid, beta, thresh, scale, coords):
    max_change = 0.0
    for p in coords:
        col = XT[p]
        old = beta[p]
        rho = col @ resid + old
        new = np.sign(rho) * max(abs(rho) - thresh[p], 0.0)
        if new != old:
            resid -= (new - old) * col
            beta[p] = new
            change = abs(new - old) / scale[p]
            if change > max_change:
                max_change = change
    return max_change


def _grid_sse_np(gram_u, u_y, yy, grid):
    n_groups, n_values = grid.shape
    combos = np.indices((n_values,) * n_groups).reshape(n_groups, -1).T
    coefs = grid[np.arange(n_groups), combos]
    tt = np.einsum("kg,gh,kh->k", coefs, gram_u, coefs)
    ty = coefs @ u_y
    sse = np.full(coefs.shape[0], np.inf)
    ok = tt > 0.0
    sse[ok] = yy - ty[ok] ** 2 / tt[ok]
    return sse


def _min_sq_dist_update_np(X, min_d, idx):
    d = X - X[idx]
    np.minimum(min_d, np.einsum("ij,ij->i", d, d), out=min_d)


numpy_impl = SimpleNamespace(
    name="numpy",
    cd_sweep=_cd_sweep_np,
    grid_sse=_grid_sse_np,
    min_sq_dist_update=_min_sq_dist_update_np,
)


# ---------------------------------------------------------------- numba path

if HAS_NUMBA:

    @numba.njit(cache=True)
    def _cd_sweep_jit(XT, resid, beta, thresh, scale, coords):
        n = XT.shape[1]
        max_change = 0.0
        for p in coords:
            old = beta[p]
            rho = old
            for i in range(n):
                rho += XT[p, i] * resid[i]
            mag = abs(rho) - thresh[p]
            new = 0.0
            if mag > 0.0:
                new = mag if rho > 0.0 else -mag
            if new != old:
                delta = new - old
                for i in range(n):
                    resid[i] -= delta * XT[p, i]
                beta[p] = new
                change = abs(delta) / scale[p]
                if change > max_change:
                    max_change = change
        return max_change

    @numba.njit(cache=True)
    def _grid_sse_jit(gram_u, u_y, yy, grid):
        n_groups, n_values = grid.shape
        total = n_values**n_groups
        sse = np.empty(total)
        c = np.empty(n_groups)
        for k in range(total):
            rem = k
            for g in range(n_groups - 1, -1, -1):
                c[g] = grid[g, rem % n_values]
                rem //= n_values
            tt = 0.0
            ty = 0.0
            for g in range(n_groups):
                ty += c[g] * u_y[g]
                for h in range(n_groups):
                    tt += c[g] * gram_u[g, h] * c[h]
            if tt > 0.0:
                sse[k] = yy - ty * ty / tt
            else:
                sse[k] = np.inf
        return sse

    @numba.njit(cache=True)
    def _min_sq_dist_update_jit(X, min_d, idx):
        n, P = X.shape
        for i in range(n):
            acc = 0.0
            for j in range(P):
                diff = X[i, j] - X[idx, j]
                acc += diff * diff
            if acc < min_d[i]:
                min_d[i] = acc

    jit_impl = SimpleNamespace(
        name="numba",
        cd_sweep=_cd_sweep_jit,
        grid_sse=_grid_sse_jit,
        min_sq_dist_update=_min_sq_dist_update_jit,
    )
else:  # pragma: no cover
    jit_impl = None

active = jit_impl if USE_NUMBA else numpy_impl


def cd_sweep(XT, resid, beta, thresh, scale, coords):
    """One cyclic coordinate-descent pass of the lasso over ``coords``.

    ``XT`` holds the unit-norm design columns as rows. Updates ``resid`` and
    ``beta`` in place and returns the largest coefficient change, measured in
    the original (unscaled) units via ``scale``.
    """
    return active.cd_sweep(XT, resid, beta, thresh, scale, coords)


def grid_sse(gram_u, u_y, yy, grid):
    """Residual sum of squares of the one-score regression for every grid point.

    ``grid[g, i]`` is the i-th candidate coefficient of group g; combinations are
    enumerated in lexicographic order with group 0 the most significant digit.
    Combinations whose score vector vanishes get ``inf``.
    """
    return active.grid_sse(gram_u, u_y, yy, grid)


def min_sq_dist_update(X, min_d, idx):
    """``min_d[i] = min(min_d[i], ||X[i] - X[idx]||^2)`` for every row, in place."""
    active.min_sq_dist_update(X, min_d, idx)
