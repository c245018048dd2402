"""Classical comparators: ordinary least squares, ridge and lasso.

The ``*_fit`` functions solve the uncentered problem on the arrays they are
given. ``fit_baseline`` centers first and wraps the result as a one-order
``FittedModel`` so baselines flow through the same predict/report path as the
latent-component models.
"""

import numpy as np

from . import _kernels
from .errors import NoConvergence
from .linalg import CenteringStats, SPDFactor, as_matrix, as_vector, center_xy, gram
from .pls import FittedModel

BASELINES = ("ols", "ridge", "lasso")
ANDERSON_DEPTH = 5


def _check_xy(X, y):
    X = as_matrix(X)
    y = as_vector(y)
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
    return X, y


def ols_fit(X, y):
    """``(X'X)^-1 X'y``; raises ``SingularMatrix`` when ``X'X`` is not invertible."""
    X, y = _check_xy(X, y)
    return SPDFactor(gram(X)).solve(X.T @ y)


def ridge_fit(X, y, t):
    """``(X'X + t I)^-1 X'y`` for ``t > 0``."""
    if not t > 0:
        raise ValueError(f"ridge parameter must be positive, got {t}")
    X, y = _check_xy(X, y)
    A = gram(X)
    A[np.diag_indices_from(A)] += t
    return SPDFactor(A).solve(X.T @ y)


def lasso_objective(X, y, beta, t):
    r = y - X @ beta
    return 0.5 * float(r @ r) + t * float(np.abs(beta).sum())


def lasso_fit(X, y, t, max_iter=10_000, tol=1e-8, beta0=None, history=None):
    """Cyclic coordinate descent on ``0.5 ||y - X beta||^2 + t ||beta||_1``.

    Columns are scaled to unit l2 norm internally and the coefficients mapped
    back on return. Full passes over every coordinate alternate with passes
    restricted to the current nonzero set, which are much cheaper once the
    support has settled. On a fixed support the passes form a linear fixed-point
    iteration, so every ``ANDERSON_DEPTH`` passes an Anderson extrapolation of
    the recent iterates is tried and kept only if it lowers the objective. The
    fit has converged when a full pass moves no coefficient by more than
    ``tol``. When ``history`` is a list, the objective after every pass is
    appended to it; it never increases.

    Raises
    ------
    NoConvergence
        After ``max_iter`` passes; the exception carries the last iterate.
    """
    if not t >= 0:
        raise ValueError(f"lasso parameter must be nonnegative, got {t}")
    X, y = _check_xy(X, y)
    P = X.shape[1]
    scale = np.linalg.norm(X, axis=0)
    live = scale > 0
    s = scale[live]
    XT = np.ascontiguousarray((X[:, live] / s).T)
    beta_s = np.zeros(s.size)
    if beta0 is not None:
        beta_s = np.asarray(beta0, dtype=np.float64)[live] * s
    resid = y - XT.T @ beta_s
    thresh = t / s
    every = np.arange(s.size)

    def unscale(bs):
        beta = np.zeros(P)
        beta[live] = bs / s
        return beta

    def objective(r, bs):
        return 0.5 * float(r @ r) + float(thresh @ np.abs(bs))

    n_pass = 0

    def sweep(coords):
        nonlocal n_pass
        n_pass += 1
        change = _kernels.cd_sweep(XT, resid, beta_s, thresh, s, coords)
        if history is not None:
            history.append(objective(resid, beta_s))
        return change

    while n_pass < max_iter:
        if sweep(every) <= tol:
            return unscale(beta_s)
        support = np.flatnonzero(beta_s)
        iterates = [beta_s[support]]
        while n_pass < max_iter and sweep(support) > tol:
            iterates.append(beta_s[support])
            if len(iterates) > ANDERSON_DEPTH:
                _anderson_step(XT[support], y, resid, beta_s, support, iterates, objective)
                iterates = [beta_s[support]]
    raise NoConvergence(
        f"lasso coordinate descent did not converge in {max_iter} passes",
        beta=unscale(beta_s),
        n_iter=max_iter,
    )


def _anderson_step(XT_s, y, resid, beta_s, support, iterates, objective):
    # only the support moves during restricted passes, so the residual of an
    # extrapolated point needs just those columns
    B = np.array(iterates)
    U = np.diff(B, axis=0)
    G = U @ U.T
    G[np.diag_indices_from(G)] += 1e-12 * max(np.trace(G), 1e-300)
    try:
        c = np.linalg.solve(G, np.ones(G.shape[0]))
    except np.linalg.LinAlgError:
        return
    if not np.all(np.isfinite(c)) or c.sum() == 0:
        return
    extrap = (c / c.sum()) @ B[1:]
    r_new = y - XT_s.T @ extrap
    full = beta_s.copy()
    full[support] = extrap
    if objective(r_new, full) < objective(resid, beta_s):
        beta_s[support] = extrap
        resid[:] = r_new


def fit_baseline(method, X, y, t=None, **kwargs):
    """Fit a baseline on centered data and wrap it as a one-order ``FittedModel``."""
    if method not in BASELINES:
        raise ValueError(f"unknown baseline {method!r}; expected one of {BASELINES}")
    Xc, yc, stats = center_xy(X, y)
    if method == "ols":
        beta, params = ols_fit(Xc, yc), {}
    elif method == "ridge":
        beta, params = ridge_fit(Xc, yc, t), {"t": float(t)}
    else:
        beta, params = lasso_fit(Xc, yc, t, **kwargs), {"t": float(t)}
    return FittedModel(
        method=method,
        coefs=beta[None, :],
        centering=CenteringStats(stats.col_means, stats.y_mean),
        fitted=(stats.y_mean + Xc @ beta)[:, None],
        params=params,
    )
