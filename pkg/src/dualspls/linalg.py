"""Small dense linear-algebra helpers shared by the solvers."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import RankExhausted, SingularMatrix

PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class CenteringStats:
    col_means: np.ndarray
    y_mean: float = 0.0


def as_matrix(X, name="X", min_rows=1):
    """Return ``X`` as a finite 2-D float64 array or raise ``ValueError``."""
    A = np.asarray(X, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < min_rows or A.shape[1] < 1:
        raise ValueError(f"{name} needs at least {min_rows} rows and 1 column, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def as_vector(v, name="y"):
    a = np.asarray(v, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def mean_center(X):
    """Subtract column means.

    Returns
    -------
    Xc : ndarray of shape (N, P)
    stats : CenteringStats
        ``stats.col_means`` holds the removed means; ``y_mean`` is left at 0.
    """
    X = as_matrix(X, min_rows=2)
    means = X.mean(axis=0)
    return X - means, CenteringStats(col_means=means)


def center_xy(X, y):
    Xc, stats = mean_center(X)
    y = as_vector(y)
    if y.shape[0] != Xc.shape[0]:
        raise ValueError(f"X has {Xc.shape[0]} rows but y has {y.shape[0]} entries")
    y_mean = float(y.mean())
    return Xc, y - y_mean, CenteringStats(col_means=stats.col_means, y_mean=y_mean)


def norm_l1(v):
    return float(np.abs(np.asarray(v, dtype=np.float64)).sum())


def norm_l2(v):
    """Euclidean norm, scaled by the largest magnitude to avoid under- and overflow."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        return 0.0
    scale = float(np.max(np.abs(v)))
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    return scale * float(np.linalg.norm(v / scale))


def gram(X):
    """``X.T @ X``, symmetrised to remove round-off asymmetry."""
    X = np.asarray(X, dtype=np.float64)
    G = X.T @ X
    return 0.5 * (G + G.T)


class SPDFactor:
    """Cholesky factor of a symmetric positive-definite matrix, reusable across solves.

    Raises ``SingularMatrix`` when a pivot falls below ``PIVOT_RTOL`` times the
    largest diagonal entry.
    """

    def __init__(self, A):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {A.shape}")
        diag_max = float(np.max(np.abs(np.diag(A)))) if A.size else 0.0
        if diag_max <= 0.0:
            raise SingularMatrix("matrix has no positive diagonal entry")
        try:
            c, lower = scipy.linalg.cho_factor(A, lower=True, check_finite=True)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrix(f"Cholesky factorization failed: {exc}") from None
        pivots = np.diag(c) ** 2
        if np.min(pivots) <= PIVOT_RTOL * diag_max:
            raise SingularMatrix(
                f"smallest pivot {np.min(pivots):.3e} below tolerance "
                f"{PIVOT_RTOL * diag_max:.3e}"
            )
        self._factor = (c, lower)
        self.shape = A.shape

    def solve(self, b):
        return scipy.linalg.cho_solve(self._factor, np.asarray(b, dtype=np.float64))


def solve_spd(A, b):
    """Solve ``A x = b`` for symmetric positive-definite ``A`` via Cholesky."""
    return SPDFactor(A).solve(b)


def deflate(X, t):
    """Project the columns of ``X`` onto the orthogonal complement of ``t``.

    Returns ``X - t (t't)^-1 t'X``; raises ``RankExhausted`` for a zero ``t``.
    """
    X = np.asarray(X, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    if t.shape[0] != X.shape[0]:
        raise ValueError(f"score has length {t.shape[0]}, X has {X.shape[0]} rows")
    tt = float(t @ t)
    if tt == 0.0:
        raise RankExhausted("cannot deflate on a zero score vector")
    return X - np.outer(t, (t @ X) / tt)
