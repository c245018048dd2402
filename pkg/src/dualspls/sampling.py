"""Calibration/validation splitting: random, Kennard-Stone and CalValXy."""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .linalg import as_matrix, as_vector

METHODS = ("random", "kennard_stone", "calvalxy")


@dataclass(frozen=True)
class SplitPlan:
    """A partition of row indices ``0..N-1`` into calibration and validation sets.

    ``calibration`` keeps the order in which points were picked; ``validation``
    is sorted.
    """

    calibration: np.ndarray
    validation: np.ndarray
    method: str
    params: dict = field(default_factory=dict)

    @property
    def n_obs(self):
        return self.calibration.size + self.validation.size

    def roles(self):
        role = np.full(self.n_obs, "val", dtype=object)
        role[self.calibration] = "cal"
        return role

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "role"])
            for i, r in enumerate(self.roles()):
                w.writerow([i, r])


def _plan(cal, n, method, **params):
    cal = np.asarray(cal, dtype=np.int64)
    mask = np.ones(n, dtype=bool)
    mask[cal] = False
    return SplitPlan(calibration=cal, validation=np.flatnonzero(mask), method=method, params=params)


def _check_n_cal(n_cal, n):
    if not 1 <= n_cal < n:
        raise ValueError(f"n_cal must satisfy 1 <= n_cal < {n}, got {n_cal}")


def random_split(n_obs, n_cal, rng=None):
    _check_n_cal(n_cal, n_obs)
    rng = np.random.default_rng(rng)
    return _plan(rng.permutation(n_obs)[:n_cal], n_obs, "random", n_cal=n_cal)


def _centroid_farthest(X):
    d = X - X.mean(axis=0)
    return int(np.argmax(np.einsum("ij,ij->i", d, d)))


def kennard_stone(X, n_cal):
    """Kennard-Stone selection of ``n_cal`` calibration rows.

    Starts from the row farthest from the centroid, then repeatedly adds the row
    whose distance to its nearest selected row is largest. Ties go to the lowest
    row index.
    """
    X = np.ascontiguousarray(as_matrix(X))
    n = X.shape[0]
    _check_n_cal(n_cal, n)
    first = _centroid_farthest(X)
    picked = [first]
    min_d = np.full(n, np.inf)
    _kernels.min_sq_dist_update(X, min_d, first)
    free = np.ones(n, dtype=bool)
    free[first] = False
    for _ in range(n_cal - 1):
        nxt = int(np.argmax(np.where(free, min_d, -np.inf)))
        picked.append(nxt)
        free[nxt] = False
        _kernels.min_sq_dist_update(X, min_d, nxt)
    return _plan(picked, n, "kennard_stone", n_cal=n_cal)


def y_strata(y, n_groups):
    """Equal-frequency bins of ``y``: stratum id (0-based, ascending y) per observation."""
    y = as_vector(y)
    if not 1 <= n_groups <= y.size:
        raise ValueError(f"n_groups must lie in [1, {y.size}], got {n_groups}")
    strata = np.empty(y.size, dtype=np.int64)
    for s, idx in enumerate(np.array_split(np.argsort(y, kind="stable"), n_groups)):
        strata[idx] = s
    return strata


def proportional_quotas(sizes, total):
    """Largest-remainder apportionment of ``total`` across strata of the given sizes."""
    sizes = np.asarray(sizes, dtype=np.int64)
    exact = total * sizes / sizes.sum()
    quotas = np.floor(exact).astype(np.int64)
    short = int(total - quotas.sum())
    # stable sort on the negated remainder: larger remainder first, lower stratum on ties
    order = np.argsort(-(exact - quotas), kind="stable")
    quotas[order[:short]] += 1
    return quotas


def calvalxy(X, y, n_cal, n_groups=10):
    """Calibration set balanced over both X distances and the response distribution.

    Observations are binned into ``n_groups`` equal-frequency strata of y and
    each stratum receives a calibration quota proportional to its size. The
    first calibration point is the row farthest from the global centroid; the
    loop then visits strata cyclically in ascending-y order, starting after the
    stratum of that first point, and adds the Kennard-Stone min-max point of the
    visited stratum (distance to all calibration points chosen so far) until
    every quota is spent.
    """
    X = np.ascontiguousarray(as_matrix(X))
    y = as_vector(y)
    n = X.shape[0]
    if y.size != n:
        raise ValueError(f"X has {n} rows but y has {y.size} entries")
    _check_n_cal(n_cal, n)
    strata = y_strata(y, n_groups)
    sizes = np.bincount(strata, minlength=n_groups)
    if np.any(sizes == 0):
        raise ValueError("a y stratum is empty; reduce n_groups")
    quotas = proportional_quotas(sizes, n_cal)

    first = _centroid_farthest(X)
    s = int(strata[first])
    if quotas[s] == 0:
        quotas[int(np.argmax(quotas))] -= 1
        quotas[s] += 1
    quotas[s] -= 1
    picked = [first]
    free = np.ones(n, dtype=bool)
    free[first] = False
    min_d = np.full(n, np.inf)
    _kernels.min_sq_dist_update(X, min_d, first)
    while quotas.sum() > 0:
        s = (s + 1) % n_groups
        if quotas[s] == 0:
            continue
        nxt = int(np.argmax(np.where(free & (strata == s), min_d, -np.inf)))
        picked.append(nxt)
        free[nxt] = False
        quotas[s] -= 1
        _kernels.min_sq_dist_update(X, min_d, nxt)
    return _plan(picked, n, "calvalxy", n_cal=n_cal, n_groups=n_groups)


def split(method, X, y, n_cal, rng=None, n_groups=10):
    if method == "random":
        return random_split(as_matrix(X).shape[0], n_cal, rng)
    if method == "kennard_stone":
        return kennard_stone(X, n_cal)
    if method == "calvalxy":
        return calvalxy(X, y, n_cal, n_groups=n_groups)
    raise ValueError(f"unknown split method {method!r}; expected one of {METHODS}")
