"""Cross-validated choice of the number of latent components and of baseline penalties."""

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .baselines import lasso_fit, ridge_fit
from .datasets import format_float
from .errors import RankExhausted
from .linalg import as_matrix, as_vector, center_xy
from .metrics import mse
from .pls import fit
from .sampling import METHODS, SplitPlan, split


@dataclass(frozen=True)
class CvPlan:
    """Repeated calibration/validation splitting.

    ``random`` shuffles the rows once with ``seed`` and takes consecutive,
    wrapping validation blocks of that permutation, so every row is validated
    at least once whenever ``n_splits`` blocks cover ``N`` rows. The
    deterministic splitters (``kennard_stone``, ``calvalxy``) always return the
    same partition, so they contribute a single split whatever ``n_splits`` is.
    """

    n_splits: int = 10
    calibration_fraction: float = 0.8
    seed: int = 0
    splitter: str = "random"
    n_groups: int = 10

    def __post_init__(self):
        if self.n_splits < 2:
            raise ValueError(f"n_splits must be at least 2, got {self.n_splits}")
        if not 0.0 < self.calibration_fraction < 1.0:
            raise ValueError(f"calibration_fraction must lie in (0, 1), got {self.calibration_fraction}")
        if self.splitter not in METHODS:
            raise ValueError(f"unknown splitter {self.splitter!r}; expected one of {METHODS}")

    def n_cal(self, n_obs):
        return int(min(max(round(self.calibration_fraction * n_obs), 1), n_obs - 1))

    def splits(self, X, y):
        X = as_matrix(X)
        n = X.shape[0]
        k = self.n_cal(n)
        if self.splitter != "random":
            return [split(self.splitter, X, y, k, n_groups=self.n_groups)]
        perm = np.random.default_rng(self.seed).permutation(n)
        n_val = n - k
        plans = []
        for i in range(self.n_splits):
            val = np.zeros(n, dtype=bool)
            val[perm[(i * n_val + np.arange(n_val)) % n]] = True
            plans.append(SplitPlan(np.flatnonzero(~val), np.flatnonzero(val), "random",
                                   {"n_cal": k, "block": i}))
        return plans


@dataclass(frozen=True)
class ComponentSelection:
    m_best: int
    mse_mean: np.ndarray
    mse_std: np.ndarray
    mse_per_split: np.ndarray

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["order", "mean_mse", "std_mse"])
            for k, (m, s) in enumerate(zip(self.mse_mean, self.mse_std), start=1):
                w.writerow([k, format_float(m), format_float(s)])


def smallest_argmin(values):
    """0-based position of the first minimum, ignoring NaN entries."""
    values = np.asarray(values, dtype=np.float64)
    if np.all(np.isnan(values)):
        raise ValueError("no finite value to minimise")
    return int(np.nanargmin(values))


def _xy(X, y):
    X = as_matrix(X)
    y = as_vector(y)
    if y.size != X.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.size} entries")
    return X, y


def select_components(X, y, spec, max_components, plan=None):
    """Validation MSE per latent order averaged over the splits of ``plan``.

    Every split is fitted once with ``max_components`` components and scored at
    each order (the components are nested). A split whose deflation runs dry
    early only contributes the orders it reached. The chosen order is the
    smallest one with the lowest averaged MSE.
    """
    X, y = _xy(X, y)
    plan = plan or CvPlan()
    if max_components < 1:
        raise ValueError(f"max_components must be positive, got {max_components}")
    splits = plan.splits(X, y)
    table = np.full((len(splits), max_components), np.nan)
    for i, sp in enumerate(splits):
        Xc, yc = X[sp.calibration], y[sp.calibration]
        Xv, yv = X[sp.validation], y[sp.validation]
        m = min(max_components, Xc.shape[0] - 1, X.shape[1])
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                model = fit(Xc, yc, spec, m)
        except RankExhausted:
            continue
        for k in range(1, model.n_components + 1):
            table[i, k - 1] = mse(yv, model.predict(Xv, k))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mean = np.nanmean(table, axis=0)
        std = np.nanstd(table, axis=0)
    return ComponentSelection(
        m_best=smallest_argmin(mean) + 1, mse_mean=mean, mse_std=std, mse_per_split=table
    )


@dataclass(frozen=True)
class HyperparameterSelection:
    best: float
    grid: np.ndarray
    mse_mean: np.ndarray


def select_hyperparameter(X, y, method, grid, plan=None, **lasso_kwargs):
    """Grid value of the ridge or lasso penalty with the lowest mean validation MSE.

    Ties go to the smallest value. Lasso fits along a split run from the largest
    penalty down, each warm-started from the previous solution.
    """
    X, y = _xy(X, y)
    if method not in ("lasso", "ridge"):
        raise ValueError(f"method must be 'lasso' or 'ridge', got {method!r}")
    grid = np.unique(np.asarray(grid, dtype=np.float64))
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("grid must be a nonempty list of positive values")
    plan = plan or CvPlan()
    splits = plan.splits(X, y)
    table = np.empty((len(splits), grid.size))
    for i, sp in enumerate(splits):
        Xc, yc, stats = center_xy(X[sp.calibration], y[sp.calibration])
        Xv = X[sp.validation] - stats.col_means
        yv = y[sp.validation]
        beta = None
        for j in range(grid.size - 1, -1, -1):
            t = grid[j]
            if method == "ridge":
                beta = ridge_fit(Xc, yc, t)
            else:
                beta = lasso_fit(Xc, yc, t, beta0=beta, **lasso_kwargs)
            table[i, j] = mse(yv, stats.y_mean + Xv @ beta)
    mean = table.mean(axis=0)
    return HyperparameterSelection(best=float(grid[smallest_argmin(mean)]), grid=grid, mse_mean=mean)
