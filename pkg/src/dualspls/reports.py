"""Metric tables and recovery scoring shared by the cv and benchmark commands."""

from dataclasses import dataclass

import numpy as np

from .datasets import expand_ranges
from .metrics import mae, r_squared, rmse

DENSE_METHODS = ("ols", "ridge")
DENSE_SUPPORT_RTOL = 1e-8


@dataclass(frozen=True)
class RecoveryScore:
    precision: float
    recall: float
    n_selected: int
    n_hits: int
    # True when nothing was selected and precision fell back to 1
    degenerate: bool

    def as_dict(self):
        return {
            "precision": self.precision,
            "recall": self.recall,
            "n_selected": self.n_selected,
            "n_hits": self.n_hits,
            "degenerate": self.degenerate,
        }


def support_tolerance(method, beta):
    """Magnitude below which a coefficient counts as unselected.

    Sparse solvers produce exact zeros, so their tolerance is 0. The dense
    baselines use a small fraction of the largest coefficient.
    """
    if method in DENSE_METHODS:
        beta = np.asarray(beta, dtype=np.float64)
        return DENSE_SUPPORT_RTOL * float(np.abs(beta).max()) if beta.size else 0.0
    return 0.0


def recovery_score(beta, active_set, tol=0.0):
    """Precision and recall of the support of ``beta`` against the true active set.

    ``active_set`` holds inclusive 1-based index ranges. An empty support has
    precision 1 and is flagged ``degenerate``.
    """
    beta = np.asarray(beta, dtype=np.float64).reshape(-1)
    truth = expand_ranges(active_set)
    if truth.size and (truth.min() < 0 or truth.max() >= beta.size):
        raise ValueError(f"active set exceeds the {beta.size} variables")
    selected = np.flatnonzero(np.abs(beta) > tol)
    hits = int(np.intersect1d(selected, truth).size)
    degenerate = selected.size == 0
    precision = 1.0 if degenerate else hits / selected.size
    recall = hits / truth.size if truth.size else 1.0
    return RecoveryScore(precision, recall, int(selected.size), hits, degenerate)


def _rows(model, order, label, X, y):
    yhat = model.predict(X, order)
    return {"method": model.method, "order": order, "set": label,
            "rmse": rmse(y, yhat), "mae": mae(y, yhat), "r2": r_squared(y, yhat)}


def metric_table(models, X_cal, y_cal, X_val, y_val, max_components):
    """Long-format rows ``(method, order, set, rmse, mae, r2)``.

    ``models`` is a sequence of fitted models, labelled by their ``method``, or
    a mapping from label to model.

    Latent-component models contribute every order they reached up to
    ``max_components``. Single-order baselines do not depend on the order and
    are repeated at every order so each method traces a full curve.
    """
    pairs = models.items() if hasattr(models, "items") else [(m.method, m) for m in models]
    rows = []
    for name, model in pairs:
        single = model.method in ("ols", "ridge", "lasso")
        top = max_components if single else min(max_components, model.n_components)
        for order in range(1, top + 1):
            k = 1 if single else order
            for label, X, y in (("calibration", X_cal, y_cal), ("validation", X_val, y_val)):
                row = _rows(model, k, label, X, y)
                row["method"] = name
                row["order"] = order
                rows.append(row)
    return rows
