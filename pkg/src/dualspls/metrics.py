"""Prediction error and sparsity measures."""

import numpy as np


def _pair(y, yhat):
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    yhat = np.asarray(yhat, dtype=np.float64).reshape(-1)
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.size} vs {yhat.size}")
    if y.size == 0:
        raise ValueError("empty input")
    return y, yhat


def mse(y, yhat):
    y, yhat = _pair(y, yhat)
    r = y - yhat
    return float(r @ r) / y.size


def rmse(y, yhat):
    return float(np.sqrt(mse(y, yhat)))


def mae(y, yhat):
    y, yhat = _pair(y, yhat)
    return float(np.abs(y - yhat).sum()) / y.size


def r_squared(y, yhat):
    """Coefficient of determination ``1 - SS_res / SS_tot``.

    Negative when ``yhat`` does worse than the constant mean predictor.
    """
    y, yhat = _pair(y, yhat)
    dev = y - y.mean()
    ss_tot = float(dev @ dev)
    if ss_tot == 0.0:
        raise ValueError("r_squared is undefined for a constant response")
    r = y - yhat
    return 1.0 - float(r @ r) / ss_tot


def l0(v, tol=0.0):
    """Number of entries with magnitude above ``tol``."""
    return int(np.count_nonzero(np.abs(np.asarray(v)) > tol))


def l0_complement(v, tol=0.0):
    return int(np.size(v)) - l0(v, tol)
