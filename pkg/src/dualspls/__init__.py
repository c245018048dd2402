"""Sparse partial least squares regression built on dual-norm weight solvers.

A single PLS1 deflation loop (``fit``) calls one of four penalized weight
solvers (pseudo-lasso, pseudo-group-lasso, pseudo-least-squares,
pseudo-ridge); each reduces to plain PLS1 at its neutral setting. Sparsity is
set through a shrink ratio, the fraction of variables zeroed per component.
"""

from .baselines import fit_baseline, lasso_fit, ols_fit, ridge_fit
from .datasets import SimulationRecipe, preset, savitzky_golay_derivative, simulate
from .errors import (
    DegenerateThreshold,
    DualSPLSError,
    EmptyGrid,
    NoConvergence,
    ParseError,
    RankExhausted,
    SingularMatrix,
)
from .model_selection import CvPlan, select_components, select_hyperparameter
from .penalties import GroupPartition
from .pls import FittedModel, PenaltySpec, fit, load_model, predict
from .sampling import calvalxy, kennard_stone, random_split

__version__ = "0.1.0"

__all__ = [
    "CvPlan",
    "DegenerateThreshold",
    "DualSPLSError",
    "EmptyGrid",
    "FittedModel",
    "GroupPartition",
    "NoConvergence",
    "ParseError",
    "PenaltySpec",
    "RankExhausted",
    "SimulationRecipe",
    "SingularMatrix",
    "calvalxy",
    "fit",
    "fit_baseline",
    "kennard_stone",
    "lasso_fit",
    "load_model",
    "ols_fit",
    "predict",
    "preset",
    "random_split",
    "ridge_fit",
    "savitzky_golay_derivative",
    "select_components",
    "select_hyperparameter",
    "simulate",
]
