"""PLS1 deflation loop shared by plain PLS and every dual-norm variant."""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import RankExhausted
from .linalg import CenteringStats, SPDFactor, as_matrix, center_xy, deflate, gram, norm_l2, solve_spd
from .penalties import (
    CalibrationContext,
    GroupPartition,
    ThresholdLog,
    check_shrink,
    group_lasso_weight,
    lasso_weight,
    ls_weight,
    ridge_factor,
    ridge_weight,
)

KINDS = ("pls", "pseudo_lasso", "pseudo_group_lasso", "pseudo_ls", "pseudo_ridge")
EXHAUSTION_RTOL = 1e-12
# a score shorter than this fraction of its undeflated projection, or of an
# earlier score, would make the score Gram matrix numerically singular
SCORE_RTOL = 1e-6
FORMAT_VERSION = 1


@dataclass(frozen=True)
class PenaltySpec:
    """Which weight solver the deflation loop calls, with its hyperparameters.

    ``varsigma`` is the shrink ratio (a per-group sequence is allowed for the
    group kind), ``partition`` is required by and only by the group kind, and
    ``nu2`` by and only by the ridge kind.
    """

    kind: str = "pls"
    varsigma: float | tuple = 0.0
    partition: GroupPartition | None = None
    nu2: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}; expected one of {KINDS}")
        if np.ndim(self.varsigma) == 0:
            object.__setattr__(self, "varsigma", check_shrink(self.varsigma))
        else:
            if self.kind != "pseudo_group_lasso":
                raise ValueError("per-group shrink ratios only apply to pseudo_group_lasso")
            object.__setattr__(self, "varsigma", tuple(check_shrink(v) for v in self.varsigma))
        if (self.partition is not None) != (self.kind == "pseudo_group_lasso"):
            raise ValueError("partition must be given exactly for pseudo_group_lasso")
        if (self.nu2 is not None) != (self.kind == "pseudo_ridge"):
            raise ValueError("nu2 must be given exactly for pseudo_ridge")
        if self.nu2 is not None and not (np.isfinite(self.nu2) and self.nu2 >= 0):
            raise ValueError(f"nu2 must be finite and nonnegative, got {self.nu2}")

    @classmethod
    def pls(cls):
        return cls("pls")

    @classmethod
    def lasso(cls, varsigma):
        return cls("pseudo_lasso", varsigma)

    @classmethod
    def group_lasso(cls, varsigma, partition):
        return cls("pseudo_group_lasso", varsigma, partition=partition)

    @classmethod
    def ls(cls, varsigma):
        return cls("pseudo_ls", varsigma)

    @classmethod
    def ridge(cls, varsigma, nu2):
        return cls("pseudo_ridge", varsigma, nu2=float(nu2))


@dataclass(frozen=True)
class FittedModel:
    """A fitted linear model with one coefficient vector per latent order.

    ``coefs[k - 1]`` is the coefficient vector using the first ``k`` components.
    ``weights`` (P x M), ``scores`` (N x M) and ``rotations`` (P x M, with
    ``scores == Xc @ rotations``) are ``None`` for baseline models or models
    read back from JSON.
    """

    method: str
    coefs: np.ndarray
    centering: CenteringStats
    spec: PenaltySpec | None = None
    weights: np.ndarray | None = None
    scores: np.ndarray | None = None
    rotations: np.ndarray | None = None
    thresholds: list = field(default_factory=list)
    fitted: np.ndarray | None = None
    params: dict = field(default_factory=dict)
    rank_exhausted: bool = False

    @property
    def n_components(self):
        return self.coefs.shape[0]

    @property
    def n_vars(self):
        return self.coefs.shape[1]

    def coefficients(self, order=None):
        return coefficients(self, order)

    def predict(self, X_new, order=None):
        return predict(self, X_new, order)

    def to_dict(self):
        return model_to_dict(self)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(model_to_dict(self), fh, indent=1)
            fh.write("\n")


def _weight(spec, z, Xc, Xm, yc, cache):
    if spec.kind == "pls":
        mu = norm_l2(z)
        return z / mu, ThresholdLog(nu=0.0, mu=mu, lam=0.0)
    if spec.kind == "pseudo_lasso":
        return lasso_weight(z, spec.varsigma)
    if spec.kind == "pseudo_group_lasso":
        return group_lasso_weight(z, spec.partition, spec.varsigma, CalibrationContext(Xm, yc))
    if spec.kind == "pseudo_ls":
        if "ls" not in cache:
            cache["ls"] = SPDFactor(gram(Xc))
        return ls_weight(Xc, z, spec.varsigma, factor=cache["ls"])
    if "ridge" not in cache and spec.nu2 > 0:
        cache["ridge"] = ridge_factor(Xc, spec.nu2)
    return ridge_weight(Xc, z, spec.varsigma, spec.nu2, factor=cache.get("ridge"))


def fit(X, y, spec, n_components, strict=False):
    """Fit ``n_components`` latent components with the weight solver chosen by ``spec``.

    X and y are centered internally. Each step computes ``z = X_m' y``, asks the
    penalty solver for ``w``, forms the score ``t = X_m w`` and deflates ``X_m``
    on ``t``. The least-squares and ridge solvers use the Gram matrix of the
    centered (undeflated) X, as the deflated matrices are singular.

    When the deflated matrix runs out of signal before ``n_components`` the
    model is truncated at the last valid component and flagged
    ``rank_exhausted``; pass ``strict=True`` to raise ``RankExhausted`` instead.
    Solver errors (``DegenerateThreshold``, ``SingularMatrix``) propagate.
    """
    X = as_matrix(X, min_rows=3)
    Xc, yc, stats = center_xy(X, y)
    N, P = Xc.shape
    M = int(n_components)
    if not 1 <= M <= min(N - 1, P):
        raise ValueError(f"n_components must lie in [1, {min(N - 1, P)}], got {n_components}")
    if spec.kind == "pseudo_group_lasso" and len(spec.partition) != P:
        raise ValueError(f"partition covers {len(spec.partition)} variables, X has {P}")

    x_scale = np.linalg.norm(Xc)
    y_scale = norm_l2(yc)
    Xm = Xc.copy()
    W, T, logs = [], [], []
    cache = {}
    t_max = 0.0
    exhausted = False
    for m in range(M):
        z = Xm.T @ yc
        if norm_l2(z) <= EXHAUSTION_RTOL * x_scale * y_scale:
            exhausted = True
            break
        w, log = _weight(spec, z, Xc, Xm, yc, cache)
        t = Xm @ w
        t_norm = norm_l2(t)
        if t_norm <= SCORE_RTOL * max(norm_l2(Xc @ w), t_max):
            exhausted = True
            break
        t_max = max(t_max, t_norm)
        Xm = deflate(Xm, t)
        W.append(w)
        T.append(t)
        logs.append(log)

    if exhausted:
        msg = f"deflated matrix exhausted after {len(W)} of {M} components"
        if strict or not W:
            raise RankExhausted(msg, n_valid=len(W))
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    W = np.column_stack(W)
    T = np.column_stack(T)
    R = _rotations(Xc, W, T)
    coefs = np.empty((W.shape[1], P))
    fitted = np.empty((N, W.shape[1]))
    for k in range(1, W.shape[1] + 1):
        Tk = T[:, :k]
        q = solve_spd(Tk.T @ Tk, Tk.T @ yc)
        coefs[k - 1] = R[:, :k] @ q
        fitted[:, k - 1] = stats.y_mean + Tk @ q
    return FittedModel(
        method=spec.kind,
        coefs=coefs,
        centering=stats,
        spec=spec,
        weights=W,
        scores=T,
        rotations=R,
        thresholds=logs,
        fitted=fitted,
        rank_exhausted=exhausted,
    )


def _rotations(Xc, W, T):
    # T = Xc R with R = W (T'Xc W)^-1 T'T; T'Xc W is upper triangular because
    # each Xc w_j lies in span(t_1..t_j)
    A = np.triu(T.T @ Xc @ W)
    return W @ scipy.linalg.solve_triangular(A, np.diag(np.einsum("ij,ij->j", T, T)), lower=False)


def _check_order(model, order):
    M = model.n_components
    if order is None:
        return M
    order = int(order)
    if not 1 <= order <= M:
        raise ValueError(f"order must lie in [1, {M}], got {order}")
    return order


def coefficients(model, order=None):
    """Coefficient vector of ``model`` using its first ``order`` components (default: all)."""
    return model.coefs[_check_order(model, order) - 1].copy()


def predict(model, X_new, order=None):
    """``y_mean + (x - x_mean)' beta_order`` for every row of ``X_new``."""
    order = _check_order(model, order)
    X_new = as_matrix(X_new, name="X_new")
    if X_new.shape[1] != model.n_vars:
        raise ValueError(f"X_new has {X_new.shape[1]} columns, model expects {model.n_vars}")
    c = model.centering
    return c.y_mean + (X_new - c.col_means) @ model.coefs[order - 1]


# ------------------------------------------------------------------ persistence


def _log_dict(log):
    if isinstance(log, list):
        return {
            "nu": [g.nu for g in log],
            "mu": [g.mu for g in log],
            "lambda": [g.lam for g in log],
        }
    return log.as_dict()


def _log_from_dict(d):
    if isinstance(d["nu"], list):
        return [ThresholdLog(nu=a, mu=b, lam=c) for a, b, c in zip(d["nu"], d["mu"], d["lambda"])]
    return ThresholdLog.from_dict(d)


def model_to_dict(model):
    spec = model.spec
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": model.method,
        "M": model.n_components,
        "P": model.n_vars,
        "col_means": model.centering.col_means.tolist(),
        "y_mean": model.centering.y_mean,
    }
    if spec is not None:
        doc["varsigma"] = list(spec.varsigma) if isinstance(spec.varsigma, tuple) else spec.varsigma
        if spec.nu2 is not None:
            doc["nu2"] = spec.nu2
        if spec.partition is not None:
            doc["groups"] = spec.partition.group_of.tolist()
    if model.params:
        doc["params"] = dict(model.params)
    doc["W"] = [] if model.weights is None else model.weights.T.tolist()
    doc["beta"] = model.coefs.tolist()
    doc["thresholds"] = [_log_dict(log) for log in model.thresholds]
    doc["rank_exhausted"] = model.rank_exhausted
    return doc


def model_from_dict(doc):
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version {doc.get('format_version')!r}")
    kind = doc["kind"]
    spec = None
    if kind in KINDS:
        varsigma = doc.get("varsigma", 0.0)
        if isinstance(varsigma, list):
            varsigma = tuple(varsigma)
        partition = GroupPartition(np.asarray(doc["groups"])) if "groups" in doc else None
        spec = PenaltySpec(kind, varsigma, partition=partition, nu2=doc.get("nu2"))
    coefs = np.asarray(doc["beta"], dtype=np.float64).reshape(doc["M"], doc["P"])
    W = np.asarray(doc["W"], dtype=np.float64).T if doc["W"] else None
    return FittedModel(
        method=kind,
        coefs=coefs,
        centering=CenteringStats(np.asarray(doc["col_means"], dtype=np.float64), float(doc["y_mean"])),
        spec=spec,
        weights=W,
        thresholds=[_log_from_dict(d) for d in doc.get("thresholds", [])],
        params=dict(doc.get("params", {})),
        rank_exhausted=bool(doc.get("rank_exhausted", False)),
    )


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
