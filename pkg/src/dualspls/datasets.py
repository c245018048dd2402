"""Synthetic spectra with a known sparse response, derivative preprocessing and CSV I/O."""

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ParseError
from .linalg import as_matrix


@dataclass(frozen=True)
class SimulationRecipe:
    """Parameters of a Gaussian-mixture spectra simulation.

    Each of the ``n_obs`` rows is a sum of ``n_peaks`` Gaussian peaks of width
    ``sigma`` (in grid steps) sampled on the grid ``1..n_vars``. ``active_set``
    lists inclusive 1-based index ranges carrying the response; the response
    weights are either one positive value per active index or ``"random"``
    (uniform on [0.5, 1.5]). ``noise_sd`` contaminates X, ``y_noise_sd`` the
    response.
    """

    n_obs: int
    n_vars: int
    n_peaks: int
    sigma: float
    amp_range: tuple = (1.0, 5.0)
    active_set: tuple = ()
    response_weights: object = "random"
    noise_sd: float = 0.0
    y_noise_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "amp_range", tuple(float(a) for a in self.amp_range))
        object.__setattr__(self, "active_set", tuple(tuple(int(v) for v in r) for r in self.active_set))
        if not isinstance(self.response_weights, str):
            object.__setattr__(self, "response_weights", tuple(float(v) for v in self.response_weights))
        self.validate()

    def validate(self):
        if self.n_obs < 2 or self.n_vars < 1 or self.n_peaks < 1:
            raise ValueError("need n_obs >= 2, n_vars >= 1 and n_peaks >= 1")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        lo, hi = self.amp_range
        if not 0 < lo <= hi:
            raise ValueError(f"amp_range must satisfy 0 < min <= max, got {self.amp_range}")
        for r in self.active_set:
            if len(r) != 2 or not 1 <= r[0] <= r[1] <= self.n_vars:
                raise ValueError(f"active range {r} must be [start, end] within [1, {self.n_vars}]")
        if isinstance(self.response_weights, str):
            if self.response_weights != "random":
                raise ValueError("response_weights must be 'random' or a list of positive values")
        else:
            if len(self.response_weights) != self.active_indices().size:
                raise ValueError("need one response weight per active index")
            if any(not (w > 0) for w in self.response_weights):
                raise ValueError("response weights must be positive")
        for name in ("noise_sd", "y_noise_sd"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")

    def active_indices(self):
        """Sorted 0-based indices covered by ``active_set``."""
        return expand_ranges(self.active_set)

    def to_json(self):
        d = asdict(self)
        d["amp_range"] = list(self.amp_range)
        d["active_set"] = [list(r) for r in self.active_set]
        if not isinstance(self.response_weights, str):
            d["response_weights"] = list(self.response_weights)
        return json.dumps(d, indent=1)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def expand_ranges(ranges):
    """Inclusive 1-based ``[start, end]`` ranges to sorted unique 0-based indices."""
    if not ranges:
        return np.zeros(0, dtype=np.int64)
    return np.unique(np.concatenate([np.arange(a - 1, b) for a, b in ranges]))


PRESETS = {
    # 300 mixtures of 30 peaks over 1000 variables; response on three
    # 15-variable bands
    "dsim": dict(
        n_obs=300,
        n_vars=1000,
        n_peaks=30,
        sigma=3.0,
        amp_range=(1.0, 5.0),
        active_set=((151, 165), (421, 435), (781, 795)),
        noise_sd=0.02,
        y_noise_sd=2.0,
    ),
    # 200 mixtures of 100 peaks over 50 variables; response on the first five
    # and last twelve variables
    "dsim-bar": dict(
        n_obs=200,
        n_vars=50,
        n_peaks=100,
        sigma=0.7,
        amp_range=(1.0, 5.0),
        active_set=((1, 5), (39, 50)),
        noise_sd=0.5,
        y_noise_sd=0.5,
    ),
}


def preset(name, seed=0, **overrides):
    try:
        params = dict(PRESETS[name])
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None
    params.update(overrides)
    return SimulationRecipe(seed=seed, **params)


@dataclass(frozen=True)
class SimulatedDataset:
    X: np.ndarray
    y: np.ndarray
    recipe: SimulationRecipe
    true_beta: np.ndarray
    active: np.ndarray = field(repr=False, default=None)


def simulate(recipe):
    """Draw a dataset from ``recipe``.

    Random draws come from one ``numpy.random.default_rng(seed)`` stream in a
    fixed order: amplitudes, peak locations, X noise, y noise, then random
    response weights. The response is built from the noisy X, so
    ``y = X @ true_beta + noise`` holds exactly on the returned X.
    """
    recipe.validate()
    rng = np.random.default_rng(recipe.seed)
    N, P, K = recipe.n_obs, recipe.n_vars, recipe.n_peaks
    amps = rng.uniform(recipe.amp_range[0], recipe.amp_range[1], size=(N, K))
    locs = rng.uniform(1.0, float(P), size=(N, K))
    x_noise = rng.standard_normal((N, P))
    y_noise = rng.standard_normal(N)

    grid = np.arange(1, P + 1, dtype=np.float64)
    X = np.zeros((N, P))
    for k in range(K):
        X += amps[:, k, None] * np.exp(-((grid[None, :] - locs[:, k, None]) ** 2) / (2.0 * recipe.sigma**2))
    X += recipe.noise_sd * x_noise

    active = recipe.active_indices()
    if isinstance(recipe.response_weights, str):
        weights = rng.uniform(0.5, 1.5, size=active.size)
    else:
        weights = np.asarray(recipe.response_weights, dtype=np.float64)
    true_beta = np.zeros(P)
    true_beta[active] = weights
    y = X @ true_beta + recipe.y_noise_sd * y_noise
    return SimulatedDataset(X=X, y=y, recipe=recipe, true_beta=true_beta, active=active)


# ----------------------------------------------------------- Savitzky-Golay


def _sg_weights(offsets, degree, deriv):
    V = np.vander(offsets.astype(np.float64), degree + 1, increasing=True)
    return math.factorial(deriv) * np.linalg.pinv(V)[deriv]


def savitzky_golay_derivative(X, window=15, degree=2, deriv=1):
    """Row-wise Savitzky-Golay derivative (per grid step).

    Interior points use the centered least-squares polynomial fit over
    ``window`` samples. Within half a window of either edge the fit runs over
    the truncated window that fits inside the row, which keeps the filter exact
    on polynomials of degree at most ``degree`` everywhere.
    """
    X = as_matrix(X)
    if window % 2 == 0 or window < 1:
        raise ValueError(f"window must be a positive odd integer, got {window}")
    if window <= degree:
        raise ValueError(f"window ({window}) must exceed degree ({degree})")
    if deriv > degree:
        raise ValueError(f"derivative order {deriv} exceeds polynomial degree {degree}")
    P = X.shape[1]
    if P < window:
        raise ValueError(f"window ({window}) longer than the {P} variables")
    half = window // 2
    out = np.empty_like(X)
    c = _sg_weights(np.arange(-half, half + 1), degree, deriv)
    out[:, half : P - half] = np.lib.stride_tricks.sliding_window_view(X, window, axis=1) @ c
    for i in list(range(half)) + list(range(P - half, P)):
        lo, hi = max(0, i - half), min(P, i + half + 1)
        out[:, i] = X[:, lo:hi] @ _sg_weights(np.arange(lo - i, hi - i), degree, deriv)
    return out


# ------------------------------------------------------------------ CSV


def load_csv(path, header=False):
    """Read a comma-separated numeric table into a 2-D float array.

    Raises ``ParseError`` naming the line (and column) of a non-numeric field
    or of a row whose width differs from the first data row.
    """
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, fields in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not fields or all(not f.strip() for f in fields):
                continue
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ParseError(f"ragged row: expected {width} fields, found {len(fields)}", line=lineno)
            row = []
            for col, f in enumerate(fields, start=1):
                try:
                    row.append(float(f))
                except ValueError:
                    raise ParseError(f"non-numeric field {f!r}", line=lineno, column=col) from None
            rows.append(row)
    if not rows:
        raise ParseError(f"no data rows in {path}")
    return np.asarray(rows, dtype=np.float64)


def load_vector(path, header=False):
    A = load_csv(path, header=header)
    if A.shape[1] != 1:
        raise ParseError(f"expected a single column, found {A.shape[1]}")
    return A[:, 0]


def format_float(v):
    return format(float(v), ".17g")


def save_csv(path, data, header=None):
    A = np.asarray(data, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in A:
            w.writerow([format_float(v) for v in row])
