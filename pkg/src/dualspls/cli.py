"""Command-line interface: simulate, split, fit, predict, cv and benchmark.

Exit codes: 0 success, 2 usage, 3 I/O, 4 numeric or solver failure.
"""

import argparse
import csv
import dataclasses
import json
import os
import sys
import warnings

import numpy as np

from .baselines import BASELINES, fit_baseline
from .datasets import (
    PRESETS,
    SimulationRecipe,
    format_float,
    load_csv,
    load_vector,
    preset,
    save_csv,
    savitzky_golay_derivative,
    simulate,
)
from .errors import DualSPLSError, ParseError
from .metrics import l0, l0_complement
from .model_selection import CvPlan, select_components, select_hyperparameter
from .penalties import GroupPartition
from .pls import PenaltySpec, fit, load_model
from .reports import metric_table, recovery_score, support_tolerance
from .sampling import METHODS as SPLITTERS
from .sampling import split

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SOLVER = 0, 2, 3, 4

LATENT_METHODS = ("pls", "dual-lasso", "dual-gl", "dual-ls", "dual-ridge")
ALL_METHODS = LATENT_METHODS + BASELINES
SG_WINDOW, SG_DEGREE = 15, 2
# penalty grids searched by cross validation, relative to the data scale
RIDGE_GRID = np.logspace(-4, 0, 5)
LASSO_GRID = np.logspace(-3, -1, 5)
# coordinate descent crawls on strongly collinear spectra; the benchmark trades
# the default 1e-8 stopping rule for a looser one with a larger pass budget
BENCH_LASSO = {"tol": 1e-6, "max_iter": 100_000}

SCENARIO_DEFAULTS = {
    "dsim": {"methods": "pls,dual-lasso,lasso,ridge,dual-ridge", "shrink": 0.99, "order": 6},
    "dsim-bar": {"methods": "ols,dual-ls", "shrink": 0.6, "order": 5},
    "file": {"methods": "pls,dual-lasso", "shrink": 0.99, "order": 6},
}


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ helpers


def _need(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _load_xy(args):
    _need(args, "x", "y")
    X = load_csv(args.x, header=args.header)
    y = load_vector(args.y, header=args.header)
    if X.shape[0] != y.size:
        raise UsageError(f"{args.x} has {X.shape[0]} rows but {args.y} has {y.size}")
    if args.sg:
        X = savitzky_golay_derivative(X, SG_WINDOW, SG_DEGREE)
    return X, y


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _write_rows(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, float) else v for v in row])


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def make_spec(method, n_vars, shrink=0.0, nu2=None, t=None, gl_groups=None):
    """Penalty spec for a latent-component CLI method name."""
    if method == "pls":
        return PenaltySpec.pls()
    if method == "dual-lasso":
        return PenaltySpec.lasso(shrink)
    if method == "dual-gl":
        if gl_groups is None:
            raise UsageError("dual-gl needs --gl-groups")
        return PenaltySpec.group_lasso(shrink, GroupPartition.contiguous(n_vars, gl_groups))
    if method == "dual-ls":
        return PenaltySpec.ls(shrink)
    if method == "dual-ridge":
        if nu2 is None and t is None:
            raise UsageError("dual-ridge needs --nu2 or --t")
        return PenaltySpec.ridge(shrink, nu2 if nu2 is not None else 1.0 / t)
    raise UsageError(f"unknown latent method {method!r}")


def fit_method(method, X, y, ncomp, shrink=0.0, nu2=None, t=None, gl_groups=None, lasso_options=None):
    if method in BASELINES:
        if method != "ols" and t is None:
            raise UsageError(f"{method} needs --t")
        options = (lasso_options or {}) if method == "lasso" else {}
        return fit_baseline(method, X, y, t, **options)
    spec = make_spec(method, X.shape[1], shrink, nu2, t, gl_groups)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return fit(X, y, spec, ncomp)


def _data_scale(X):
    Xc = X - X.mean(axis=0)
    return float(np.einsum("ij,ij->", Xc, Xc)) / X.shape[1]


def ridge_grid(X):
    return _data_scale(X) * RIDGE_GRID


def lasso_grid(X, y):
    Xc = X - X.mean(axis=0)
    return float(np.abs(Xc.T @ (y - y.mean())).max()) * LASSO_GRID


# ------------------------------------------------------------------ commands


def cmd_simulate(args):
    _need(args, "out_dir")
    if args.recipe is not None:
        with open(args.recipe, encoding="utf-8") as fh:
            recipe = SimulationRecipe.from_json(fh.read())
    else:
        _need(args, "preset")
        recipe = preset(args.preset, seed=args.seed)
    data = simulate(recipe)
    out = _ensure_dir(args.out_dir)
    save_csv(os.path.join(out, "X.csv"), data.X)
    save_csv(os.path.join(out, "y.csv"), data.y)
    save_csv(os.path.join(out, "truth.csv"), data.true_beta)
    with open(os.path.join(out, "recipe.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(recipe.to_json() + "\n")
    print(f"wrote {data.X.shape[0]}x{data.X.shape[1]} X to {out}")


def cmd_split(args):
    X, y = _load_xy(args)
    _need(args, "out")
    n_cal = args.n_cal if args.n_cal is not None else CvPlan().n_cal(X.shape[0])
    plan = split(args.method, X, y, n_cal, rng=args.seed, n_groups=args.n_groups)
    plan.to_csv(args.out)
    print(f"{plan.calibration.size} calibration / {plan.validation.size} validation rows")


def cmd_fit(args):
    X, y = _load_xy(args)
    _need(args, "method", "out_dir")
    ncomp = args.ncomp if args.ncomp is not None else 1
    model = fit_method(args.method, X, y, ncomp, args.shrink, args.nu2, args.t, args.gl_groups)
    params = dict(model.params)
    params["cli_method"] = args.method
    if args.sg:
        params["sg"] = {"window": SG_WINDOW, "degree": SG_DEGREE}
    model = dataclasses.replace(model, params=params)
    out = _ensure_dir(args.out_dir)
    model.save(os.path.join(out, "model.json"))
    rows = [
        (k, j + 1, float(b)) for k in range(1, model.n_components + 1) for j, b in enumerate(model.coefs[k - 1])
    ]
    _write_rows(os.path.join(out, "coefficients.csv"), ["order", "variable", "beta"], rows)
    beta = model.coefs[-1]
    print(f"{args.method}: {model.n_components} component(s), l0 = {l0(beta)} of {beta.size}")


def cmd_predict(args):
    _need(args, "model", "x", "out")
    model = load_model(args.model)
    X = load_csv(args.x, header=args.header)
    if args.sg or "sg" in model.params:
        X = savitzky_golay_derivative(X, SG_WINDOW, SG_DEGREE)
    save_csv(args.out, model.predict(X, args.order))


def cmd_cv(args):
    X, y = _load_xy(args)
    _need(args, "method", "out_dir")
    if args.method not in LATENT_METHODS:
        raise UsageError(f"cv selects the number of components; {args.method} has none")
    spec = make_spec(args.method, X.shape[1], args.shrink, args.nu2, args.t, args.gl_groups)
    plan = CvPlan(n_splits=args.splits, calibration_fraction=args.fraction, seed=args.seed, splitter=args.splitter)
    m_max = min(args.max_ncomp, plan.n_cal(X.shape[0]) - 1, X.shape[1])
    result = select_components(X, y, spec, m_max, plan)
    result.to_csv(os.path.join(_ensure_dir(args.out_dir), "mse_table.csv"))
    print(result.m_best)


def _benchmark_data(args):
    if args.scenario == "file":
        X, y = _load_xy(args)
        return X, y, None
    X_args = (args.x, args.y)
    if any(a is not None for a in X_args):
        raise UsageError("--x/--y only apply to --scenario file")
    data = simulate(preset(args.scenario, seed=args.seed))
    X = savitzky_golay_derivative(data.X, SG_WINDOW, SG_DEGREE) if args.sg else data.X
    return X, data.y, data


def cmd_benchmark(args):
    _need(args, "scenario", "out_dir")
    defaults = SCENARIO_DEFAULTS[args.scenario]
    methods = [m.strip() for m in (args.methods or defaults["methods"]).split(",") if m.strip()]
    for m in methods:
        if m not in ALL_METHODS:
            raise UsageError(f"unknown method {m!r}; expected one of {ALL_METHODS}")
    shrink = args.shrink if args.shrink is not None else defaults["shrink"]
    X, y, data = _benchmark_data(args)
    n = X.shape[0]
    n_cal = int(round(args.fraction * n))
    sp = split("calvalxy", X, y, n_cal, n_groups=args.n_groups)
    Xc, yc = X[sp.calibration], y[sp.calibration]
    Xv, yv = X[sp.validation], y[sp.validation]
    m_max = min(args.max_ncomp, n_cal - 1, X.shape[1])
    order = min(args.order if args.order is not None else defaults["order"], m_max)
    plan = CvPlan(n_splits=args.splits, seed=args.seed)

    tuned = {}

    def penalty(kind):
        # CV-tuned baseline penalty, computed once and shared with dual-ridge
        if args.t is not None:
            return args.t
        if kind not in tuned:
            grid = ridge_grid(Xc) if kind == "ridge" else lasso_grid(Xc, yc)
            options = BENCH_LASSO if kind == "lasso" else {}
            tuned[kind] = select_hyperparameter(Xc, yc, kind, grid, plan, **options).best
        return tuned[kind]

    models, summary_methods = {}, {}
    for m in methods:
        info = {"status": "ok"}
        try:
            t = nu2 = None
            if m in ("ridge", "lasso"):
                t = penalty(m)
                info["t"] = t
            elif m == "dual-ridge":
                t = penalty("ridge")
                nu2 = args.nu2 if args.nu2 is not None else 1.0 / t
                info["nu2"] = nu2
            if m not in BASELINES and m != "pls":
                info["shrink"] = shrink
            model = fit_method(m, Xc, yc, m_max, shrink, nu2, t, args.gl_groups, BENCH_LASSO)
        except (DualSPLSError, ArithmeticError, ValueError) as exc:
            info = {"status": "error", "error": type(exc).__name__, "message": str(exc)}
            summary_methods[m] = info
            continue
        models[m] = model
        k = 1 if m in BASELINES else min(order, model.n_components)
        beta = model.coefs[k - 1]
        tol = support_tolerance(m, beta)
        info.update(n_components=model.n_components, order_used=k, l0=l0(beta, tol),
                    rank_exhausted=model.rank_exhausted)
        if data is not None:
            info["recovery"] = recovery_score(beta, data.recipe.active_set, tol).as_dict()
        summary_methods[m] = info

    out = _ensure_dir(args.out_dir)
    rows = metric_table(models, Xc, yc, Xv, yv, m_max)
    _write_rows(
        os.path.join(out, "rmse_vs_components.csv"),
        ["method", "order", "set", "rmse", "mae", "r2"],
        [(r["method"], r["order"], r["set"], r["rmse"], r["mae"], r["r2"]) for r in rows],
    )
    stack, sparsity = [], []
    for m, model in models.items():
        info = summary_methods[m]
        beta = model.coefs[info["order_used"] - 1]
        stack.extend((m, j + 1, float(b)) for j, b in enumerate(beta))
        tol = support_tolerance(m, beta)
        sparsity.append((m, l0(beta, tol), l0_complement(beta, tol)))
        val = [r for r in rows if r["method"] == m and r["set"] == "validation" and r["order"] == info["order_used"]]
        info["validation_rmse"] = val[0]["rmse"]
    _write_rows(os.path.join(out, "coefficients_stack.csv"), ["method", "variable", "beta"], stack)
    _write_rows(os.path.join(out, "sparsity.csv"), ["method", "l0", "l0_complement"], sparsity)
    summary = {
        "scenario": args.scenario,
        "seed": args.seed,
        "n_obs": n,
        "n_vars": X.shape[1],
        "n_calibration": int(sp.calibration.size),
        "n_validation": int(sp.validation.size),
        "splitter": "calvalxy",
        "n_groups": args.n_groups,
        "max_components": m_max,
        "order": order,
        "savitzky_golay": bool(args.sg),
        "methods": summary_methods,
    }
    _write_json(os.path.join(out, "summary.json"), summary)
    failed = [m for m, i in summary_methods.items() if i["status"] != "ok"]
    print(f"benchmark {args.scenario}: {len(models)} method(s) fitted" + (f", failed: {','.join(failed)}" if failed else ""))


# ------------------------------------------------------------------ parser


def _add_data_flags(p, need_y=True):
    p.add_argument("--x", help="CSV of predictors, one observation per row")
    if need_y:
        p.add_argument("--y", help="single-column CSV response")
    p.add_argument("--header", action="store_true", default=None, help="skip one header row in CSV inputs")
    p.add_argument("--sg", action="store_true", default=None,
                   help=f"apply a Savitzky-Golay first derivative (window {SG_WINDOW}, degree {SG_DEGREE}) to X")


def _add_method_flags(p, methods):
    p.add_argument("--method", choices=methods)
    p.add_argument("--shrink", type=float, help="shrink ratio: fraction of variables zeroed per component")
    p.add_argument("--nu2", type=float, help="ridge weight of the dual-ridge penalty")
    p.add_argument("--t", type=float, help="ridge/lasso penalty; for dual-ridge nu2 defaults to 1/t")
    p.add_argument("--gl-groups", type=int, help="number of contiguous variable groups for dual-gl")


def build_parser():
    parser = argparse.ArgumentParser(prog="dualspls", description="Sparse PLS regression with dual-norm penalties.")
    parser.add_argument("--config", help="JSON file of flag values; command-line flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a simulated dataset")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--recipe", help="JSON recipe file (overrides --preset)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_simulate, seed=0)

    p = sub.add_parser("split", help="partition rows into calibration and validation sets")
    _add_data_flags(p)
    p.add_argument("--method", choices=SPLITTERS)
    p.add_argument("--n-cal", type=int, help="calibration size (default 80%% of rows)")
    p.add_argument("--n-groups", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output CSV (index, role)")
    p.set_defaults(func=cmd_split, method="calvalxy", n_groups=10, seed=0)

    p = sub.add_parser("fit", help="fit one model and write model.json and coefficients.csv")
    _add_data_flags(p)
    _add_method_flags(p, ALL_METHODS)
    p.add_argument("--ncomp", type=int, help="number of latent components")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_fit, shrink=0.0)

    p = sub.add_parser("predict", help="apply a saved model")
    p.add_argument("--model")
    _add_data_flags(p, need_y=False)
    p.add_argument("--order", type=int, help="number of components to use (default: all)")
    p.add_argument("--out", help="output CSV of predictions")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="cross-validate the number of components")
    _add_data_flags(p)
    _add_method_flags(p, LATENT_METHODS)
    p.add_argument("--max-ncomp", type=int)
    p.add_argument("--splits", type=int)
    p.add_argument("--fraction", type=float, help="calibration fraction per split")
    p.add_argument("--splitter", choices=SPLITTERS)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_cv, shrink=0.0, max_ncomp=10, splits=10, fraction=0.8, splitter="random", seed=0)

    p = sub.add_parser("benchmark", help="compare methods on a calibration/validation split")
    p.add_argument("--scenario", choices=sorted(SCENARIO_DEFAULTS))
    _add_data_flags(p)
    p.add_argument("--methods", help=f"comma-separated subset of {','.join(ALL_METHODS)}")
    p.add_argument("--shrink", type=float)
    p.add_argument("--nu2", type=float)
    p.add_argument("--t", type=float, help="fix the ridge/lasso penalty instead of cross-validating it")
    p.add_argument("--gl-groups", type=int)
    p.add_argument("--max-ncomp", type=int)
    p.add_argument("--order", type=int, help="order reported in coefficients_stack.csv and sparsity.csv (6; 5 for dsim-bar)")
    p.add_argument("--fraction", type=float)
    p.add_argument("--n-groups", type=int)
    p.add_argument("--splits", type=int, help="random splits used to tune baseline penalties")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_benchmark, max_ncomp=10, fraction=0.8, n_groups=10, splits=10,
                   seed=0, gl_groups=10)
    return parser


def _subparser(parser, name):
    for action in parser._subparsers._group_actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except json.JSONDecodeError as exc:
            parser.error(f"invalid config {args.config}: {exc}")
        if not isinstance(config, dict):
            parser.error("config must be a JSON object")
        config = {k.replace("-", "_"): v for k, v in config.items()}
        sub = _subparser(parser, args.command)
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(config) - known)
        if unknown:
            parser.error(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        sub.set_defaults(**config)
        args = parser.parse_args(argv)
    for flag in ("header", "sg"):
        if getattr(args, flag, None) is None and hasattr(args, flag):
            setattr(args, flag, False)
    return parser, args


def main(argv=None):
    try:
        parser, args = parse_args(argv)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DualSPLSError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
