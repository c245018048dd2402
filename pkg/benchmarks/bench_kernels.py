"""Time the numba kernels against their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on a fixed-seed input once to warm the JIT, then ``repeat``
times per implementation; the best wall time is reported along with the
max-abs difference between the two outputs.
"""

import argparse
import time

import numpy as np

from dualspls import _kernels


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def case_cd_sweep(rng):
    X = rng.standard_normal((240, 1000))
    X /= np.linalg.norm(X, axis=0)
    XT = np.ascontiguousarray(X.T)
    y = rng.standard_normal(240)
    thresh = np.full(1000, 0.05)
    scale = np.ones(1000)
    coords = np.arange(1000)

    def run(impl):
        beta = np.zeros(1000)
        resid = y.copy()
        for _ in range(5):
            impl.cd_sweep(XT, resid, beta, thresh, scale, coords)
        return beta

    return run


def case_grid_sse(rng):
    n_groups = 5
    U = rng.standard_normal((100, n_groups))
    gram_u = U.T @ U
    u_y = U.T @ rng.standard_normal(100)
    grid = np.tile(np.linspace(0.0, 1.0, 10), (n_groups, 1))

    def run(impl):
        return impl.grid_sse(gram_u, u_y, 100.0, grid)

    return run


def case_min_sq_dist(rng):
    X = rng.standard_normal((2000, 300))

    def run(impl):
        d = np.full(X.shape[0], np.inf)
        for idx in range(0, 2000, 100):
            impl.min_sq_dist_update(X, d, idx)
        return d

    return run


CASES = {
    "cd_sweep 240x1000, 5 passes": case_cd_sweep,
    "grid_sse 5 groups x 10 values": case_grid_sse,
    "min_sq_dist_update 2000x300, 20 rows": case_min_sq_dist,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _kernels.jit_impl is None:
        raise SystemExit("numba is not importable; nothing to compare")
    print(f"{'kernel':40s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, make in CASES.items():
        run = make(np.random.default_rng(0))
        ref = run(_kernels.numpy_impl)
        out = run(_kernels.jit_impl)  # compiles
        t_np = _best(lambda: run(_kernels.numpy_impl), args.repeat)
        t_jit = _best(lambda: run(_kernels.jit_impl), args.repeat)
        ref, out = np.asarray(ref), np.asarray(out)
        # equal infinities (vanishing grid scores) count as agreement
        with np.errstate(invalid="ignore"):
            diff = float(np.max(np.where(ref == out, 0.0, np.abs(ref - out))))
        print(f"{name:40s} {1e3 * t_np:11.3f} {1e3 * t_jit:11.3f} {t_np / t_jit:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
