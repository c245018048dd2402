import os
import subprocess
import sys

import numpy as np
import pytest

from dualspls import _kernels

from oracles import grid_search_brute

jit = pytest.mark.skipif(_kernels.jit_impl is None, reason="numba not importable")


def _cd_inputs(seed):
    r = np.random.default_rng(seed)
    X = r.standard_normal((30, 20))
    scale = np.linalg.norm(X, axis=0)
    XT = np.ascontiguousarray((X / scale).T)
    return XT, r.standard_normal(30), np.full(20, 0.3), scale


def test_cd_sweep_single_coordinate_is_soft_threshold():
    XT, y, thresh, scale = _cd_inputs(0)
    beta = np.zeros(20)
    resid = y.copy()
    _kernels.numpy_impl.cd_sweep(XT, resid, beta, thresh, scale, np.array([4]))
    rho = XT[4] @ y
    assert beta[4] == pytest.approx(np.sign(rho) * max(abs(rho) - 0.3, 0))
    np.testing.assert_allclose(resid, y - XT[4] * beta[4])


@jit
@pytest.mark.parametrize("seed", range(5))
def test_cd_sweep_parity(seed):
    XT, y, thresh, scale = _cd_inputs(seed)
    coords = np.random.default_rng(seed).permutation(20)[:12]
    outs = []
    for impl in (_kernels.numpy_impl, _kernels.jit_impl):
        beta, resid = np.zeros(20), y.copy()
        changes = [impl.cd_sweep(XT, resid, beta, thresh, scale, coords) for _ in range(4)]
        outs.append((beta, resid, changes))
    for a, b in zip(outs[0], outs[1]):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("impl", ["numpy_impl", "jit_impl"])
def test_grid_sse_matches_brute_force(impl):
    module = getattr(_kernels, impl)
    if module is None:
        pytest.skip("numba not importable")
    r = np.random.default_rng(1)
    U = r.standard_normal((25, 3))
    y = r.standard_normal(25)
    grid = np.tile(np.linspace(0, 1, 4), (3, 1)) * r.uniform(0.5, 2, (3, 1))
    out = module.grid_sse(U.T @ U, U.T @ y, float(y @ y), grid)
    ref = grid_search_brute(U, y, grid)
    assert np.isinf(out[0]) and np.isinf(ref[0])
    np.testing.assert_allclose(out[1:], ref[1:], rtol=1e-10)


@jit
def test_min_sq_dist_parity():
    X = np.random.default_rng(2).standard_normal((50, 7))
    a, b = np.full(50, np.inf), np.full(50, np.inf)
    for idx in (3, 17, 40):
        _kernels.numpy_impl.min_sq_dist_update(X, a, idx)
        _kernels.jit_impl.min_sq_dist_update(X, b, idx)
    np.testing.assert_allclose(a, b, rtol=1e-13)
    ref = np.min([((X - X[i]) ** 2).sum(1) for i in (3, 17, 40)], axis=0)
    np.testing.assert_allclose(a, ref, rtol=1e-13)


@pytest.mark.parametrize("value, expect", [("1", "numpy"), ("true", "numpy"), ("0", "jit"), ("", "jit")])
def test_env_flag_selects_path(value, expect):
    env = dict(os.environ, DUALSPLS_DISABLE_NUMBA=value)
    code = "from dualspls import _kernels as k; print('numpy' if k.active is k.numpy_impl else 'jit')"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    want = expect if _kernels.HAS_NUMBA else "numpy"
    assert out.stdout.strip() == want
