import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualspls.errors import RankExhausted
from dualspls.penalties import GroupPartition
from dualspls.pls import PenaltySpec, fit, load_model, model_from_dict, predict

from oracles import pls1_nipals

SPECS = [
    PenaltySpec.pls(),
    PenaltySpec.lasso(0.7),
    PenaltySpec.group_lasso(0.5, GroupPartition.contiguous(20, 2)),
    PenaltySpec.ls(0.5),
    PenaltySpec.ridge(0.5, 2.0),
]


def data(seed, n=40, p=20, noise=0.1):
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, p)) + 3.0
    beta = np.zeros(p)
    beta[:4] = [2.0, -1.0, 1.5, 0.5]
    return X, X @ beta + noise * r.standard_normal(n) + 1.0


def test_spec_validation():
    with pytest.raises(ValueError):
        PenaltySpec("bogus")
    with pytest.raises(ValueError):
        PenaltySpec("pseudo_lasso", 1.0)
    with pytest.raises(ValueError):
        PenaltySpec("pseudo_group_lasso", 0.5)
    with pytest.raises(ValueError):
        PenaltySpec("pseudo_ridge", 0.5)
    with pytest.raises(ValueError):
        PenaltySpec.ridge(0.5, -1.0)
    with pytest.raises(ValueError):
        PenaltySpec("pseudo_lasso", (0.1, 0.2))


@given(st.integers(0, 2**32 - 1))
def test_plain_kind_matches_nipals(seed):
    X, y = data(seed)
    model = fit(X, y, PenaltySpec.pls(), 6)
    for k, ref in enumerate(pls1_nipals(X, y, 6), start=1):
        np.testing.assert_allclose(model.coefficients(k), ref, rtol=1e-8, atol=1e-10 * np.abs(ref).max())


def test_zero_shrink_lasso_is_plain_pls():
    X, y = data(1)
    a = fit(X, y, PenaltySpec.pls(), 5)
    b = fit(X, y, PenaltySpec.lasso(0.0), 5)
    np.testing.assert_allclose(b.coefs, a.coefs, rtol=0, atol=1e-12 * np.abs(a.coefs).max())


def test_reductions_between_kinds():
    X, y = data(2)
    lasso = fit(X, y, PenaltySpec.lasso(0.6), 4)
    ridge0 = fit(X, y, PenaltySpec.ridge(0.6, 0.0), 4)
    group1 = fit(X, y, PenaltySpec.group_lasso(0.6, GroupPartition(np.ones(20, dtype=int))), 4)
    np.testing.assert_allclose(ridge0.coefs, lasso.coefs, atol=1e-10)
    np.testing.assert_allclose(group1.coefs, lasso.coefs, atol=1e-10)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
def test_scores_orthogonal_and_rotations_reproduce_them(spec):
    X, y = data(3)
    model = fit(X, y, spec, 5)
    T = model.scores
    G = T.T @ T
    off = G - np.diag(np.diag(G))
    assert np.abs(off).max() <= 1e-10 * np.diag(G).max()
    Xc = X - X.mean(axis=0)
    np.testing.assert_allclose(Xc @ model.rotations, T, atol=1e-9 * np.abs(T).max())


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
def test_fitted_values_match_predict(spec):
    X, y = data(4)
    model = fit(X, y, spec, 4)
    for k in range(1, 5):
        np.testing.assert_allclose(model.predict(X, k), model.fitted[:, k - 1], atol=1e-9)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
def test_coefficient_support_within_weight_supports(spec):
    X, y = data(5)
    model = fit(X, y, spec, 4)
    used = np.zeros(X.shape[1], dtype=bool)
    for k in range(4):
        used |= model.weights[:, k] != 0
        assert not np.any((model.coefs[k] != 0) & ~used)


def test_lasso_weights_exactly_sparse():
    X, y = data(6, p=50)
    model = fit(X, y, PenaltySpec.lasso(0.9), 3)
    assert [int(np.count_nonzero(model.weights[:, k])) for k in range(3)] == [5, 5, 5]


def test_full_order_plain_pls_is_ols():
    X, y = data(7, n=40, p=8)
    model = fit(X, y, PenaltySpec.pls(), 8)
    Xc = X - X.mean(axis=0)
    ols = np.linalg.lstsq(Xc, y - y.mean(), rcond=None)[0]
    np.testing.assert_allclose(model.coefficients(), ols, rtol=1e-8)


def test_shifting_data_only_moves_the_intercept():
    X, y = data(8)
    a = fit(X, y, PenaltySpec.lasso(0.5), 3)
    b = fit(X + 10.0, y - 4.0, PenaltySpec.lasso(0.5), 3)
    np.testing.assert_allclose(b.coefs, a.coefs, atol=1e-10)
    np.testing.assert_allclose(b.predict(X + 10.0), a.predict(X) - 4.0, atol=1e-9)


def test_order_and_shape_checks():
    X, y = data(9)
    model = fit(X, y, PenaltySpec.pls(), 3)
    with pytest.raises(ValueError):
        model.predict(X, 4)
    with pytest.raises(ValueError):
        model.predict(X[:, :5])
    with pytest.raises(ValueError):
        fit(X, y, PenaltySpec.pls(), 0)
    with pytest.raises(ValueError):
        fit(X, y, PenaltySpec.pls(), 40)
    with pytest.raises(ValueError):
        fit(X, y, PenaltySpec.group_lasso(0.5, GroupPartition.contiguous(10, 2)), 2)


def test_rank_exhaustion_truncates_or_raises(rng):
    A = rng.standard_normal((30, 2))
    X = A @ rng.standard_normal((2, 10))
    y = A @ [1.0, -2.0]
    with pytest.warns(RuntimeWarning, match="exhausted"):
        model = fit(X, y, PenaltySpec.pls(), 5)
    assert model.n_components <= 2 and model.rank_exhausted
    np.testing.assert_allclose(model.predict(X), y, atol=1e-8)
    with pytest.raises(RankExhausted) as info:
        fit(X, y, PenaltySpec.pls(), 5, strict=True)
    assert info.value.n_valid == model.n_components


def test_constant_response_has_no_component():
    X, _ = data(10)
    with pytest.raises(RankExhausted):
        fit(X, np.full(40, 3.0), PenaltySpec.pls(), 2)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
def test_json_round_trip(spec, tmp_path):
    X, y = data(11)
    model = fit(X, y, spec, 3)
    path = tmp_path / "model.json"
    model.save(path)
    back = load_model(path)
    assert back.method == model.method and back.spec == model.spec
    np.testing.assert_array_equal(back.coefs, model.coefs)
    np.testing.assert_array_equal(predict(back, X), predict(model, X))
    again = model_from_dict(back.to_dict())
    np.testing.assert_array_equal(again.coefs, model.coefs)


def test_fit_is_deterministic():
    X, y = data(12)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a = fit(X, y, PenaltySpec.group_lasso(0.4, GroupPartition.contiguous(20, 4)), 4)
        b = fit(X, y, PenaltySpec.group_lasso(0.4, GroupPartition.contiguous(20, 4)), 4)
    np.testing.assert_array_equal(a.coefs, b.coefs)
