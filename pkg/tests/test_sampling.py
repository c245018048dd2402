import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualspls.sampling import calvalxy, kennard_stone, proportional_quotas, random_split, split, y_strata

from oracles import kennard_stone_brute


def check_partition(plan, n, n_cal):
    assert plan.calibration.size == n_cal
    assert np.intersect1d(plan.calibration, plan.validation).size == 0
    np.testing.assert_array_equal(np.sort(np.concatenate([plan.calibration, plan.validation])), np.arange(n))


def test_kennard_stone_collinear_extremes():
    X = np.arange(11.0)[:, None]
    assert set(kennard_stone(X, 2).calibration) == {0, 10}


def test_kennard_stone_leaves_one_point():
    X = np.random.default_rng(0).standard_normal((12, 3))
    plan = kennard_stone(X, 11)
    check_partition(plan, 12, 11)
    assert plan.validation.size == 1


def test_kennard_stone_ties_go_to_lowest_index():
    X = np.array([[0.0], [0.0], [4.0], [4.0], [2.0]])
    assert list(kennard_stone(X, 3).calibration) == [0, 2, 4]


@given(st.integers(0, 2**32 - 1), st.integers(2, 15))
def test_kennard_stone_matches_brute_force(seed, n_cal):
    X = np.random.default_rng(seed).standard_normal((20, 4))
    assert list(kennard_stone(X, n_cal).calibration) == kennard_stone_brute(X, n_cal)


def test_kennard_stone_replay_minmax():
    X = np.random.default_rng(1).standard_normal((25, 3))
    picked = list(kennard_stone(X, 10).calibration)
    for step in range(1, 10):
        chosen = picked[:step]
        d = np.min(((X[:, None, :] - X[chosen][None, :, :]) ** 2).sum(-1), axis=1)
        d[chosen] = -np.inf
        assert d[picked[step]] >= d.max()


def test_calvalxy_single_group_is_kennard_stone():
    r = np.random.default_rng(2)
    X, y = r.standard_normal((30, 5)), r.standard_normal(30)
    np.testing.assert_array_equal(calvalxy(X, y, 12, n_groups=1).calibration, kennard_stone(X, 12).calibration)


def test_calvalxy_two_clusters():
    r = np.random.default_rng(3)
    X = r.standard_normal((20, 3))
    y = np.concatenate([r.normal(0, 0.1, 10), r.normal(100, 0.1, 10)])
    cal = calvalxy(X, y, 4, n_groups=2).calibration
    assert np.sum(y[cal] < 50) == 2 and np.sum(y[cal] > 50) == 2


def apportion_oracle(sizes, total):
    # Hamilton's method with exact rational arithmetic
    from fractions import Fraction

    n = sum(sizes)
    exact = [Fraction(total * s, n) for s in sizes]
    quotas = [int(e) for e in exact]
    order = sorted(range(len(sizes)), key=lambda i: (-(exact[i] - quotas[i]), i))
    for i in order[: total - sum(quotas)]:
        quotas[i] += 1
    return quotas


@given(st.lists(st.integers(1, 40), min_size=1, max_size=8), st.data())
def test_quotas_match_hamilton(sizes, data):
    total = data.draw(st.integers(0, sum(sizes)))
    assert list(proportional_quotas(sizes, total)) == apportion_oracle(sizes, total)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(6, 40))
def test_calvalxy_contract(seed, n_groups, n_cal):
    r = np.random.default_rng(seed)
    X, y = r.standard_normal((50, 4)), r.standard_normal(50)
    plan = calvalxy(X, y, n_cal, n_groups=n_groups)
    check_partition(plan, 50, n_cal)
    d = ((X - X.mean(axis=0)) ** 2).sum(1)
    assert plan.calibration[0] == int(np.argmax(d))
    strata = y_strata(y, n_groups)
    quotas = proportional_quotas(np.bincount(strata), n_cal)
    if quotas[strata[plan.calibration[0]]] > 0:
        np.testing.assert_array_equal(np.bincount(strata[plan.calibration], minlength=n_groups), quotas)


def test_calvalxy_is_deterministic():
    r = np.random.default_rng(4)
    X, y = r.standard_normal((40, 3)), r.standard_normal(40)
    np.testing.assert_array_equal(calvalxy(X, y, 30).calibration, calvalxy(X, y, 30).calibration)


def test_y_strata_equal_frequency():
    strata = y_strata(np.array([5.0, 1.0, 3.0, 2.0, 4.0, 0.0]), 3)
    np.testing.assert_array_equal(strata, [2, 0, 1, 1, 2, 0])
    with pytest.raises(ValueError):
        y_strata(np.zeros(3), 4)


def test_random_split_and_dispatch(tmp_path):
    plan = random_split(10, 7, rng=0)
    check_partition(plan, 10, 7)
    np.testing.assert_array_equal(plan.calibration, random_split(10, 7, rng=0).calibration)
    with pytest.raises(ValueError):
        random_split(10, 10)
    with pytest.raises(ValueError):
        split("stratified", np.zeros((4, 1)), np.zeros(4), 2)
    plan.to_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "index,role" and len(lines) == 11
    assert sum(line.endswith(",cal") for line in lines) == 7
