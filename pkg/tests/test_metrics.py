import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn import metrics as skm

from dpgraphgen.metrics import (HIGHER_IS_BETTER, METRICS, ami, ari, avg_f1, check_range, degenerate_denominator,
                                hellinger, kl_divergence, ks_statistic, mae, mean_relative_error, mse, nmi,
                                partition_scores, relative_error)


def test_metric_names():
    assert len(METRICS) == 11
    assert HIGHER_IS_BETTER == {"Avg-F1", "ARI", "AMI", "NMI"}


def test_relative_error_examples():
    assert relative_error(10, 9) == pytest.approx(0.1)
    assert relative_error(3.3, 3.3) == 0
    assert relative_error(0, 5) == pytest.approx(5e12)
    assert degenerate_denominator(0) and not degenerate_denominator(1)


def test_mre_examples():
    assert mean_relative_error([1, 2], [1, 2]) == 0
    assert mean_relative_error([1, 2], [2, 2]) == 0.5
    assert mean_relative_error([1, 2], [2, 2], relative=True) == 0.5
    r = np.random.default_rng(0)
    a, b = r.random(100), r.random(100)
    assert mean_relative_error(a, b) == pytest.approx(sum(abs(x - y) for x, y in zip(a, b)) / 100, abs=1e-15)
    with pytest.raises(ValueError):
        mean_relative_error([1], [1, 2])


def test_kl_examples():
    p = np.array([0.2, 0.3, 0.5])
    assert kl_divergence(p, p) == pytest.approx(0, abs=1e-7)
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-6)
    r = np.random.default_rng(1)
    for _ in range(1000):
        assert kl_divergence(r.random(5), r.random(7)) >= 0


def test_hd_ks_examples():
    p = np.array([0.1, 0.9])
    assert hellinger(p, p) == 0 and ks_statistic(p, p) == 0
    assert hellinger([1, 0], [0, 1]) == pytest.approx(1) and ks_statistic([1, 0], [0, 1]) == 1
    r = np.random.default_rng(2)
    for _ in range(50):
        a, b = r.random(6), r.random(6)
        a, b = a / a.sum(), b / b.sum()
        hd = math.sqrt(sum((math.sqrt(x) - math.sqrt(y)) ** 2 for x, y in zip(a, b)) / 2)
        ks = max(abs(sum(a[:i + 1]) - sum(b[:i + 1])) for i in range(6))
        assert hellinger(a, b) == pytest.approx(hd, abs=1e-12)
        assert ks_statistic(a, b) == pytest.approx(ks, abs=1e-12)


def test_mae_mse_examples():
    assert mae([1, 2], [1, 2]) == 0 and mse([1, 2], [1, 2]) == 0
    assert mae([0, 1], [1, 1]) == 0.5 and mse([0, 1], [1, 1]) == 0.5
    r = np.random.default_rng(3)
    a, b = r.random(1000), r.random(1000)
    assert mae(a, b) == pytest.approx(sum(abs(x - y) for x, y in zip(a, b)) / 1000, abs=1e-12)
    assert mse(a, b) == pytest.approx(sum((x - y) ** 2 for x, y in zip(a, b)) / 1000, abs=1e-12)
    assert mae([1, 1, 1], [1]) == pytest.approx(2 / 3)


def test_partition_examples():
    p = np.array([0, 0, 1, 1, 2])
    s, flags = partition_scores(p, p)
    assert s == {"NMI": 1.0, "ARI": 1.0, "AMI": 1.0, "Avg-F1": 1.0} and flags == []
    assert nmi(np.zeros(10, int), np.arange(10)) == 0
    s, flags = partition_scores(np.array([0, 0, 1]), np.array([0, 0, 1, 1]))
    assert flags == ["node-set-mismatch"] and s["NMI"] == 1.0


def test_partitions_vs_sklearn():
    r = np.random.default_rng(4)
    for _ in range(50):
        a, b = r.integers(0, 4, 30), r.integers(0, 5, 30)
        assert nmi(a, b) == pytest.approx(skm.normalized_mutual_info_score(a, b), abs=1e-9)
        assert ari(a, b) == pytest.approx(skm.adjusted_rand_score(a, b), abs=1e-9)
        assert ami(a, b) == pytest.approx(max(0.0, skm.adjusted_mutual_info_score(a, b)), abs=1e-9)


def test_avg_f1_oracle():
    r = np.random.default_rng(5)
    for _ in range(20):
        a, b = r.integers(0, 3, 25), r.integers(0, 4, 25)

        def best(x, y):
            out = []
            for c in np.unique(x):
                A = set(np.flatnonzero(x == c))
                f = [2 * len(A & set(np.flatnonzero(y == d))) / (len(A) + np.sum(y == d)) for d in np.unique(y)]
                out.append(max(f))
            return np.mean(out)

        assert avg_f1(a, b) == pytest.approx((best(a, b) + best(b, a)) / 2, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=1, max_size=12), st.lists(st.floats(0, 10), min_size=1, max_size=12))
def test_distribution_metric_properties(p, q):
    if sum(p) <= 0 or sum(q) <= 0:
        return
    kl, hd, ks = kl_divergence(p, q), hellinger(p, q), ks_statistic(p, q)
    assert check_range("KL", kl) and check_range("HD", hd) and check_range("KS", ks)
    assert hd == pytest.approx(hellinger(q, p), abs=1e-12)
    assert ks == pytest.approx(ks_statistic(q, p), abs=1e-12)
    assert hellinger(p, p) == pytest.approx(0, abs=1e-7) and ks_statistic(p, p) == pytest.approx(0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=2, max_size=25), st.data())
def test_partition_metric_properties(a, data):
    b = data.draw(st.lists(st.integers(0, 4), min_size=len(a), max_size=len(a)))
    a, b = np.array(a), np.array(b)
    s, _ = partition_scores(a, b)
    t, _ = partition_scores(b, a)
    for k, v in s.items():
        assert check_range(k, v)
        assert v == pytest.approx(t[k], abs=1e-9)
    ident, _ = partition_scores(a, a)
    assert all(v == pytest.approx(1.0) for v in ident.values())


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=20), st.data())
def test_vector_metric_properties(a, data):
    b = data.draw(st.lists(st.floats(-100, 100), min_size=len(a), max_size=len(a)))
    for f, name in ((mae, "MAE"), (mse, "MSE")):
        assert check_range(name, f(a, b)) and f(a, b) == f(b, a) and f(a, a) == 0
    assert check_range("MRE", mean_relative_error(a, b)) and mean_relative_error(a, a) == 0
    assert check_range("RE", relative_error(a[0], b[0])) and relative_error(a[0], a[0]) == 0
