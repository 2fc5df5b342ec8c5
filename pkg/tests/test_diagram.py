import math

import numpy as np
import pytest

from fracmap.diagram import CSV_COLUMNS, DiagramRecord, asymptotic_diagram, finite_time_diagram
from fracmap.maps import logistic_map
from fracmap.specfun import DomainError


def test_csv_columns():
    assert CSV_COLUMNS == ("K", "period", "point_index", "x", "source", "flag")


def test_fixed_point_branch():
    records = asymptotic_diagram(logistic_map(1.2), 0.5, 1.2, 2.4, 0.1, [1])
    assert len(records) == 13
    for r in records:
        assert (r.period, r.point_index, r.source, r.flag) == (1, 1, "asymptotic", "converged")
        assert r.x == pytest.approx(1 - 1 / r.K, abs=1e-12)


def test_period_two_window():
    K1 = 1 + 2**0.5
    records = asymptotic_diagram(logistic_map(2.5), 0.5, 2.5, 3.1, 0.1, [1, 2])
    fixed = [r for r in records if r.period == 1]
    pairs = [r for r in records if r.period == 2]
    assert len(fixed) == 7 and len(pairs) == 14
    assert all(r.K > K1 and r.flag == "degenerate" for r in fixed)
    assert all(r.flag == "converged" for r in pairs)
    for K in {r.K for r in pairs}:
        lo, hi = sorted(r.x for r in pairs if r.K == K)
        assert lo < 1 - 1 / K < hi


def test_below_first_doubling_period_two_is_degenerate():
    records = asymptotic_diagram(logistic_map(2.0), 0.5, 2.0, 2.3, 0.1, [2])
    assert records and all(r.flag == "degenerate" for r in records)


def test_empty_period_list():
    assert asymptotic_diagram(logistic_map(2.0), 0.5, 2.0, 2.3, 0.1, []) == []


@pytest.mark.parametrize("periods", [[3], [1, 32]])
def test_rejects_unsupported_periods(periods):
    with pytest.raises(DomainError):
        asymptotic_diagram(logistic_map(2.0), 0.5, 2.0, 2.3, 0.1, periods)


def test_rejects_non_positive_step():
    with pytest.raises(DomainError):
        asymptotic_diagram(logistic_map(2.0), 0.5, 2.0, 2.3, -0.1, [1])
    with pytest.raises(DomainError):
        finite_time_diagram(logistic_map(2.0), 0.5, 2.0, 2.3, 0.0)


def test_finite_time_classic_period_two():
    K = 3.2
    root = math.sqrt((K + 1) * (K - 3))
    pair = sorted([(K + 1 - root) / (2 * K), (K + 1 + root) / (2 * K)])
    assert pair == pytest.approx([0.5130445, 0.7994554], abs=1e-7)
    records = finite_time_diagram(logistic_map(K), 1.0, K, K, 0.1, 10**4, 32)
    assert len(records) == 32
    assert all(r.period == 0 and r.source == "finite_time" and r.flag == "converged" for r in records)
    xs = [r.x for r in records]
    for i, x in enumerate(xs):
        assert x == pytest.approx(pair[0] if x < 0.6 else pair[1], abs=1e-6)
        if i:
            assert (x < 0.6) != (xs[i - 1] < 0.6)


def test_finite_time_stable_regime():
    records = finite_time_diagram(logistic_map(2.2), 0.5, 2.2, 2.2, 0.1, 10**4, 32)
    assert all(abs(r.x - (1 - 1 / 2.2)) <= 1e-2 for r in records)


def test_finite_time_keep_zero():
    assert finite_time_diagram(logistic_map(3.2), 1.0, 3.2, 3.2, 0.1, 100, 0) == []


def test_finite_time_requires_keep_below_length():
    with pytest.raises(DomainError):
        finite_time_diagram(logistic_map(3.2), 1.0, 3.2, 3.2, 0.1, 100, 100)


def test_finite_time_divergence_flag():
    records = finite_time_diagram(logistic_map(6.0), 0.5, 6.0, 6.0, 0.1, 500, 4)
    assert records and all(r.flag == "unconverged" for r in records)


def test_finite_time_approaches_asymptotic_cycle():
    K = 2.8
    (lo, hi) = sorted(r.x for r in asymptotic_diagram(logistic_map(K), 0.5, K, K, 0.1, [2]))
    distances = []
    for n_iter in (10**3, 10**4, 10**5):
        xs = np.array([r.x for r in finite_time_diagram(logistic_map(K), 0.5, K, K, 0.1, n_iter, 32)])
        mid = 0.5 * (lo + hi)
        centers = (xs[xs < mid].mean(), xs[xs >= mid].mean())
        distances.append(max(abs(centers[0] - lo), abs(centers[1] - hi)))
    assert distances[0] > distances[1] > distances[2]


def test_output_order_is_deterministic():
    records = asymptotic_diagram(logistic_map(2.5), 0.5, 2.5, 2.9, 0.2, [2, 1])
    assert records == sorted(records, key=DiagramRecord.sort_key)
    assert records == asymptotic_diagram(logistic_map(2.5), 0.5, 2.5, 2.9, 0.2, [1, 2])


def test_parallel_matches_serial():
    args = (logistic_map(2.0), 0.5, 2.0, 2.6, 0.1, 2000, 4)
    assert finite_time_diagram(*args, jobs=3) == finite_time_diagram(*args)
