import math

import numpy as np
import pytest

from fracmap.bifurcation import (
    BifurcationPoint,
    cascade,
    doubling_guess,
    feigenbaum_ratios,
    matrix_A,
    residual_bif,
    solve_bifurcation,
)
from fracmap.maps import MapSpec, logistic_map
from fracmap.periodic import solve_period_l
from fracmap.specfun import DomainError

ALPHA_GRID = [round(0.1 * k, 1) for k in range(1, 10)]


def lu_det(a):
    """Determinant by Doolittle elimination with partial pivoting."""
    a = np.array(a, dtype=float)
    n = len(a)
    det = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0.0:
            return 0.0
        if p != k:
            a[[k, p]] = a[[p, k]]
            det = -det
        det *= a[k, k]
        a[k + 1 :, k:] -= np.outer(a[k + 1 :, k] / a[k, k], a[k, k:])
    return det


@pytest.fixture(scope="module")
def cascade_half():
    return cascade(logistic_map(3.0), 0.5, 4)


@pytest.mark.parametrize("K", [2.2, 2.5, 3.0])
def test_matrix_A_level_one_reduction(K):
    A = matrix_A(logistic_map(K), 0.5, 1, [1 - 1 / K])
    assert A.shape == (1, 1)
    assert A[0, 0] == pytest.approx(1 - (K - 1) * 2**-0.5, abs=1e-14)


def test_matrix_A_classic_limit():
    A = matrix_A(logistic_map(3.0), 0.999999, 1, [2 / 3])
    assert abs(A[0, 0]) <= 1e-5


def test_matrix_A_flat_map_is_identity():
    flat = MapSpec("flat", 1.0, lambda K, x: 0.25 + 0.0 * x, lambda K, x: 0.0 * x)
    for n in (1, 2, 3):
        xs = np.linspace(0.1, 0.9, 2 ** (n - 1))
        np.testing.assert_array_equal(matrix_A(flat, 0.4, n, xs), np.eye(2 ** (n - 1)))


def test_matrix_A_dimension_mismatch():
    with pytest.raises(DomainError):
        matrix_A(logistic_map(3.0), 0.5, 2, [0.5])


def test_residual_bif_level_one():
    K = 1 + 2**0.5
    rows = residual_bif(logistic_map(K), 0.5, 1, [1 - 1 / K], K)
    assert rows.shape == (2,)
    assert np.max(np.abs(rows)) <= 1e-14
    x = 1 - 1 / K
    off = residual_bif(logistic_map(K), 0.5, 1, [x], 2.0)
    assert off[0] != 0.0
    assert off[-1] == pytest.approx(1 - 2**-0.5 * (1 - 2.0 + 4.0 * x), abs=1e-14)


@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_first_bifurcation_closed_form(alpha):
    K = 1 + 2**alpha
    bp = solve_bifurcation(logistic_map(2.4), alpha, 1, [0.58], 2.4)
    assert bp.converged
    assert abs(bp.K_bif - K) <= 1e-10
    assert bp.points[0] == pytest.approx(1 - 1 / K, abs=1e-10)
    assert abs(bp.det_A) <= 1e-10


def test_first_bifurcation_examples():
    assert solve_bifurcation(logistic_map(2.4), 0.5, 1, [0.58], 2.4).K_bif == pytest.approx(2.414213562373095, abs=1e-12)
    assert solve_bifurcation(logistic_map(2.8), 0.9, 1, [0.6], 2.8).K_bif == pytest.approx(2.866065983073615, abs=1e-12)
    assert abs(solve_bifurcation(logistic_map(3.0), 0.999, 1, [0.66], 3.0).K_bif - 3) <= 2e-3


def test_first_bifurcation_increases_with_order():
    Ks = [solve_bifurcation(logistic_map(2.4), a, 1, [0.58], 2.4).K_bif for a in ALPHA_GRID]
    assert all(a < b for a, b in zip(Ks, Ks[1:]))


def test_cascade_points_satisfy_system(cascade_half):
    for bp in cascade_half:
        assert bp.converged
        assert np.max(np.abs(residual_bif(logistic_map(bp.K_bif), 0.5, bp.n, bp.points, bp.K_bif))) <= 1e-11
        A = matrix_A(logistic_map(bp.K_bif), 0.5, bp.n, bp.points)
        assert abs(lu_det(A)) <= 1e-10
        assert lu_det(A) == pytest.approx(np.linalg.det(A), abs=1e-13)


def test_lu_det_helper():
    m = np.array([[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]])
    assert lu_det(m) == pytest.approx(np.linalg.det(m), rel=1e-14)


def test_cascade_half_levels(cascade_half):
    Ks = [bp.K_bif for bp in cascade_half]
    assert [bp.n for bp in cascade_half] == [1, 2, 3, 4]
    assert [bp.period for bp in cascade_half] == [1, 2, 4, 8]
    assert all(a < b for a, b in zip(Ks, Ks[1:]))
    assert Ks[0] == pytest.approx(1 + math.sqrt(2), abs=1e-12)


def test_split_from_bifurcation_point_grows_doubled_cycle(cascade_half):
    for bp in cascade_half:
        spec = logistic_map(bp.K_bif + 2e-4)
        base = solve_period_l(spec, 0.5, bp.period, bp.points)
        found = [
            solve_period_l(spec, 0.5, 2 * bp.period, doubling_guess(spec, 0.5, base.points, eps))
            for eps in (0.01, 0.02, 0.05)
        ]
        assert any(s.genuine for s in found), bp.n


def test_cascade_near_integer_order():
    Ks = [bp.K_bif for bp in cascade(logistic_map(3.0), 0.999, 3)]
    assert len(Ks) == 3
    np.testing.assert_allclose(Ks, [3.0, 3.449490, 3.544090], rtol=0, atol=5e-3)


def test_cascade_single_level():
    (bp,) = cascade(logistic_map(2.4), 0.5, 1)
    assert bp.K_bif == pytest.approx(1 + math.sqrt(2), abs=1e-12)
    assert bp.points[0] == pytest.approx(1 - 1 / (1 + math.sqrt(2)), abs=1e-12)


def test_cascade_rejects_bad_level():
    with pytest.raises(DomainError):
        cascade(logistic_map(3.0), 0.5, 0)


def test_feigenbaum_classic_values():
    (r,) = feigenbaum_ratios([3.0, 1 + math.sqrt(6), 3.544090])
    assert r == pytest.approx(4.7514, abs=1e-3)


def test_feigenbaum_from_cascade(cascade_half):
    ratios = feigenbaum_ratios(cascade_half)
    assert len(ratios) == 2
    assert all(1 < r < 20 for r in ratios)
    assert 4.669 / 2 <= ratios[-1] <= 2 * 4.669


def test_feigenbaum_errors():
    with pytest.raises(ZeroDivisionError):
        feigenbaum_ratios([2.0, 3.0, 3.0])
    with pytest.raises(DomainError):
        feigenbaum_ratios([2.0, 3.0])


def test_unconverged_point_is_flagged():
    bp = solve_bifurcation(logistic_map(3.0), 0.5, 1, [0.1], 9.0, max_iter=1)
    assert isinstance(bp, BifurcationPoint)
    assert not bp.converged
