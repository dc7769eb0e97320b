import numpy as np
import pytest
from scipy.special import i0

from lambdamem.bound import bound_report, eta_opt, kernel_matrix
from lambdamem.errors import InvalidArgumentError

# dense eigensolve of the d = 1 kernel on a 1000-point grid, frozen
GOLDEN_D1_N1000 = 0.3304778177274717


def test_diagonal_at_origin():
    km = kernel_matrix(10, 200)
    assert km.matrix[0, 0] == pytest.approx(5.0 * km.weights[0], rel=1e-14)


def test_symmetry_and_finite_at_large_depth():
    km = kernel_matrix(50, 300)
    assert np.max(np.abs(km.matrix - km.matrix.T)) == 0.0
    assert np.all(np.isfinite(km.matrix)) and np.all(km.matrix >= 0)


def test_kernel_matches_unscaled_formula_at_small_depth():
    d = 3.0
    km = kernel_matrix(d, 150)
    z = km.nodes
    raw = d / 2 * np.exp(-d * (z[:, None] + z[None, :]) / 2) * i0(d * np.sqrt(np.outer(z, z)))
    np.testing.assert_allclose(km.matrix, raw * np.sqrt(np.outer(km.weights, km.weights)), rtol=1e-10)


def test_grid_refinement():
    assert abs(eta_opt(10, 500) - eta_opt(10, 1000)) < 1e-4


def test_golden_value_d1():
    assert eta_opt(1, 1000) == pytest.approx(GOLDEN_D1_N1000, abs=1e-10)


@pytest.mark.parametrize("d", [1, 5, 50])
@pytest.mark.parametrize("n", [100, 500])
def test_power_matches_dense(d, n):
    assert abs(eta_opt(d, n) - eta_opt(d, n, method="dense")) < 1e-8


def test_reference_value_d50():
    rep = bound_report(50)
    assert abs(rep.eta_opt - 0.952) <= 0.002
    assert abs(rep.eta_opt_total - 0.906) <= 0.004
    assert rep.richardson_delta < 1e-4


def test_monotone_in_depth_and_bounded():
    vals = [eta_opt(d, 600) for d in (1, 2, 5, 10, 20, 50)]
    assert all(0 < v < 1 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("d,n", [(0, 200), (-1, 200), (5, 50)])
def test_domain_errors(d, n):
    with pytest.raises(InvalidArgumentError):
        kernel_matrix(d, n)
