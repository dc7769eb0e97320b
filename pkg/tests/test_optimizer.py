import math

import numpy as np
import pytest

from lambdamem.fields import ControlParams, MemoryParams
from lambdamem.optimizer import (
    from_coords,
    nelder_mead,
    objective,
    optimize_control,
    optimize_theta_only,
    protocol_seeds,
    to_coords,
)
from lambdamem.solver import solve
from oracles import grid_search_max


def test_nm_quadratic_bowl():
    res = nelder_mead(lambda x: -((x[0] - 1) ** 2) - (x[1] - 2) ** 2 - (x[2] + 3) ** 2,
                      [0, 0, 0], ftol=1e-14, max_evals=4000, maximize=True)
    assert res.converged
    np.testing.assert_allclose(res.x, [1, 2, -3], atol=1e-4)


def test_nm_rosenbrock():
    def rosen(x):
        return 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2

    res = nelder_mead(rosen, [-1.2, 1.0], ftol=1e-14, max_evals=5000)
    _, grid_arg = grid_search_max(lambda p: -rosen(p), [np.linspace(0.9, 1.1, 201)] * 2)
    np.testing.assert_allclose(res.x, grid_arg, atol=1e-3)
    np.testing.assert_allclose(res.x, [1, 1], atol=1e-3)


def test_nm_constant_objective():
    x0 = np.array([0.3, -0.2, 1.0])
    res = nelder_mead(lambda x: 7.0, x0)
    assert res.converged and res.n_evals == 4
    np.testing.assert_array_equal(res.x, x0)


def test_nm_budget_exhaustion_is_not_an_error():
    res = nelder_mead(lambda x: float(np.sum(x**2)), [5.0, 5.0], ftol=0.0, max_evals=20)
    assert not res.converged
    assert 20 <= res.n_evals <= 23


def test_objective_trivial_cases():
    m = MemoryParams(10, 0.5)
    assert objective(m, ControlParams(0.0, 0.0, 0.5)) == 0.0
    g = ControlParams(2 * math.pi, 0.0, 0.5)
    assert objective(m, g) == objective(m, g) == solve(m, g).eta


def test_coordinate_round_trip():
    m = MemoryParams(5, 0.4)
    g = ControlParams(3.0, -0.1, 0.7)
    back = from_coords(m, to_coords(m, g))
    assert back.theta == pytest.approx(3.0) and back.delay == pytest.approx(-0.1) and back.tau_ctrl == pytest.approx(0.7)


@pytest.fixture(scope="module")
def eit_point():
    m = MemoryParams(50, 1.5)
    return m, optimize_control(m)


def test_eit_asymptotes(eit_point):
    m, opt = eit_point
    t = m.tau_sig
    assert abs(opt.best_g.delay - (-0.55 * t)) <= 0.1 * t
    assert abs(opt.best_g.tau_ctrl - 1.33 * t) <= 0.15 * t


def test_reevaluation_and_seed_dominance(eit_point):
    m, opt = eit_point
    assert objective(m, opt.best_g) == pytest.approx(opt.eta, abs=1e-10)
    for g in protocol_seeds(m).values():
        assert opt.eta >= objective(m, g)
    assert 0 <= opt.eta_ratio <= 1 + 5e-3
    assert not opt.exceeds_bound


def test_beats_coarse_grid_search():
    m = MemoryParams(10, 0.5)
    t = m.tau_sig

    def eta(p):
        return objective(m, ControlParams(p[0], p[1], p[2]))

    best, _ = grid_search_max(eta, [
        np.linspace(0.5 * math.pi, 6 * math.pi, 15),
        np.linspace(-1.5 * t, 1.5 * t, 15),
        np.linspace(0.2 * t, 2 * t, 15),
    ])
    assert optimize_control(m).eta >= best - 0.005


@pytest.mark.parametrize("d,tau", [(20, 0.25), (50, 0.1)])
def test_ats_band_area_at_high_depth(d, tau):
    theta = optimize_control(MemoryParams(d, tau)).best_g.theta
    assert 1.6 * math.pi <= theta <= 2.4 * math.pi


def test_nonadiabatic_decay():
    low = optimize_control(MemoryParams(5, 0.05))
    high = optimize_control(MemoryParams(5, 0.25))
    assert low.eta_ratio < high.eta_ratio


@pytest.mark.parametrize("d,tau", [(5, 1.0), (10, 0.5), (20, 0.25), (2, 1.5)])
def test_theta_only_dominates_fixed_area(d, tau):
    m = MemoryParams(d, tau)
    assert optimize_theta_only(m).eta >= objective(m, ControlParams(2 * math.pi, 0.0, tau))


def test_theta_only_low_effective_depth_prefers_smaller_area():
    assert optimize_theta_only(MemoryParams(5, 0.2)).best_g.theta < 2 * math.pi


def test_theta_only_mid_band_against_scan():
    m = MemoryParams(20, 0.25)
    thetas = np.linspace(0.5 * math.pi, 4 * math.pi, 200)
    etas = [objective(m, ControlParams(th, 0.0, 0.25)) for th in thetas]
    scan_theta = thetas[int(np.argmax(etas))]
    opt = optimize_theta_only(m)
    assert 1.6 * math.pi <= scan_theta <= 2.4 * math.pi
    assert 1.6 * math.pi <= opt.best_g.theta <= 2.4 * math.pi
    assert opt.eta >= max(etas) - 1e-5
