import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambdamem.errors import InvalidArgumentError, InvalidStateError, NumericalInstabilityError
from lambdamem.fields import ControlParams, MemoryParams, signal_envelope
from lambdamem.numerics import TimeGrid, cheb_grid
from lambdamem.solver import (
    GridSpec,
    default_time_grid,
    dump_fields,
    energy_balance,
    simulate_storage,
    solve,
    spin_wave_norm,
    storage_efficiency,
)
from oracles import rk4_eta

REF_M = MemoryParams(10, 0.5)
REF_G = ControlParams(2 * math.pi, 0.0, 0.5)


@pytest.fixture(scope="module")
def ref_result():
    return solve(REF_M, REF_G)


def test_initial_and_boundary_conditions(ref_result):
    st_ = ref_result.state
    assert np.all(st_.p[:, 0] == 0) and np.all(st_.b[:, 0] == 0)
    np.testing.assert_allclose(st_.a[0], ref_result.a_in, atol=1e-12)
    assert st_.a.shape == (48, ref_result.tgrid.n_steps)


def test_free_propagation_limit():
    m = MemoryParams(1e-12, 0.8)
    r = solve(m, ControlParams(2 * math.pi, 0, 1.0))
    assert np.max(np.abs(r.state.a - r.a_in[None, :])) < 1e-6
    assert r.eta < 1e-10
    assert energy_balance(r) < 1e-8
    assert r.energy_ledger.transmitted == pytest.approx(r.energy_ledger.input, rel=1e-8)


def test_zero_depth_is_free_propagation():
    r = solve(MemoryParams(0.0, 0.5), REF_G)
    np.testing.assert_allclose(r.state.a, np.broadcast_to(r.a_in, r.state.a.shape), atol=1e-15)
    assert r.eta == 0.0


def test_no_control_stores_nothing():
    r = solve(REF_M, ControlParams(0.0, 0.0, 0.5))
    assert np.all(r.state.b == 0)
    assert r.eta == 0.0


def test_matches_refined_rk4_oracle(ref_result):
    tg = ref_result.tgrid
    ref = rk4_eta(10, 0.5, 0.0, 2 * math.pi, 0.0, 0.5, tg.tau_start, tg.tau_end, 4 * (tg.n_steps - 1) + 1, 96)
    assert abs(ref_result.eta - ref) / ref < 1e-3


def test_eta_total_is_square(ref_result):
    assert ref_result.eta_total == ref_result.eta**2


def test_deterministic():
    assert solve(REF_M, REF_G).eta == solve(REF_M, REF_G).eta


def test_storage_efficiency_trivial_cases():
    zg = cheb_grid(16)
    tg = TimeGrid(101, -2.0, 2.0)
    a = signal_envelope(tg.nodes, 0.5)
    assert storage_efficiency(np.zeros(16), a, zg, tg) == 0.0
    energy = tg.trapezoid_weights() @ a**2
    b = np.full(16, math.sqrt(energy))
    assert storage_efficiency(b, a, zg, tg) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(InvalidStateError):
        storage_efficiency(np.array([]), a, zg, tg)


def test_energy_balance_reference_case(ref_result):
    assert energy_balance(ref_result) < 1e-3
    led = ref_result.energy_ledger
    assert min(led.as_tuple()) >= 0


def test_energy_residual_second_order():
    coarse = energy_balance(solve(REF_M, REF_G, GridSpec(48, 20)))
    fine = energy_balance(solve(REF_M, REF_G, GridSpec(48, 40)))
    assert fine <= coarse / 2


def test_time_grid_convergence(ref_result):
    fine = solve(REF_M, REF_G, GridSpec(48, 40))
    assert abs(ref_result.eta - fine.eta) / fine.eta < 1e-3


@settings(max_examples=10, deadline=None)
@given(
    st.floats(1, 50), st.floats(0.1, 1.5), st.floats(0.1, 10),
    st.floats(0.5, 8), st.floats(-1, 1), st.floats(0.3, 2),
)
def test_detuning_symmetry(d, tau, delta, theta_pi, delay_frac, ctrl_frac):
    g = ControlParams(theta_pi * math.pi, delay_frac * tau, ctrl_frac * tau)
    plus = solve(MemoryParams(d, tau, delta), g).eta
    minus = solve(MemoryParams(d, tau, -delta), g).eta
    assert abs(plus - minus) < 1e-8


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 60), st.floats(0.05, 2), st.floats(-10, 10), st.floats(0, 20), st.floats(-2, 2), st.floats(0.1, 3))
def test_efficiency_in_unit_interval(d, tau, delta, theta, delay_frac, ctrl_frac):
    r = solve(MemoryParams(d, tau, delta), ControlParams(theta, delay_frac * tau, ctrl_frac * tau))
    assert 0.0 <= r.eta <= 1.0


def test_spin_wave_frozen_after_control():
    m = MemoryParams(20, 0.5)
    g = ControlParams(3 * math.pi, -0.2, 0.6)
    base = default_time_grid(m, g)
    r = simulate_storage(m, g, tgrid=TimeGrid(2 * base.n_steps - 1, base.tau_start, 2 * base.tau_end - base.tau_start))
    norm = spin_wave_norm(r)
    after = r.tgrid.nodes > g.delay + 4 * g.tau_ctrl
    assert after.sum() > 100
    assert np.ptp(norm[after]) / norm[after].max() < 1e-8


def test_spin_wave_decays_with_gamma_b():
    m = MemoryParams(20, 0.5, gamma_b=0.05)
    g = ControlParams(3 * math.pi, -0.2, 0.6)
    base = default_time_grid(m, g)
    r = simulate_storage(m, g, tgrid=TimeGrid(2 * base.n_steps - 1, base.tau_start, 2 * base.tau_end - base.tau_start))
    norm = spin_wave_norm(r)
    after = np.flatnonzero(r.tgrid.nodes > g.delay + 4 * g.tau_ctrl)
    dt = r.tgrid.nodes[after[-1]] - r.tgrid.nodes[after[0]]
    assert norm[after[-1]] / norm[after[0]] == pytest.approx(math.exp(-2 * 0.05 * dt), rel=1e-4)
    assert energy_balance(r) < 1e-3


def test_window_too_small():
    with pytest.raises(InvalidArgumentError):
        simulate_storage(REF_M, REF_G, tgrid=TimeGrid(100, -1.0, 1.0))
    with pytest.raises(InvalidArgumentError):
        simulate_storage(REF_M, ControlParams(1.0, 1.0, 0.5), tgrid=TimeGrid(100, -2.0, 2.0))


def test_instability_names_step():
    m = MemoryParams(1e12, 1.0)
    with pytest.raises(NumericalInstabilityError) as info:
        simulate_storage(m, ControlParams(1, 0, 1), tgrid=TimeGrid(200, -4, 4))
    assert info.value.step > 0
    assert str(info.value.step) in str(info.value)


def test_custom_input_must_match_grid():
    tg = default_time_grid(REF_M, REF_G)
    with pytest.raises(InvalidArgumentError):
        simulate_storage(REF_M, REF_G, tgrid=tg, a_in=np.ones(3))


def test_field_dump(tmp_path):
    m = MemoryParams(2, 0.1)
    r = simulate_storage(m, ControlParams(math.pi, 0, 0.1), zgrid=cheb_grid(8))
    path = tmp_path / "fields.csv"
    dump_fields(r, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "z_index,tau_index,a_re,a_im,p_re,p_im,b_re,b_im"
    assert len(lines) == 1 + 8 * r.tgrid.n_steps
    i, k, *vals = lines[-1].split(",")
    assert (int(i), int(k)) == (7, r.tgrid.n_steps - 1)
    assert float(vals[4]) == r.state.b[7, -1].real
