"""Maxwell-Bloch integration for a Lambda-type ensemble memory.

The normalized equations in the co-moving frame are

    dA/dz   = -sqrt(d) P
    dP/dtau = -gbar P + sqrt(d) A - i Omega/2 B
    dB/dtau = -gamma_b B - i Omega*/2 P

with gbar = 1 - i delta. (P, B) are advanced with Heun's method; at every
stage A is recovered from the Chebyshev collocation of the z-equation with
the boundary condition A(0, tau) = A_in(tau) imposed on the first row.
"""
import csv
import functools
import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import InvalidArgumentError, InvalidStateError, NumericalInstabilityError
from .fields import ControlParams, MemoryParams, control_envelope, signal_envelope
from .numerics import ChebGrid, TimeGrid, cheb_grid

DEFAULT_NZ = 48
DEFAULT_STEP_DIVISOR = 20
SIGNAL_SPAN = 4.0  # window half-width in FWHM units
WINDOW_SLACK = 1e-9
MAX_TIME_STEPS = 200_000


@dataclass(frozen=True)
class FieldState:
    """Complex A, P, B sampled on (z nodes, tau nodes)."""

    a: np.ndarray
    p: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class EnergyLedger:
    input: float
    transmitted: float
    residual: float
    decay: float

    def as_tuple(self):
        return (self.input, self.transmitted, self.residual, self.decay)


@dataclass(frozen=True)
class SolverResult:
    m: MemoryParams
    g: ControlParams
    zgrid: ChebGrid
    tgrid: TimeGrid
    state: FieldState
    a_in: np.ndarray
    eta: float
    eta_total: float
    energy_ledger: EnergyLedger

    @property
    def spin_wave(self):
        """Final spin wave B(z, tau_end)."""
        return self.state.b[:, -1]


def default_time_grid(m, g, divisor=DEFAULT_STEP_DIVISOR):
    """Uniform tau grid covering both pulses out to 4 FWHM each.

    The step is at most ``min(sigma_sig, sigma_ctrl) / divisor``.
    """
    start = min(-SIGNAL_SPAN * m.tau_sig, g.delay - SIGNAL_SPAN * g.tau_ctrl)
    end = max(SIGNAL_SPAN * m.tau_sig, g.delay + SIGNAL_SPAN * g.tau_ctrl)
    h = min(m.sigma, g.sigma) / divisor
    n = int(math.ceil((end - start) / h - 1e-9)) + 1
    if n > MAX_TIME_STEPS:
        raise InvalidArgumentError(f"time grid would need {n} steps (limit {MAX_TIME_STEPS})")
    return TimeGrid(n_steps=max(n, 3), tau_start=start, tau_end=end)


def check_time_grid(m, g, tgrid):
    """Raise if the window does not cover the signal and control pulses."""
    if tgrid.n_steps < 3:
        raise InvalidArgumentError("time grid needs at least 3 nodes")
    need_start = min(-SIGNAL_SPAN * m.tau_sig, g.delay - SIGNAL_SPAN * g.tau_ctrl)
    need_end = max(SIGNAL_SPAN * m.tau_sig, g.delay + SIGNAL_SPAN * g.tau_ctrl)
    tol = WINDOW_SLACK * max(1.0, need_end - need_start)
    if tgrid.tau_start > need_start + tol or tgrid.tau_end < need_end - tol:
        raise InvalidArgumentError(
            f"time window [{tgrid.tau_start:g}, {tgrid.tau_end:g}] does not cover "
            f"[{need_start:g}, {need_end:g}] required by the pulses"
        )


@functools.lru_cache(maxsize=16)
def _z_operators(n):
    grid = cheb_grid(n)
    dt = grid.diff_matrix.copy()
    dt[0, :] = 0.0
    dt[0, 0] = 1.0
    dinv = np.linalg.inv(dt)
    return grid, np.ascontiguousarray(dinv[:, 1:]), np.ascontiguousarray(dinv[:, 0])


@functools.lru_cache(maxsize=16)
def default_zgrid(n=DEFAULT_NZ):
    return cheb_grid(n)


@numba.njit(cache=True)
def _signal_field(p, a_in, S, s0, sqrt_d, out):
    # out = s0 * a_in - sqrt(d) * S @ p[1:]
    n = p.shape[0]
    for i in range(n):
        acc = 0j
        for j in range(1, n):
            acc += S[i, j - 1] * p[j]
        out[i] = s0[i] * a_in - sqrt_d * acc


@numba.njit(cache=True)
def _heun(a_in, omega, S, s0, sqrt_d, gbar, gamma_b, h, A, P, B):
    nt, n = P.shape
    p = np.zeros(n, np.complex128)
    b = np.zeros(n, np.complex128)
    a1 = np.empty(n, np.complex128)
    a2 = np.empty(n, np.complex128)
    kp1 = np.empty(n, np.complex128)
    kb1 = np.empty(n, np.complex128)
    pt = np.empty(n, np.complex128)
    bt = np.empty(n, np.complex128)
    for k in range(nt - 1):
        half1 = 0.5j * omega[k]
        half2 = 0.5j * omega[k + 1]
        _signal_field(p, a_in[k], S, s0, sqrt_d, a1)
        for i in range(n):
            kp1[i] = -gbar * p[i] + sqrt_d * a1[i] - half1 * b[i]
            kb1[i] = -gamma_b * b[i] - half1 * p[i]
            pt[i] = p[i] + h * kp1[i]
            bt[i] = b[i] + h * kb1[i]
        _signal_field(pt, a_in[k + 1], S, s0, sqrt_d, a2)
        ok = True
        for i in range(n):
            kp2 = -gbar * pt[i] + sqrt_d * a2[i] - half2 * bt[i]
            kb2 = -gamma_b * bt[i] - half2 * pt[i]
            p[i] = p[i] + 0.5 * h * (kp1[i] + kp2)
            b[i] = b[i] + 0.5 * h * (kb1[i] + kb2)
            A[k, i] = a1[i]
            P[k + 1, i] = p[i]
            B[k + 1, i] = b[i]
            if not (np.isfinite(p[i].real) and np.isfinite(p[i].imag)
                    and np.isfinite(b[i].real) and np.isfinite(b[i].imag)):
                ok = False
        if not ok:
            return k + 1
    _signal_field(p, a_in[nt - 1], S, s0, sqrt_d, a1)
    for i in range(n):
        A[nt - 1, i] = a1[i]
    return -1


def integrate_fields(m, g, zgrid, tgrid, a_in):
    """Raw Heun integration; returns a FieldState with shape (n_z, n_tau)."""
    _, S, s0 = _z_operators(zgrid.n_points)
    tau = tgrid.nodes
    omega = control_envelope(tau, g) if g.theta > 0 else np.zeros_like(tau)
    nt, n = tgrid.n_steps, zgrid.n_points
    A = np.empty((nt, n), np.complex128)
    P = np.zeros((nt, n), np.complex128)
    B = np.zeros((nt, n), np.complex128)
    failed = _heun(
        np.ascontiguousarray(a_in, dtype=np.complex128),
        np.ascontiguousarray(omega, dtype=np.float64),
        S, s0, math.sqrt(m.d), m.gamma_bar, m.gamma_b, tgrid.step, A, P, B,
    )
    if failed >= 0:
        raise NumericalInstabilityError(failed)
    return FieldState(a=A.T, p=P.T, b=B.T)


def storage_efficiency(b_final, a_in, zgrid, tgrid):
    """Stored spin-wave population over input photon number."""
    b_final = np.asarray(b_final)
    a_in = np.asarray(a_in)
    if b_final.size == 0 or a_in.size == 0:
        raise InvalidStateError("storage efficiency needs populated fields")
    num = float(zgrid.quad_weights @ np.abs(b_final) ** 2)
    den = float(tgrid.trapezoid_weights() @ np.abs(a_in) ** 2)
    if den <= 0:
        raise InvalidStateError("input pulse carries no photons")
    return num / den


def _ledger(m, state, a_in, zgrid, tgrid):
    wt = tgrid.trapezoid_weights()
    wz = zgrid.quad_weights
    inp = float(wt @ np.abs(a_in) ** 2)
    transmitted = float(wt @ np.abs(state.a[-1]) ** 2)
    residual = float(wz @ (np.abs(state.p[:, -1]) ** 2 + np.abs(state.b[:, -1]) ** 2))
    local = m.gamma_bar.real * np.abs(state.p) ** 2 + m.gamma_b * np.abs(state.b) ** 2
    decay = float(2.0 * wz @ local @ wt)
    return EnergyLedger(inp, transmitted, residual, decay)


def simulate_storage(m, g, zgrid=None, tgrid=None, a_in=None):
    """Integrate the storage interaction and evaluate the efficiency.

    ``a_in`` optionally replaces the Gaussian input with samples on the
    tau nodes (used for building the storage map).
    """
    if not isinstance(m, MemoryParams) or not isinstance(g, ControlParams):
        raise InvalidArgumentError("simulate_storage needs MemoryParams and ControlParams")
    zgrid = zgrid or default_zgrid()
    if tgrid is None:
        tgrid = default_time_grid(m, g)
    else:
        check_time_grid(m, g, tgrid)
    if a_in is None:
        a_in = signal_envelope(tgrid.nodes, m.tau_sig).astype(np.complex128)
    else:
        a_in = np.asarray(a_in, dtype=np.complex128)
        if a_in.shape != (tgrid.n_steps,):
            raise InvalidArgumentError("input samples must match the tau grid")
    state = integrate_fields(m, g, zgrid, tgrid, a_in)
    ledger = _ledger(m, state, a_in, zgrid, tgrid)
    eta = storage_efficiency(state.b[:, -1], a_in, zgrid, tgrid)
    return SolverResult(
        m=m, g=g, zgrid=zgrid, tgrid=tgrid, state=state, a_in=a_in,
        eta=eta, eta_total=eta * eta, energy_ledger=ledger,
    )


def energy_balance(result):
    """Relative residual |input - transmitted - residual - decay| / input."""
    led = result.energy_ledger
    if led.input <= 0:
        raise InvalidStateError("input photon number is zero")
    return abs(led.input - led.transmitted - led.residual - led.decay) / led.input


def spin_wave_norm(result):
    """Spin-wave population integrated over z at every tau node."""
    return result.zgrid.quad_weights @ np.abs(result.state.b) ** 2


@dataclass(frozen=True)
class GridSpec:
    """Solver resolution: Chebyshev points in z and the tau-step divisor."""

    n_z: int = DEFAULT_NZ
    step_divisor: float = DEFAULT_STEP_DIVISOR

    @property
    def zgrid(self):
        return default_zgrid(self.n_z)

    def time_grid(self, m, g):
        return default_time_grid(m, g, self.step_divisor)

    @property
    def fingerprint(self):
        return f"nz{self.n_z}-div{self.step_divisor:g}"

    def refined(self, z_factor=1, step_factor=2):
        return GridSpec(self.n_z * z_factor, self.step_divisor * step_factor)


def solve(m, g, grids=None, a_in=None):
    """simulate_storage on the grids described by a GridSpec."""
    grids = grids or GridSpec()
    return simulate_storage(m, g, grids.zgrid, grids.time_grid(m, g), a_in=a_in)


def dump_fields(result, path):
    """Write A, P, B to a CSV with one row per (z, tau) node."""
    st = result.state
    nz, nt = st.a.shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z_index", "tau_index", "a_re", "a_im", "p_re", "p_im", "b_re", "b_im"])
        for i in range(nz):
            for k in range(nt):
                w.writerow([i, k] + [
                    repr(float(part))
                    for v in (st.a[i, k], st.p[i, k], st.b[i, k])
                    for part in (v.real, v.imag)
                ])
