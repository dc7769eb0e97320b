"""Signal-shaping benchmark: the storage map and its top singular value.

The input is expanded in a trigonometric-interpolation basis on the signal
window [-4 tau_sig, 4 tau_sig); column j of the map is the final spin wave
produced by basis function j. Rows carry sqrt(z weights) and columns
sqrt(tau spacing), so the squared top singular value is the best storage
efficiency over inputs in the basis span.
"""
import math
from dataclasses import dataclass

import numpy as np

from .bound import DEFAULT_BOUND_N
from .errors import InvalidArgumentError
from .fields import ControlParams, MemoryParams, signal_envelope
from .numerics import largest_singular_triplet
from .optimizer import cached_eta_opt, optimize_control, protocol_seeds
from .solver import SIGNAL_SPAN, GridSpec, default_time_grid, simulate_storage

DEFAULT_BASIS = 96
MIN_BASIS = 32
FINE_PER_BASIS = 4


@dataclass(frozen=True)
class StorageMap:
    m: MemoryParams
    g: ControlParams
    basis_nodes: np.ndarray
    z_weights: np.ndarray
    tau_weights: np.ndarray
    matrix: np.ndarray

    @property
    def n_basis(self):
        return self.basis_nodes.size

    def apply(self, samples):
        """Final spin wave B(z) for an input given by its basis-node samples."""
        raw = self.matrix / np.sqrt(self.z_weights)[:, None] / np.sqrt(self.tau_weights)[None, :]
        return raw @ (np.asarray(samples) * self.tau_weights)


@dataclass(frozen=True)
class Comparison:
    d: float
    tau_sig: float
    gaussian_eta: float
    shape_eta: float
    eta_opt: float
    gaussian_g: ControlParams
    shape_g: ControlParams
    shape_label: str
    n_evals: int = 0
    converged: bool = True


def trig_basis(t, nodes, h):
    """Periodic trigonometric interpolants of the unit vectors, zero outside
    the basis window. Returns an array of shape (len(t), len(nodes))."""
    n = nodes.size
    omega = 2.0 * np.pi / (n * h)
    x = np.asarray(t)[:, None] - nodes[None, :]
    out = np.ones_like(x)
    for k in range(1, n // 2):
        out += 2.0 * np.cos(k * omega * x)
    if n % 2 == 0:
        out += np.cos((n // 2) * omega * x)
    out /= n
    lo, hi = nodes[0], nodes[0] + n * h
    outside = (np.asarray(t) < lo - 1e-12 * h) | (np.asarray(t) > hi + 1e-12 * h)
    out[outside, :] = 0.0
    return out


def _map_time_grid(m, g, grids, basis_h):
    tg = default_time_grid(m, g, grids.step_divisor)
    if tg.step <= basis_h / FINE_PER_BASIS:
        return tg
    divisor = grids.step_divisor * tg.step * FINE_PER_BASIS / basis_h
    return default_time_grid(m, g, divisor)


def build_storage_map(m, g, grids=None, n_basis=DEFAULT_BASIS):
    """Assemble the discretized input-to-spin-wave map for fixed controls."""
    if n_basis < MIN_BASIS:
        raise InvalidArgumentError(f"storage map needs at least {MIN_BASIS} basis columns")
    grids = grids or GridSpec()
    span = 2.0 * SIGNAL_SPAN * m.tau_sig
    h = span / n_basis
    nodes = -SIGNAL_SPAN * m.tau_sig + h * np.arange(n_basis)
    zgrid = grids.zgrid
    tgrid = _map_time_grid(m, g, grids, h)
    basis = trig_basis(tgrid.nodes, nodes, h)
    cols = np.empty((zgrid.n_points, n_basis), np.complex128)
    if g.theta == 0:
        cols[:] = 0.0
    else:
        for j in range(n_basis):
            cols[:, j] = simulate_storage(m, g, zgrid, tgrid, a_in=basis[:, j]).spin_wave
    wz = zgrid.quad_weights
    wt = np.full(n_basis, h)
    # cols / h samples the continuous kernel K(z, tau_j)
    matrix = np.sqrt(wz)[:, None] * (cols / wt[None, :]) * np.sqrt(wt)[None, :]
    return StorageMap(m=m, g=g, basis_nodes=nodes, z_weights=wz, tau_weights=wt, matrix=matrix)


def optimal_signal_efficiency(smap):
    """(sigma0^2, optimal input mode on the basis nodes, degenerate flag).

    The mode is the unit right-singular vector scaled back to samples of
    unit-norm input.
    """
    sigma, _, v = largest_singular_triplet(smap.matrix)
    degenerate = sigma == 0.0
    mode = v / np.sqrt(smap.tau_weights)
    return sigma * sigma, mode, degenerate


def shape_efficiency(m, g, grids=None, n_basis=DEFAULT_BASIS):
    return optimal_signal_efficiency(build_storage_map(m, g, grids, n_basis))[0]


def compare_methods(d, tau_list, grids=None, n_basis=DEFAULT_BASIS, bound_n=DEFAULT_BOUND_N, delta=0.0):
    """Gaussian-optimized versus signal-shaped efficiency at each duration.

    The shaped value is sigma0^2 maximized over the Gaussian-optimized
    control and the protocol seed controls.
    """
    grids = grids or GridSpec()
    rows = []
    for tau in tau_list:
        m = MemoryParams(d, tau, delta)
        opt = optimize_control(m, grids, bound_n=bound_n)
        candidates = {"gaussian_opt": opt.best_g, **protocol_seeds(m)}
        best = None
        for label, g in candidates.items():
            eta = shape_efficiency(m, g, grids, n_basis)
            if best is None or eta > best[0]:
                best = (eta, label, g)
        rows.append(Comparison(
            d=float(d), tau_sig=float(tau), gaussian_eta=opt.eta, shape_eta=best[0],
            eta_opt=cached_eta_opt(float(d), bound_n), gaussian_g=opt.best_g,
            shape_g=best[2], shape_label=best[1], n_evals=opt.n_evals,
            converged=opt.converged,
        ))
    return rows
