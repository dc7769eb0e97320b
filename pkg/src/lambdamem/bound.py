"""Protocol-independent storage-efficiency bound at fixed optical depth.

The bound is the top eigenvalue of the storage kernel
K(z, z') = d/2 exp(-d (z + z')/2) I0(d sqrt(z z')) on z in [0, 1].
The exponentials are combined as exp(-d (sqrt z - sqrt z')^2 / 2) times
the scaled Bessel function so nothing overflows at large d.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .numerics import bessel_i0_scaled, largest_symmetric_eigenvalue, power_iteration

DEFAULT_BOUND_N = 2000
MIN_BOUND_N = 100


@dataclass(frozen=True)
class BoundKernel:
    d: float
    n: int
    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray


@dataclass(frozen=True)
class BoundReport:
    d: float
    n: int
    eta_opt: float
    richardson_delta: float

    @property
    def eta_opt_total(self):
        return self.eta_opt**2


def _check(d, n):
    if not np.isfinite(d) or d <= 0:
        raise InvalidArgumentError(f"optical depth must be > 0, got {d}")
    if int(n) != n or n < MIN_BOUND_N:
        raise InvalidArgumentError(f"bound grid needs n >= {MIN_BOUND_N}, got {n}")


def kernel_matrix(d, n=DEFAULT_BOUND_N):
    """Symmetrically trapezoid-weighted kernel on a uniform z grid."""
    _check(d, n)
    n = int(n)
    z = np.linspace(0.0, 1.0, n)
    w = np.full(n, 1.0 / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    rz = np.sqrt(z)
    gap = rz[:, None] - rz[None, :]
    k = 0.5 * d * np.exp(-0.5 * d * gap * gap) * bessel_i0_scaled(d * np.outer(rz, rz))
    sw = np.sqrt(w)
    k *= np.outer(sw, sw)
    # enforce exact symmetry against rounding in the outer products
    k = 0.5 * (k + k.T)
    return BoundKernel(d=float(d), n=n, nodes=z, weights=w, matrix=k)


def eta_opt(d, n=DEFAULT_BOUND_N, method="power"):
    """Largest kernel eigenvalue: the maximum storage efficiency at depth d."""
    km = kernel_matrix(d, n)
    if method == "dense":
        return largest_symmetric_eigenvalue(km.matrix, dense_limit=km.n)
    if method != "power":
        raise InvalidArgumentError(f"unknown eigenvalue method {method!r}")
    # start from the low-z weighted profile the optimal mode resembles
    lam, _, _ = power_iteration(km.matrix, x0=np.sqrt(km.weights) * np.exp(-km.nodes))
    return lam


def bound_report(d, n=DEFAULT_BOUND_N):
    """eta_opt at n together with the change on doubling the grid."""
    lo = eta_opt(d, n)
    hi = eta_opt(d, 2 * n)
    return BoundReport(d=float(d), n=int(n), eta_opt=lo, richardson_delta=abs(hi - lo))
