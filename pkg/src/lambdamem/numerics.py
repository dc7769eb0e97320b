"""Numerical kernels: Chebyshev collocation, Clenshaw-Curtis weights,
the exponentially scaled Bessel function I0, and small eigen/SVD helpers.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "ChebGrid",
    "TimeGrid",
    "cheb_grid",
    "clenshaw_curtis_weights",
    "bessel_i0_scaled",
    "largest_symmetric_eigenvalue",
    "power_iteration",
    "largest_singular_triplet",
]

_SERIES_CUTOFF = 12.0
_ASYMPTOTIC_TERMS = 18


@dataclass(frozen=True)
class ChebGrid:
    """Chebyshev-Gauss-Lobatto collocation on z in [0, 1]."""

    n_points: int
    nodes: np.ndarray
    diff_matrix: np.ndarray
    quad_weights: np.ndarray


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid in the co-moving time, in units of 1/gamma."""

    n_steps: int
    tau_start: float
    tau_end: float

    @property
    def step(self):
        return (self.tau_end - self.tau_start) / (self.n_steps - 1)

    @property
    def nodes(self):
        return np.linspace(self.tau_start, self.tau_end, self.n_steps)

    def trapezoid_weights(self):
        w = np.full(self.n_steps, self.step)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w


def clenshaw_curtis_weights(n):
    """Clenshaw-Curtis weights for the n Lobatto nodes, scaled to [0, 1].

    Ordering follows ``cos(pi k / (n - 1))``, k = 0..n-1; the weights are
    symmetric so the order does not matter after mapping to z.
    """
    N = n - 1
    theta = np.pi * np.arange(n) / N
    w = np.zeros(n)
    v = np.ones(N - 1)
    inner = theta[1:-1]
    if N % 2 == 0:
        w[0] = w[-1] = 1.0 / (N**2 - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k**2 - 1)
        v -= np.cos(N * inner) / (N**2 - 1)
    else:
        w[0] = w[-1] = 1.0 / N**2
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k**2 - 1)
    w[1:-1] = 2.0 * v / N
    return 0.5 * w


def cheb_grid(n):
    """Nodes, differentiation matrix and quadrature weights on [0, 1].

    The Lobatto points ``x_k = cos(pi k / (n-1))`` are mapped through
    ``z = (1 - x) / 2`` so that z increases from 0 to 1.
    """
    if int(n) != n or n < 8:
        raise InvalidArgumentError(f"Chebyshev grid needs n >= 8 points, got {n}")
    n = int(n)
    N = n - 1
    k = np.arange(n)
    # symmetric form of cos(pi k / N); reduces rounding near the ends
    x = np.sin(np.pi * (N - 2 * k) / (2 * N))
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** k
    dx = x[:, None] - x[None, :]
    Dx = np.outer(c, 1.0 / c) / (dx + np.eye(n))
    Dx -= np.diag(Dx.sum(axis=1))
    z = 0.5 * (1.0 - x)
    z[0], z[-1] = 0.0, 1.0
    Dz = -2.0 * Dx
    w = clenshaw_curtis_weights(n)
    return ChebGrid(n_points=n, nodes=z, diff_matrix=Dz, quad_weights=w)


def bessel_i0_scaled(x):
    """Return ``exp(-x) * I0(x)`` for x >= 0.

    Power series below x = 12, large-argument expansion above. Accepts
    scalars or arrays; scalars come back as float.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise InvalidArgumentError("bessel_i0_scaled needs finite x >= 0")
    out = np.empty_like(arr)
    small = arr < _SERIES_CUTOFF
    if np.any(small):
        xs = arr[small]
        q = 0.25 * xs * xs
        term = np.ones_like(xs)
        total = np.ones_like(xs)
        for k in range(1, 80):
            term = term * q / (k * k)
            total += term
            if np.all(term < 1e-17 * total):
                break
        out[small] = np.exp(-xs) * total
    if np.any(~small):
        xl = arr[~small]
        term = np.ones_like(xl)
        total = np.ones_like(xl)
        for k in range(1, _ASYMPTOTIC_TERMS):
            term = term * (2 * k - 1) ** 2 / (8.0 * k * xl)
            total += term
        out[~small] = total / np.sqrt(2.0 * np.pi * xl)
    if out.ndim == 0:
        return float(out)
    return out


def _check_symmetric(m):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {m.shape}")
    scale = max(np.max(np.abs(m)), 1.0) if m.size else 1.0
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-10 * scale:
        raise InvalidArgumentError("matrix is not symmetric")
    return m


def power_iteration(m, rtol=1e-12, max_iter=20000, x0=None):
    """Dominant eigenpair of a symmetric positive semi-definite matrix.

    Iterates until the Rayleigh quotient changes by less than ``rtol``
    relative. Returns ``(eigenvalue, unit eigenvector, iterations)``.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    x = np.ones(n) / np.sqrt(n) if x0 is None else np.asarray(x0, float) / np.linalg.norm(x0)
    lam = 0.0
    for it in range(1, max_iter + 1):
        y = m @ x
        lam_new = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, x, it
        x = y / norm
        if abs(lam_new - lam) < rtol * abs(lam_new):
            return lam_new, x, it
        lam = lam_new
    return lam, x, max_iter


def largest_symmetric_eigenvalue(m, dense_limit=1000):
    """Largest (algebraic) eigenvalue of a real symmetric matrix.

    Dense symmetric solve up to ``dense_limit``; above that, power
    iteration on the matrix shifted by its Gershgorin lower bound so the
    dominant eigenvalue is the algebraically largest one.
    """
    m = _check_symmetric(m)
    n = m.shape[0]
    if n == 0:
        raise InvalidArgumentError("empty matrix")
    if n <= dense_limit:
        from scipy.linalg import eigh

        return float(eigh(m, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0])
    radius = np.sum(np.abs(m), axis=1) - np.abs(np.diag(m))
    shift = min(0.0, float(np.min(np.diag(m) - radius)))
    lam, _, _ = power_iteration(m - shift * np.eye(n))
    return lam + shift


def largest_singular_triplet(m):
    """Largest singular value with unit left/right singular vectors.

    Returns ``(sigma, u, v)`` with ``m @ v == sigma * u``.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise InvalidArgumentError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidArgumentError("matrix has non-finite entries")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size == 0:
        raise InvalidArgumentError("empty matrix")
    return float(s[0]), u[:, 0], vh[0].conj()
