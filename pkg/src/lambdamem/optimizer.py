"""Gaussian control-field optimization by Nelder-Mead simplex search."""
import functools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .bound import DEFAULT_BOUND_N, eta_opt
from .errors import NumericalInstabilityError, OptimizationFailedError
from .fields import ControlParams
from .solver import GridSpec, solve

log = logging.getLogger(__name__)

FTOL = 1e-5
MAX_EVALS = 400
SEED_ORDER = ("absorb_transfer", "ats", "eit")
RATIO_SLACK = 5e-3
# search box in units of the signal duration; outside it the objective is -inf
THETA_RANGE = (0.01 * math.pi, 100 * math.pi)
DELAY_RANGE = (-5.0, 5.0)
TAU_CTRL_RANGE = (0.02, 20.0)


@dataclass(frozen=True)
class OptResult:
    best_g: ControlParams
    eta: float
    eta_opt: float
    n_evals: int
    converged: bool
    seed_label: str

    @property
    def eta_ratio(self):
        return self.eta / self.eta_opt

    @property
    def exceeds_bound(self):
        """True when eta/eta_opt is above 1 by more than the numerical slack."""
        return self.eta_ratio > 1.0 + RATIO_SLACK


@dataclass(frozen=True)
class NMResult:
    x: np.ndarray
    fun: float
    n_evals: int
    converged: bool


def nelder_mead(f, x0, step=None, ftol=FTOL, max_evals=MAX_EVALS, maximize=False):
    """Nelder-Mead simplex search (reflect 1, expand 2, contract 0.5, shrink 0.5).

    Minimizes ``f`` unless ``maximize``. Stops once the spread of function
    values over the simplex is below ``ftol`` or after ``max_evals`` calls.
    ``step`` is the initial simplex edge per coordinate; by default 10% of
    the coordinate with a 0.05 floor.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    sign = -1.0 if maximize else 1.0
    evals = 0

    def F(x):
        nonlocal evals
        evals += 1
        v = sign * f(x)
        return v if np.isfinite(v) else np.inf

    if step is None:
        step = np.maximum(0.1 * np.abs(x0), 0.05)
    step = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    simplex = np.vstack([x0] + [x0 + step[i] * np.eye(n)[i] for i in range(n)])
    fs = np.array([F(x) for x in simplex])

    converged = False
    while True:
        order = np.argsort(fs, kind="stable")
        simplex, fs = simplex[order], fs[order]
        if np.isfinite(fs[-1]) and fs[-1] - fs[0] < ftol:
            converged = True
            break
        if evals >= max_evals:
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = F(xr)
        if fr < fs[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = F(xe)
            if fe < fr:
                simplex[-1], fs[-1] = xe, fe
            else:
                simplex[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-2]:
            simplex[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = centroid + 0.5 * (xr - centroid)
            fc = F(xc)
            if fc <= fr:
                simplex[-1], fs[-1] = xc, fc
                continue
        else:
            xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = F(xc)
            if fc < fs[-1]:
                simplex[-1], fs[-1] = xc, fc
                continue
        for i in range(1, n + 1):
            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
            fs[i] = F(simplex[i])
    return NMResult(x=simplex[0].copy(), fun=sign * fs[0], n_evals=evals, converged=converged)


@functools.lru_cache(maxsize=64)
def cached_eta_opt(d, n=DEFAULT_BOUND_N):
    return eta_opt(d, n)


def objective(m, g, grids=None):
    """Storage efficiency for control ``g``; the quantity being maximized."""
    return solve(m, g, grids).eta


def to_coords(m, g):
    return np.array([math.log(g.theta), g.delay / m.tau_sig, math.log(g.tau_ctrl)])


def from_coords(m, x):
    return ControlParams(theta=math.exp(x[0]), delay=x[1] * m.tau_sig, tau_ctrl=math.exp(x[2]))


def protocol_seeds(m):
    """Start points modelled on the three resonant storage protocols."""
    t = m.tau_sig
    return {
        "absorb_transfer": ControlParams(math.pi, 0.5 * t, 0.5 * t),
        "ats": ControlParams(2 * math.pi, 0.0, t),
        "eit": ControlParams(4 * math.pi, -0.55 * t, 1.33 * t),
    }


def in_search_box(m, g):
    r = g.tau_ctrl / m.tau_sig
    q = g.delay / m.tau_sig
    return (
        THETA_RANGE[0] <= g.theta <= THETA_RANGE[1]
        and DELAY_RANGE[0] <= q <= DELAY_RANGE[1]
        and TAU_CTRL_RANGE[0] <= r <= TAU_CTRL_RANGE[1]
    )


def _safe_eta(m, g, grids):
    if not in_search_box(m, g):
        return -np.inf
    try:
        return objective(m, g, grids)
    except NumericalInstabilityError as exc:
        log.warning("solver unstable at %s: %s", g, exc)
        return -np.inf


def optimize_control(m, grids=None, seeds=None, ftol=FTOL, max_evals=MAX_EVALS, bound_n=DEFAULT_BOUND_N):
    """Maximize eta over (theta, delay, tau_ctrl) from several start points.

    ``seeds`` maps labels to ControlParams; the protocol archetypes are used
    by default. Ties go to the earlier seed.
    """
    grids = grids or GridSpec()
    seeds = seeds or protocol_seeds(m)
    best = None
    total = 0
    for label, g0 in seeds.items():
        res = nelder_mead(
            lambda x: _safe_eta(m, from_coords(m, x), grids),
            to_coords(m, g0), ftol=ftol, max_evals=max_evals, maximize=True,
        )
        total += res.n_evals
        log.debug("seed %s: eta=%.6f after %d evals", label, res.fun, res.n_evals)
        if not np.isfinite(res.fun):
            continue
        if best is None or res.fun > best[1].fun:
            best = (label, res)
    if best is None:
        raise OptimizationFailedError(f"no seed produced a finite efficiency for {m}")
    label, res = best
    g = from_coords(m, res.x)
    eta = objective(m, g, grids)
    return OptResult(
        best_g=g, eta=eta, eta_opt=cached_eta_opt(m.d, bound_n),
        n_evals=total, converged=res.converged, seed_label=label,
    )


def optimize_theta_only(m, grids=None, ftol=FTOL, max_evals=MAX_EVALS, bound_n=DEFAULT_BOUND_N):
    """Optimize the pulse area alone with zero delay and tau_ctrl = tau_sig."""
    grids = grids or GridSpec()
    t = m.tau_sig

    def eta_of(x):
        return _safe_eta(m, ControlParams(math.exp(x[0]), 0.0, t), grids)

    res = nelder_mead(eta_of, [math.log(2 * math.pi)], ftol=ftol, max_evals=max_evals, maximize=True)
    if not np.isfinite(res.fun):
        raise OptimizationFailedError(f"theta-only search failed for {m}")
    g = ControlParams(math.exp(res.x[0]), 0.0, t)
    return OptResult(
        best_g=g, eta=objective(m, g, grids), eta_opt=cached_eta_opt(m.d, bound_n),
        n_evals=res.n_evals, converged=res.converged, seed_label="theta_only",
    )
