"""Protocol classification of optimized memory points.

Regimes follow the adiabaticity product d * tau_sig and the normalized
character ratio C~ = C / C0, where C compares the transient polarization
population during the storage period with the final spin-wave population
and C0 is the same ratio for a pure ATS control (area 2 pi, zero delay,
tau_ctrl = tau_sig).
"""
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDenominatorError, InvalidArgumentError
from .fields import ControlParams, MemoryParams
from .solver import GridSpec, solve

LABELS = ("nonadiabatic", "absorb_transfer", "ats", "mixed", "eit")
STORAGE_PERIOD = 2.25  # in units of tau_sig
EIT_THRESHOLD = 0.1
ATS_BAND = (3.0, 8.0)
ATS_REFERENCE_PRODUCT = 5.5  # centre of the ATS band, where C0 is evaluated
LOW_DEPTH = 2.0


@dataclass(frozen=True)
class ProtocolDiagnostics:
    adiabaticity: float
    effective_depth: float
    character_ratio: float
    normalized_character: float
    label: str
    flags: tuple = field(default=())


def adiabaticity(m):
    return m.d * m.tau_sig


def ats_effective_depth(m, theta):
    """Autler-Townes-reduced optical depth d*tau*pi / (2 theta ln 2)."""
    if not theta > 0:
        raise InvalidArgumentError(f"pulse area must be > 0, got {theta}")
    return m.d * m.tau_sig * math.pi / (2.0 * theta * math.log(2.0))


def _window_integral(tau, y, lo, hi):
    """Trapezoid integral of samples y(tau) over [lo, hi] with linear end caps."""
    inside = (tau > lo) & (tau < hi)
    t = np.concatenate(([lo], tau[inside], [hi]))
    v = np.concatenate(([np.interp(lo, tau, y)], y[inside], [np.interp(hi, tau, y)]))
    return float(np.trapezoid(v, t))


def character_ratio(result, m=None):
    """Time-averaged polarization population over the storage period,
    divided by the final spin-wave population."""
    m = m or result.m
    ts = STORAGE_PERIOD * m.tau_sig
    wz = result.zgrid.quad_weights
    tau = result.tgrid.nodes
    if tau[0] > -ts / 2 or tau[-1] < ts / 2:
        raise InvalidArgumentError("solver window does not cover the storage period")
    p_pop = wz @ np.abs(result.state.p) ** 2
    stored = float(wz @ np.abs(result.state.b[:, -1]) ** 2)
    if stored <= 0.0:
        raise DegenerateDenominatorError("final spin wave is empty")
    return _window_integral(tau, p_pop, -ts / 2, ts / 2) / ts / stored


def ats_reference_control(tau_sig):
    return ControlParams(2 * math.pi, 0.0, tau_sig)


@functools.lru_cache(maxsize=256)
def _reference(d, delta, grids):
    tau = ATS_REFERENCE_PRODUCT / d
    m = MemoryParams(d, tau, delta)
    return character_ratio(solve(m, ats_reference_control(tau), grids), m)


def ats_reference_ratio(d, delta=0.0, grids=None):
    """C0 at optical depth d: pure ATS storage at d * tau_sig = 5.5."""
    return _reference(float(d), float(delta), grids or GridSpec())


def reference_table(d_values, delta=0.0, grids=None):
    return {float(d): ats_reference_ratio(d, delta, grids) for d in d_values}


def label_for(product, c_tilde):
    """Regime label from the adiabaticity product and C~ (may be NaN)."""
    if not math.isnan(c_tilde) and c_tilde <= EIT_THRESHOLD:
        return "eit"
    if product < 1.0:
        return "nonadiabatic"
    if product < ATS_BAND[0]:
        return "absorb_transfer"
    if product <= ATS_BAND[1]:
        return "ats"
    return "mixed"


def classify(m, opt, result=None, grids=None, c0=None):
    """Diagnostics and regime label for an optimized point.

    ``result`` is the solver run at ``opt.best_g``; it is recomputed when
    omitted. ``c0`` overrides the ATS reference ratio.
    """
    grids = grids or GridSpec()
    g = opt.best_g
    if result is None:
        result = solve(m, g, grids)
    c = character_ratio(result, m)
    c0 = ats_reference_ratio(m.d, m.delta, grids) if c0 is None else c0
    c_tilde = c / c0
    product = adiabaticity(m)
    flags = []
    if m.d < LOW_DEPTH:
        flags.append("low_depth")
    if -0.25 <= g.delay / m.tau_sig <= 0.25:
        flags.append("ats_by_delay")
    if 0.75 <= c_tilde <= 1.25:
        flags.append("ats_by_character")
    return ProtocolDiagnostics(
        adiabaticity=product,
        effective_depth=ats_effective_depth(m, g.theta) if g.theta > 0 else math.inf,
        character_ratio=c,
        normalized_character=c_tilde,
        label=label_for(product, c_tilde),
        flags=tuple(flags),
    )
